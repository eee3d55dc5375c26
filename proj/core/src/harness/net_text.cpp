// Copyright 2026 The qforce Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qforce/harness/net_text.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "qforce/error.hpp"

namespace qforce::harness {
namespace {

using qnet::SubgoalVariant;

struct Line {
  int number = 0;
  std::string section;
  std::map<std::string, std::string> kv;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ContractViolation("network text line " + std::to_string(line) + ": " + msg);
}

int to_int(const Line& l, const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(l.number, "bad integer for " + key + ": " + v);
  return out;
}

class Reader {
 public:
  explicit Reader(const Line& l) : l_(l) {}

  void get(const char* key, int& out) {
    if (auto it = l_.kv.find(key); it != l_.kv.end()) {
      out = to_int(l_, key, it->second);
      used_++;
    }
  }
  void get(const char* key, fxp::Precision& out) {
    int b = fxp::bits(out);
    if (auto it = l_.kv.find(key); it != l_.kv.end()) {
      b = to_int(l_, key, it->second);
      if (b != 8 && b != 16 && b != 32) fail(l_.number, "precision must be 8, 16 or 32");
      out = fxp::precision_from_bits(b);
      used_++;
    }
  }
  void get(const char* key, SubgoalVariant& out) {
    if (auto it = l_.kv.find(key); it != l_.kv.end()) {
      if (it->second == "fc") out = SubgoalVariant::FC;
      else if (it->second == "lstm") out = SubgoalVariant::LSTM;
      else fail(l_.number, "variant must be fc or lstm");
      used_++;
    }
  }
  void done() const {
    if (used_ != l_.kv.size()) {
      for (const auto& [k, _] : l_.kv) {
        static const char* known[] = {"height", "width", "channels", "out", "kernel", "precision",
                                      "variant", "hidden", "unroll"};
        bool ok = false;
        for (const char* n : known) ok = ok || k == n;
        if (!ok) fail(l_.number, "unknown key " + k);
      }
      fail(l_.number, "key not valid for section " + l_.section);
    }
  }

 private:
  const Line& l_;
  std::size_t used_ = 0;
};

}  // namespace

qnet::Topology parse_topology(std::string_view text) {
  qnet::Topology t;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  int convs = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream words(raw);
    Line l{number, {}, {}};
    if (!(words >> l.section)) continue;
    std::string tok;
    while (words >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) fail(number, "expected key=value, got " + tok);
      if (!l.kv.emplace(tok.substr(0, eq), tok.substr(eq + 1)).second) fail(number, "duplicate key");
    }
    Reader r(l);
    if (l.section == "input") {
      r.get("height", t.in_height);
      r.get("width", t.in_width);
      r.get("channels", t.in_channels);
    } else if (l.section == "conv") {
      if (convs == 3) fail(number, "more than three conv layers");
      auto& c = t.convs[static_cast<std::size_t>(convs++)];
      r.get("out", c.out_channels);
      r.get("kernel", c.kernel);
      r.get("precision", c.precision);
    } else if (l.section == "embed") {
      r.get("out", t.embed_dim);
      r.get("precision", t.embed_precision);
    } else if (l.section == "subgoal") {
      r.get("variant", t.variant);
      if (t.variant == SubgoalVariant::FC) {
        r.get("out", t.subgoal_dim);
      } else {
        r.get("hidden", t.subgoal_dim);
        r.get("unroll", t.unroll_k);
      }
      r.get("precision", t.subgoal_precision);
    } else if (l.section == "action") {
      r.get("out", t.actions);
      r.get("precision", t.action_precision);
    } else {
      fail(number, "unknown section " + l.section);
    }
    r.done();
  }
  if (convs != 3) throw ContractViolation("network text needs exactly three conv lines");
  t.validate();
  return t;
}

std::string format_topology(const qnet::Topology& t) {
  std::ostringstream o;
  o << "input height=" << t.in_height << " width=" << t.in_width << " channels=" << t.in_channels << '\n';
  for (const auto& c : t.convs)
    o << "conv out=" << c.out_channels << " kernel=" << c.kernel << " precision=" << fxp::bits(c.precision) << '\n';
  o << "embed out=" << t.embed_dim << " precision=" << fxp::bits(t.embed_precision) << '\n';
  if (t.variant == SubgoalVariant::FC)
    o << "subgoal variant=fc out=" << t.subgoal_dim;
  else
    o << "subgoal variant=lstm hidden=" << t.subgoal_dim << " unroll=" << t.unroll_k;
  o << " precision=" << fxp::bits(t.subgoal_precision) << '\n';
  o << "action out=" << t.actions << " precision=" << fxp::bits(t.action_precision) << '\n';
  return o.str();
}

qnet::Topology load_topology(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_topology(ss.str());
}

void save_topology(const std::filesystem::path& path, const qnet::Topology& t) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << format_topology(t);
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace qforce::harness
