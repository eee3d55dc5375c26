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

#include "qforce/harness/weight_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qforce/error.hpp"
#include "qforce/harness/float_net.hpp"
#include "qforce/harness/net_text.hpp"

namespace qforce::harness {
namespace {

using fxp::Precision;
using fxp::QTensor;
using fxp::QuantParams;

void put(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Cursor {
 public:
  explicit Cursor(const std::vector<std::uint8_t>& b) : b_(b) {}

  std::uint64_t take(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t{b_[pos_++]} << (8 * i);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw IoError("weight file truncated");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

QTensor format_only(const QuantParams& p) { return QTensor({}, p, {0}); }

std::string conv_prefix(std::size_t i) { return "conv" + std::to_string(i + 1); }

class Builder {
 public:
  void add(std::string name, QTensor t) { w.tensors.push_back({std::move(name), std::move(t)}); }
  void format(std::string name, const QuantParams& p) { add(std::move(name), format_only(p)); }
  WeightFile w;
};

}  // namespace

const QTensor& WeightFile::at(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.tensor;
  throw ContractViolation("weight file has no tensor " + name);
}

bool WeightFile::contains(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return true;
  return false;
}

std::vector<std::uint8_t> encode(const WeightFile& w) {
  std::vector<std::uint8_t> out{'Q', 'F', 'R', 'L'};
  put(out, kWeightFileVersion, 2);
  put(out, w.tensors.size(), 4);
  for (const auto& [name, t] : w.tensors) {
    QFORCE_REQUIRE(name.size() <= 0xFFFF, "tensor name too long");
    QFORCE_REQUIRE(t.shape().size() <= 0xFF, "too many dimensions");
    put(out, name.size(), 2);
    out.insert(out.end(), name.begin(), name.end());
    const int bits = t.params().bits;
    put(out, static_cast<std::uint64_t>(bits), 1);
    put(out, std::bit_cast<std::uint64_t>(t.params().scale), 8);
    put(out, t.shape().size(), 1);
    for (auto d : t.shape()) put(out, d, 4);
    for (auto c : t.codes()) put(out, static_cast<std::uint32_t>(c), bits / 8);
  }
  return out;
}

WeightFile decode(const std::vector<std::uint8_t>& bytes) {
  Cursor cur(bytes);
  if (cur.str(4) != "QFRL") throw IoError("not a weight file (bad magic)");
  const auto version = cur.take(2);
  if (version != kWeightFileVersion) throw IoError("unsupported weight file version " + std::to_string(version));
  const auto count = cur.take(4);
  WeightFile w;
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = cur.str(cur.take(2));
    const int bits = static_cast<int>(cur.take(1));
    if (bits != 8 && bits != 16 && bits != 32) throw IoError("tensor " + nt.name + " has invalid bit width");
    const double scale = std::bit_cast<double>(cur.take(8));
    const auto ndims = cur.take(1);
    std::vector<std::size_t> shape;
    std::uint64_t n = 1;
    for (std::uint64_t d = 0; d < ndims; ++d) {
      shape.push_back(cur.take(4));
      n *= shape.back();
      if (n > bytes.size()) throw IoError("tensor " + nt.name + " larger than the file");
    }
    std::vector<std::int32_t> codes(n);
    const int width = bits / 8;
    for (auto& c : codes) {
      const std::uint64_t raw = cur.take(width);
      const int shift = 64 - bits;
      c = static_cast<std::int32_t>(static_cast<std::int64_t>(raw << shift) >> shift);
    }
    try {
      nt.tensor = QTensor(std::move(codes), QuantParams{scale, bits}, std::move(shape));
    } catch (const ContractViolation& e) {
      throw IoError("tensor " + nt.name + ": " + e.what());
    }
    w.tensors.push_back(std::move(nt));
  }
  if (!cur.at_end()) throw IoError("trailing bytes after the last tensor");
  return w;
}

void save_weights(const std::filesystem::path& path, const WeightFile& w) {
  const auto bytes = encode(w);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

WeightFile load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

WeightFile to_weight_file(const qnet::NetworkSpec& net) {
  net.validate();
  Builder b;
  const std::string text = format_topology(net.topology);
  std::vector<std::int32_t> chars(text.begin(), text.end());
  b.add("meta.topology", QTensor(std::move(chars), QuantParams{1.0, 8}, {text.size()}));
  b.add("meta.multiplier", QTensor({static_cast<std::int32_t>(net.multiplier)}, QuantParams{1.0, 8}, {1}));
  b.format("input", net.input);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto p = conv_prefix(i);
    b.add(p + ".weight", net.convs[i].weight);
    b.add(p + ".bias", net.convs[i].bias);
    b.format(p + ".out", net.convs[i].out);
  }
  b.add("embed.weight", net.embed.weight);
  b.add("embed.bias", net.embed.bias);
  b.format("embed.out", net.embed.out);
  if (net.subgoal_fc) {
    b.add("subgoal.weight", net.subgoal_fc->weight);
    b.add("subgoal.bias", net.subgoal_fc->bias);
    b.format("subgoal.out", net.subgoal_fc->out);
  } else {
    const auto& l = *net.subgoal_lstm;
    for (int g = 0; g < 4; ++g) {
      const std::string s = gate_suffix(g);
      b.add("lstm.w_x." + s, l.w_x[static_cast<std::size_t>(g)]);
      b.add("lstm.w_h." + s, l.w_h[static_cast<std::size_t>(g)]);
      b.add("lstm.b." + s, l.b[static_cast<std::size_t>(g)]);
      b.format("lstm.gate." + s, l.gate_in[static_cast<std::size_t>(g)]);
    }
    b.format("lstm.cell", l.cell);
    b.format("lstm.hidden", l.hidden);
  }
  b.format("concat", net.concat);
  b.add("action.weight", net.action.weight);
  b.add("action.bias", net.action.bias);
  b.format("action.logits", net.action.out);
  b.format("action.probs", net.action.act_out);
  return std::move(b.w);
}

qnet::NetworkSpec to_network_spec(const WeightFile& w) {
  const auto& meta = w.at("meta.topology");
  std::string text(meta.codes().begin(), meta.codes().end());
  qnet::NetworkSpec net;
  net.topology = parse_topology(text);
  const auto& t = net.topology;
  if (w.contains("meta.multiplier")) net.multiplier = static_cast<qmac::MultiplierKind>(w.at("meta.multiplier")[0]);
  net.input = w.at("input").params();

  int in_c = t.in_channels;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto p = conv_prefix(i);
    auto& c = net.convs[i];
    c.in_channels = in_c;
    c.out_channels = t.convs[i].out_channels;
    c.kernel = t.convs[i].kernel;
    c.precision = t.convs[i].precision;
    c.weight = w.at(p + ".weight");
    c.bias = w.at(p + ".bias");
    c.out = w.at(p + ".out").params();
    in_c = c.out_channels;
  }
  auto fc = [&](const std::string& p, int in, int out, Precision prec, vact::ActKind act, const std::string& out_name,
                const std::string& act_name) {
    qnet::FcLayerSpec s;
    s.in_dim = in;
    s.out_dim = out;
    s.weight = w.at(p + ".weight");
    s.bias = w.at(p + ".bias");
    s.precision = prec;
    s.activation = act;
    s.out = w.at(out_name).params();
    s.act_out = w.at(act_name).params();
    return s;
  };
  net.embed = fc("embed", t.flatten_dim(), t.embed_dim, t.embed_precision, vact::ActKind::ReLU, "embed.out",
                 "embed.out");
  if (t.variant == qnet::SubgoalVariant::FC) {
    net.subgoal_fc = fc("subgoal", t.embed_dim, t.subgoal_dim, t.subgoal_precision, vact::ActKind::ReLU,
                        "subgoal.out", "subgoal.out");
  } else {
    qnet::LstmWeights l;
    l.input_dim = t.embed_dim;
    l.hidden_dim = t.subgoal_dim;
    l.precision = t.subgoal_precision;
    for (int g = 0; g < 4; ++g) {
      const std::string s = gate_suffix(g);
      l.w_x[static_cast<std::size_t>(g)] = w.at("lstm.w_x." + s);
      l.w_h[static_cast<std::size_t>(g)] = w.at("lstm.w_h." + s);
      l.b[static_cast<std::size_t>(g)] = w.at("lstm.b." + s);
      l.gate_in[static_cast<std::size_t>(g)] = w.at("lstm.gate." + s).params();
    }
    l.cell = w.at("lstm.cell").params();
    l.hidden = w.at("lstm.hidden").params();
    net.subgoal_lstm = std::move(l);
  }
  net.concat = w.at("concat").params();
  net.action = fc("action", t.action_input_dim(), t.actions, t.action_precision, vact::ActKind::Softmax,
                  "action.logits", "action.probs");
  net.validate();
  return net;
}

}  // namespace qforce::harness
