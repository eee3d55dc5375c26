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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qforce/error.hpp"
#include "qforce/harness/float_net.hpp"
#include "qforce/harness/net_text.hpp"

namespace qforce::harness {

std::string to_json(const FloatNetwork& net) {
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& [name, t] : net.tensors()) tensors[name] = {{"shape", t.shape}, {"data", t.data}};
  const nlohmann::ordered_json doc = {{"format", "qforce-float"},
                                      {"version", 1},
                                      {"topology", format_topology(net.topology())},
                                      {"tensors", tensors}};
  return doc.dump() + "\n";
}

FloatNetwork float_network_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("float weights are not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "qforce-float" || doc.at("version") != 1)
      throw IoError("not a version-1 float weight file");
    FloatNetwork net(parse_topology(doc.at("topology").get<std::string>()));
    const auto& tensors = doc.at("tensors");
    for (const auto& [name, expected] : net.tensors()) {
      const auto& j = tensors.at(name);
      FloatTensor t{j.at("shape").get<std::vector<std::size_t>>(), j.at("data").get<std::vector<double>>()};
      if (t.shape != expected.shape || t.data.size() != expected.data.size())
        throw IoError("tensor " + name + " has the wrong shape");
      net.at(name) = std::move(t);
    }
    if (tensors.size() != net.tensors().size()) throw IoError("float weights carry unexpected tensors");
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed float weights: ") + e.what());
  }
}

void save_float_weights(const std::filesystem::path& path, const FloatNetwork& net) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << to_json(net);
  if (!f) throw IoError("write failed for " + path.string());
}

FloatNetwork load_float_weights(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return float_network_from_json(ss.str());
}

}  // namespace qforce::harness
