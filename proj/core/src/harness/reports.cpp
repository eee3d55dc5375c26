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

#include "qforce/harness/reports.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "qforce/error.hpp"

namespace qforce::harness {
namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Json jnum(double v) { return std::isnan(v) ? Json(nullptr) : Json(v); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ContractViolation("format must be csv or json, got " + s);
}

std::string render(const std::vector<perf::PerfReport>& rows, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    o << "variant,precision,pes,freq_mhz,cordic_n,mac_ops,af_ops,mac_cycles,af_cycles,total_cycles,fps,gops,"
         "compute_bound\n";
    for (const auto& r : rows)
      o << r.variant << ',' << fxp::bits(r.hw.precision) << ',' << r.hw.num_pes << ',' << num(r.hw.freq_mhz) << ','
        << r.hw.cordic_n << ',' << r.mac_ops << ',' << r.af_ops << ',' << r.mac_cycles << ',' << r.af_cycles << ','
        << r.total_cycles << ',' << num(r.fps) << ',' << num(r.gops) << ',' << (r.compute_bound ? 1 : 0) << '\n';
    return o.str();
  }
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json layers = Json::array();
    for (const auto& l : r.layers)
      layers.push_back({{"name", l.name},
                        {"mac_ops", l.mac_ops},
                        {"af_ops", l.af_ops},
                        {"mac_cycles", l.mac_cycles},
                        {"af_cycles", l.af_cycles}});
    arr.push_back({{"variant", r.variant},
                   {"precision", fxp::bits(r.hw.precision)},
                   {"pes", r.hw.num_pes},
                   {"freq_mhz", r.hw.freq_mhz},
                   {"cordic_n", r.hw.cordic_n},
                   {"mac_ops", r.mac_ops},
                   {"af_ops", r.af_ops},
                   {"mac_cycles", r.mac_cycles},
                   {"af_cycles", r.af_cycles},
                   {"total_cycles", r.total_cycles},
                   {"fps", r.fps},
                   {"gops", r.gops},
                   {"compute_bound", r.compute_bound},
                   {"layers", layers}});
  }
  return dump(arr);
}

std::string render(const RolloutReport& report, Format f, bool timing) {
  if (f == Format::Csv) {
    std::ostringstream o;
    o << "variant,policy,bits,episodes,mean_reward,std_reward,retention";
    if (timing) o << ",inferences,ns_per_inference";
    o << '\n';
    for (const auto& r : report.rows) {
      o << report.variant << ',' << r.policy << ',' << r.bits << ',' << r.episodes << ',' << num(r.mean_reward) << ','
        << num(r.std_reward) << ',' << num(r.retention);
      if (timing) o << ',' << r.inferences << ',' << num(r.ns_per_inference);
      o << '\n';
    }
    return o.str();
  }
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json j = {{"policy", r.policy},         {"bits", r.bits},
              {"episodes", r.episodes},     {"mean_reward", jnum(r.mean_reward)},
              {"std_reward", jnum(r.std_reward)}, {"retention", jnum(r.retention)}};
    if (timing) {
      j["inferences"] = r.inferences;
      j["ns_per_inference"] = jnum(r.ns_per_inference);
    }
    rows.push_back(std::move(j));
  }
  Json j = {{"seed", report.seed}, {"variant", report.variant}, {"rows", rows}};
  if (timing) j["q8_speedup_vs_q32"] = jnum(report.q8_speedup_vs_q32);
  return dump(j);
}

std::string render(const std::vector<VactDumpRow>& rows, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    o << "function,bits,x,x_code,fixed,oracle,error\n";
    for (const auto& r : rows)
      o << r.function << ',' << r.bits << ',' << num(r.x) << ',' << r.x_code << ',' << num(r.fixed) << ','
        << num(r.oracle) << ',' << num(r.error) << '\n';
    return o.str();
  }
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"function", r.function},
                   {"bits", r.bits},
                   {"x", r.x},
                   {"x_code", r.x_code},
                   {"fixed", r.fixed},
                   {"oracle", r.oracle},
                   {"error", r.error}});
  return dump(arr);
}

std::string render(const std::vector<MacVerifyResult>& rows, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    o << "suite,bits,cases,mismatches\n";
    for (const auto& r : rows) o << r.suite << ',' << r.bits << ',' << r.cases << ',' << r.mismatches << '\n';
    return o.str();
  }
  Json arr = Json::array();
  for (const auto& r : rows)
    arr.push_back({{"suite", r.suite}, {"bits", r.bits}, {"cases", r.cases}, {"mismatches", r.mismatches}});
  return dump(arr);
}

std::string render_probs(const fxp::QTensor& probs, int chosen, Format f) {
  if (f == Format::Csv) {
    std::ostringstream o;
    o << "action,code,prob,chosen\n";
    for (std::size_t i = 0; i < probs.size(); ++i)
      o << i << ',' << probs[i] << ',' << num(fxp::dequantize_code(probs[i], probs.params())) << ','
        << (static_cast<int>(i) == chosen ? 1 : 0) << '\n';
    return o.str();
  }
  Json arr = Json::array();
  for (std::size_t i = 0; i < probs.size(); ++i)
    arr.push_back({{"action", i},
                   {"code", probs[i]},
                   {"prob", fxp::dequantize_code(probs[i], probs.params())},
                   {"chosen", static_cast<int>(i) == chosen}});
  return dump(Json{{"scale", probs.params().scale}, {"bits", probs.params().bits}, {"actions", arr}});
}

}  // namespace qforce::harness
