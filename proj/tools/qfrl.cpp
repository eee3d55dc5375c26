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

// qfrl: command-line front end for training, quantizing, running and
// benchmarking policies on the emulated accelerator.
//
// Exit status: 0 success, 1 usage error or contract violation, 2 I/O error,
// 3 training did not reach its target.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qforce/error.hpp"
#include "qforce/harness/diagnostics.hpp"
#include "qforce/harness/float_net.hpp"
#include "qforce/harness/gridworld.hpp"
#include "qforce/harness/net_text.hpp"
#include "qforce/harness/quantize_policy.hpp"
#include "qforce/harness/reports.hpp"
#include "qforce/harness/rollout.hpp"
#include "qforce/harness/train.hpp"
#include "qforce/harness/weight_file.hpp"
#include "qforce/perf.hpp"

namespace {

using namespace qforce;
using fxp::Precision;

constexpr int kExitContract = 1;
constexpr int kExitIo = 2;
constexpr int kExitTraining = 3;

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  auto to_int = [&](const std::string& t) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw ContractViolation("bad integer in list: " + s);
    return v;
  };
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (auto dots = part.find(".."); dots != std::string::npos) {
      const int lo = to_int(part.substr(0, dots));
      const int hi = to_int(part.substr(dots + 2));
      if (lo > hi) throw ContractViolation("empty range: " + part);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(to_int(part));
    }
  }
  if (out.empty()) throw ContractViolation("empty list");
  return out;
}

std::vector<Precision> parse_precisions(const std::string& s) {
  std::vector<Precision> out;
  for (int b : parse_int_list(s)) {
    if (b != 8 && b != 16 && b != 32) throw ContractViolation("precision must be 8, 16 or 32");
    out.push_back(fxp::precision_from_bits(b));
  }
  return out;
}

qnet::SubgoalVariant parse_variant(const std::string& s) {
  if (s == "fc") return qnet::SubgoalVariant::FC;
  if (s == "lstm") return qnet::SubgoalVariant::LSTM;
  throw ContractViolation("variant must be fc or lstm");
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write " + out);
  f << text;
  if (!f) throw IoError("write failed for " + out);
}

// Binary PPM (P6, maxval <= 255) to HWC pixels in [0, 1].
std::vector<double> read_ppm(const std::string& path, int width, int height) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  auto token = [&] {
    std::string t;
    char c;
    while (f.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(f, skip);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        t += c;
        break;
      }
    }
    while (f.get(c) && !std::isspace(static_cast<unsigned char>(c))) t += c;
    return t;
  };
  if (token() != "P6") throw IoError(path + " is not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw IoError(path + " has a malformed PPM header");
  }
  if (w != width || h != height) throw ContractViolation("image must be " + std::to_string(width) + "x" +
                                                         std::to_string(height));
  if (maxval <= 0 || maxval > 255) throw IoError(path + ": only 8-bit PPM is supported");
  std::vector<double> px(static_cast<std::size_t>(w * h * 3));
  for (auto& v : px) {
    char c;
    if (!f.get(c)) throw IoError(path + " is truncated");
    v = static_cast<unsigned char>(c) / static_cast<double>(maxval);
  }
  return px;
}

harness::FloatNetwork obtain_float_policy(const std::string& weights, const std::string& variant, std::uint64_t seed,
                                          int chunk) {
  if (!weights.empty()) return harness::load_float_weights(weights);
  harness::TrainConfig cfg;
  cfg.chunk_episodes = chunk;
  cfg.max_episodes = 10 * chunk;
  const auto t0 = std::chrono::steady_clock::now();
  auto r = harness::train_policy(qnet::Topology::defaults(parse_variant(variant)), seed, cfg,
                                 [](const harness::TrainProgress& p) {
                                   std::cerr << "episodes " << p.episodes << "  sampled mean " << p.train_mean
                                             << "  greedy mean " << p.greedy_mean << '\n';
                                 });
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "trained in " << r.episodes << " episodes, " << s << " s\n";
  return std::move(r.net);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized hierarchical-RL accelerator emulator"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  std::string out;
  std::string format = "csv";
  std::string precision = "16";
  std::string pes = "1";
  int episodes = 2000;
  std::string variant = "fc";
  std::string weights;
  std::string net_file;

  auto* train = app.add_subcommand("train", "Train a float policy on the gridworld");
  train->add_option("--variant", variant, "Sub-goal module: fc or lstm");
  train->add_option("--net", net_file, "Network text file (overrides --variant)");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--episodes", episodes, "Episodes between evaluations; the hard cap is ten times this");
  train->add_option("--out", out, "Float weights (JSON)")->required();

  std::size_t calib = 256;
  auto* quant = app.add_subcommand("quantize", "Quantize float weights into a weight file");
  quant->add_option("--weights", weights, "Float weights (JSON)")->required();
  quant->add_option("--precision", precision, "8, 16 or 32");
  quant->add_option("--seed", seed, "Seed for calibration episodes");
  quant->add_option("--calib", calib, "Calibration observations (at least 256)");
  std::string multiplier = "exact";
  quant->add_option("--multiplier", multiplier, "exact or mitchell");
  quant->add_option("--out", out, "Weight file")->required();

  std::string obs_path;
  std::optional<std::uint64_t> env_seed;
  auto* infer = app.add_subcommand("infer", "Action distribution for one observation");
  infer->add_option("--weights", weights, "Weight file")->required();
  auto* obs_opt = infer->add_option("--obs", obs_path, "Observation image (binary PPM)");
  infer->add_option("--env-seed", env_seed, "Use the gridworld start drawn from this seed")->excludes(obs_opt);
  infer->add_option("--format", format, "csv or json");
  infer->add_option("--out", out, "Output file (default stdout)");

  double freq = 232.0;
  auto* bench = app.add_subcommand("bench", "Analytic cycle/FPS model sweep");
  bench->add_option("--net", net_file, "Network text file (overrides --variant)");
  bench->add_option("--variant", variant, "fc or lstm");
  bench->add_option("--pes", pes, "PE counts, e.g. 1..8 or 1,2,4");
  bench->add_option("--precision", precision, "Precisions, e.g. 8,16,32");
  bench->add_option("--freq", freq, "Clock in MHz");
  bench->add_option("--format", format, "csv or json");
  bench->add_option("--out", out, "Output file (default stdout)");

  bool timing = false;
  int chunk = 2000;
  auto* rollout = app.add_subcommand("rollout", "Reward-retention study of quantized policies");
  rollout->add_option("--weights", weights, "Float weights (JSON); trained from --seed when omitted");
  rollout->add_option("--variant", variant, "fc or lstm, when training");
  rollout->add_option("--precision", precision, "Precisions, e.g. 8,16,32");
  rollout->add_option("--episodes", episodes, "Greedy evaluation episodes per policy");
  rollout->add_option("--seed", seed, "Random seed");
  rollout->add_option("--calib", calib, "Calibration observations");
  rollout->add_option("--train-episodes", chunk, "Training episodes between evaluations");
  rollout->add_flag("--timing", timing, "Include wall-clock columns in the report");
  rollout->add_option("--format", format, "csv or json");
  rollout->add_option("--out", out, "Output file (default stdout)");

  double lo = -4.0, hi = 4.0, step = 1.0 / 256;
  auto* vdump = app.add_subcommand("vact-dump", "Activation error table over an input grid");
  vdump->add_option("--precision", precision, "Precisions, e.g. 8,16,32");
  vdump->add_option("--lo", lo, "Grid start");
  vdump->add_option("--hi", hi, "Grid end");
  vdump->add_option("--step", step, "Grid step");
  vdump->add_option("--format", format, "csv or json");
  vdump->add_option("--out", out, "Output file (default stdout)");

  std::uint64_t cases = 1000000;
  auto* mverify = app.add_subcommand("mac-verify", "Exhaustive and randomized Q-MAC checks");
  mverify->add_option("--precision", precision, "Precisions, e.g. 8,16,32");
  mverify->add_option("--seed", seed, "Random seed");
  mverify->add_option("--cases", cases, "Random products per wide precision");
  mverify->add_option("--format", format, "csv or json");
  mverify->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitContract;
  }

  try {
    const auto fmt = harness::parse_format(format);
    if (*train) {
      const auto topo = net_file.empty() ? qnet::Topology::defaults(parse_variant(variant))
                                         : harness::load_topology(net_file);
      harness::TrainConfig cfg;
      cfg.chunk_episodes = episodes;
      cfg.max_episodes = 10 * episodes;
      auto r = harness::train_policy(topo, seed, cfg, [](const harness::TrainProgress& p) {
        std::cerr << "episodes " << p.episodes << "  sampled mean " << p.train_mean << "  greedy mean "
                  << p.greedy_mean << '\n';
      });
      harness::save_float_weights(out, r.net);
    } else if (*quant) {
      const auto ps = parse_precisions(precision);
      if (ps.size() != 1) throw ContractViolation("quantize takes a single precision");
      if (calib < 256) throw ContractViolation("calibration needs at least 256 observations");
      if (multiplier != "exact" && multiplier != "mitchell") throw ContractViolation("multiplier must be exact or mitchell");
      const auto net = harness::load_float_weights(weights);
      const auto set = harness::collect_calibration(net, calib, seed);
      const auto spec = harness::quantize_policy(
          net, ps.front(), set.ranges,
          multiplier == "exact" ? qmac::MultiplierKind::Exact : qmac::MultiplierKind::MitchellLog);
      harness::save_weights(out, harness::to_weight_file(spec));
    } else if (*infer) {
      const auto spec = harness::to_network_spec(harness::load_weights(weights));
      const auto& t = spec.topology;
      std::vector<double> px;
      if (!obs_path.empty()) {
        QFORCE_REQUIRE(t.in_channels == 3, "PPM input needs a 3-channel network");
        px = read_ppm(obs_path, t.in_width, t.in_height);
      } else {
        QFORCE_REQUIRE(env_seed.has_value(), "infer needs --obs or --env-seed");
        harness::GridWorld world;
        world.reset(*env_seed);
        px = world.observe();
      }
      std::optional<qnet::LstmState> state;
      if (spec.subgoal_lstm) state = qnet::LstmState::zeros(*spec.subgoal_lstm);
      const auto r = qnet::hrl_forward(qnet::quantize_observation(px, spec), spec, state);
      emit(harness::render_probs(r.action_probs, qnet::select_action(r.action_probs), fmt), out);
    } else if (*bench) {
      const auto topo = net_file.empty() ? qnet::Topology::defaults(parse_variant(variant))
                                         : harness::load_topology(net_file);
      const auto pe_list = parse_int_list(pes);
      const auto ps = parse_precisions(precision);
      emit(harness::render(perf::sweep(topo, pe_list, ps, freq), fmt), out);
    } else if (*rollout) {
      const auto ps = parse_precisions(precision);
      QFORCE_REQUIRE(episodes >= 0, "episodes must be non-negative");
      QFORCE_REQUIRE(calib >= 256, "calibration needs at least 256 observations");
      const auto net = obtain_float_policy(weights, variant, seed, chunk);
      const auto report = harness::retention_study(net, ps, episodes, seed, calib);
      for (const auto& r : report.rows)
        std::cerr << r.policy << ": mean " << r.mean_reward << "  retention " << r.retention << "  "
                  << r.ns_per_inference / 1e3 << " us/inference\n";
      std::cerr << "q8 vs q32 wall-clock speedup: " << report.q8_speedup_vs_q32 << '\n';
      emit(harness::render(report, fmt, timing), out);
    } else if (*vdump) {
      const auto ps = parse_precisions(precision);
      emit(harness::render(harness::vact_dump(ps, lo, hi, step), fmt), out);
    } else if (*mverify) {
      std::vector<harness::MacVerifyResult> all;
      for (auto p : parse_precisions(precision)) {
        auto r = harness::mac_verify(p, seed, cases);
        all.insert(all.end(), r.begin(), r.end());
      }
      emit(harness::render(all, fmt), out);
      for (const auto& r : all)
        if (r.mismatches != 0) {
          std::cerr << r.suite << ": " << r.mismatches << " mismatches\n";
          return kExitContract;
        }
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const TrainingFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitTraining;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitContract;
  }
  return 0;
}
