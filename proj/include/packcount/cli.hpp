#ifndef PACKCOUNT_CLI_HPP
#define PACKCOUNT_CLI_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "packcount/counting.hpp"
#include "packcount/dynamics.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/matching_coupling.hpp"
#include "packcount/path_coupling.hpp"

namespace packcount {

inline constexpr const char* kVersion = "0.1.0";

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int parse = 2;
inline constexpr int regime = 3;
inline constexpr int capacity = 4;
inline constexpr int invariant = 5;
}  // namespace exit_code

struct RunConfig {
  std::string command;
  std::string instance_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  double failure_prob = 0.25;
  std::optional<std::uint64_t> steps;
  std::optional<int> trials;
  std::string out;
  double constant_c = 16.0;
  bool summary = false;
};

struct RunResult {
  int exit_code = exit_code::ok;
  nlohmann::json report;
  std::string summary;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"count-exact", "count-fpras", "sample",
                                              "mix-lab",     "couple-lab",  "contraction"};
  return names;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read instance file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_instance(text.str());
}

namespace detail {

inline std::uint64_t default_burn_in(const Instance& inst) {
  const double n = std::max(1, inst.n());
  return static_cast<std::uint64_t>(std::ceil(20 * n * std::log(n + 1)));
}

struct Outcome {
  nlohmann::json result;
  std::string summary;
};

inline Outcome count_exact(const Instance& inst) {
  const auto c = exact_count(inst);
  return {{{"count", c.str()}}, "count = " + c.str()};
}

inline Outcome count_fpras(const Instance& inst, const RunConfig& cfg, std::uint64_t seed) {
  const double eps = cfg.epsilon.value_or(0.25);
  const auto est = fpras_count(inst, eps, cfg.failure_prob, seed);
  return {to_json(est, inst.q()), "estimate = " + to_decimal(est.value, 12) + " (epsilon " + std::to_string(eps) + ")"};
}

inline Outcome sample(const Instance& inst, const RunConfig& cfg, std::uint64_t seed) {
  const std::uint64_t steps = cfg.steps.value_or(default_burn_in(inst));
  const int count = cfg.trials.value_or(1);
  const Rng root(seed);
  nlohmann::json samples = nlohmann::json::array();
  bool all_valid = true;
  for (int k = 0; k < count; ++k) {
    Rng r = root.split(static_cast<std::uint64_t>(k));
    ChainState state{initial_packing(inst, r), 0, r.split(0)};
    run_chain(inst, state, steps);
    const bool ok = is_valid_packing(inst, state.packing);
    all_valid = all_valid && ok;
    samples.push_back({{"packing", packing_to_json(state.packing)}, {"valid", ok}});
  }
  if (!all_valid) throw InvariantError("chain produced an invalid packing");
  return {{{"steps", steps}, {"samples", samples}},
          std::to_string(count) + " sample(s) after " + std::to_string(steps) + " steps"};
}

inline Outcome mix_lab(const Instance& inst, const RunConfig& cfg) {
  const auto tm = transition_matrix(inst);
  const double omega = static_cast<double>(tm.size());
  const auto t_max = static_cast<int>(
      cfg.steps.value_or(static_cast<std::uint64_t>(std::ceil(2 * inst.n() * std::log(100 * omega)))));
  const auto curve = worst_case_tv_curve(tm, t_max);
  double stationarity = 0;
  double symmetry = 0;
  std::vector<double> col(tm.size(), 0.0);
  for (std::size_t a = 0; a < tm.size(); ++a) {
    for (const auto& [b, w] : tm.rows[a]) {
      col[b] += w / omega;
      symmetry = std::max(symmetry, std::abs(w - tm.at(b, a)));
    }
  }
  for (double x : col) stationarity = std::max(stationarity, std::abs(x - 1 / omega));
  std::optional<int> hit;
  for (int t = 0; t <= t_max && !hit; ++t)
    if (curve[t] <= 0.01) hit = t;
  nlohmann::json result{{"states", tm.size()},
                        {"strongly_connected", is_strongly_connected(tm)},
                        {"stationarity_error", stationarity},
                        {"symmetry_error", symmetry},
                        {"t_max", t_max},
                        {"worst_case_tv", curve},
                        {"first_step_tv_le_0.01", hit ? nlohmann::json(*hit) : nlohmann::json(nullptr)}};
  return {result, "|states| = " + std::to_string(tm.size()) + ", TV <= 0.01 at step " +
                      (hit ? std::to_string(*hit) : std::string("(not reached)"))};
}

inline Outcome couple_lab(const Instance& inst, const RunConfig& cfg, std::uint64_t seed) {
  Rng r(seed);
  ChainState state{initial_packing(inst, r), 0, r.split(0)};
  run_chain(inst, state, cfg.steps.value_or(default_burn_in(inst)));
  const auto edge = detail::random_gamma_neighbor(inst, state.packing, r, {});
  if (!edge) throw RegimeError("every vertex is frozen; no Γ-edge exists");
  const auto& [omega_p, v] = *edge;
  const auto& nbrs = inst.neighbors(v);
  if (nbrs.empty()) throw RegimeError("disagreeing vertex has no neighbors");
  const int u = nbrs[r.below(nbrs.size())];
  const auto rep = couple_matching_distributions(inst, state.packing, omega_p, v, u);
  auto result = to_json(rep);
  result["v"] = v;
  result["u"] = u;
  result["omega"] = packing_to_json(state.packing);
  result["omega_prime"] = packing_to_json(omega_p);
  result["constant_c"] = cfg.constant_c;
  result["in_regime"] = inst.q() >= cfg.constant_c * inst.max_degree() * inst.max_degree();
  std::ostringstream s;
  s << "E[d_C] = " << rep.expected_distance << ", target psi/(2*maxdeg) = " << rep.target;
  return {result, s.str()};
}

inline Outcome contraction(const Instance& inst, const RunConfig& cfg, std::uint64_t seed) {
  ContractionOptions opts;
  opts.epsilon = cfg.epsilon.value_or(0.01);
  opts.constant_c = cfg.constant_c;
  if (cfg.steps) opts.burn_in = *cfg.steps;
  const auto rep = path_coupling_report(inst, cfg.trials.value_or(1000), Rng(seed), opts);
  std::ostringstream s;
  s << "beta_hat = " << rep.beta_hat << " +/- " << rep.std_error << ", target " << rep.contraction_target;
  if (rep.mixing_bound) s << ", mixing bound " << *rep.mixing_bound;
  return {to_json(rep), s.str()};
}

inline nlohmann::json config_echo(const RunConfig& cfg, std::uint64_t seed, bool generated) {
  auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  return {{"command", cfg.command},
          {"instance", cfg.instance_path},
          {"seed", seed},
          {"seed_generated", generated},
          {"epsilon", opt(cfg.epsilon)},
          {"failure_prob", cfg.failure_prob},
          {"steps", opt(cfg.steps)},
          {"trials", opt(cfg.trials)},
          {"constant_c", cfg.constant_c}};
}

}  // namespace detail

/// Runs one command. Never throws for library errors: they become an exit
/// code and an "error" object in the report.
inline RunResult run(const RunConfig& cfg) {
  RunResult res;
  std::uint64_t seed = 0;
  bool generated = false;
  if (cfg.seed) {
    seed = *cfg.seed;
  } else {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    generated = true;
  }
  res.report = {{"version", kVersion}, {"config", detail::config_echo(cfg, seed, generated)}};
  auto fail = [&](int code, const char* kind, const std::string& message) {
    res.exit_code = code;
    res.report["error"] = {{"kind", kind}, {"message", message}};
    res.summary = std::string(kind) + " error: " + message;
  };
  try {
    const Instance inst = load_instance(cfg.instance_path);
    res.report["instance_hash"] = instance_digest(inst);
    res.report["instance"] = {
        {"n", inst.n()}, {"q", inst.q()}, {"edges", inst.edge_count()}, {"max_degree", inst.max_degree()}};
    detail::Outcome o;
    if (cfg.command == "count-exact") {
      o = detail::count_exact(inst);
    } else if (cfg.command == "count-fpras") {
      o = detail::count_fpras(inst, cfg, seed);
    } else if (cfg.command == "sample") {
      o = detail::sample(inst, cfg, seed);
    } else if (cfg.command == "mix-lab") {
      o = detail::mix_lab(inst, cfg);
    } else if (cfg.command == "couple-lab") {
      o = detail::couple_lab(inst, cfg, seed);
    } else if (cfg.command == "contraction") {
      o = detail::contraction(inst, cfg, seed);
    } else {
      throw InvalidArgument("unknown command: " + cfg.command);
    }
    res.report["result"] = std::move(o.result);
    res.summary = std::move(o.summary);
  } catch (const ParseError& e) {
    fail(exit_code::parse, "parse", e.what());
  } catch (const InvalidArgument& e) {
    fail(exit_code::parse, "argument", e.what());
  } catch (const RegimeError& e) {
    fail(exit_code::regime, "regime", e.what());
  } catch (const DegenerateCoupling& e) {
    fail(exit_code::regime, "regime", e.what());
  } catch (const NoPerfectMatching& e) {
    fail(exit_code::regime, "regime", e.what());
  } catch (const CapacityError& e) {
    fail(exit_code::capacity, "capacity", e.what());
  } catch (const std::exception& e) {
    fail(exit_code::invariant, "invariant", e.what());
  }
  return res;
}

}  // namespace packcount

#endif  // PACKCOUNT_CLI_HPP
