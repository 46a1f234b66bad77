#ifndef PACKCOUNT_PATH_COUPLING_HPP
#define PACKCOUNT_PATH_COUPLING_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "packcount/bipartite.hpp"
#include "packcount/dynamics.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/matching_coupling.hpp"
#include "packcount/packing.hpp"
#include "packcount/parallel.hpp"
#include "packcount/rng.hpp"

namespace packcount {

enum class CouplingMode { automatic, table, sampler };

struct CoupledStepOptions {
  CouplingMode mode = CouplingMode::automatic;
  /// Automatic mode tabulates when H_u(ω) has at most this many perfect matchings.
  std::uint64_t table_cap = 2'000;
  MatchingLimits limits;
};

enum class UpdateKind { disagreeing, neighbor, other };

struct CoupledStep {
  Packing sigma;
  Packing sigma_p;
  int u = 0;
  UpdateKind kind = UpdateKind::other;
  bool tabulated = false;
};

/// The vertex where two packings differ, or nullopt if they are equal.
inline std::optional<int> disagreement_vertex(const Packing& a, const Packing& b) {
  std::optional<int> v;
  for (int w = 0; w < a.n(); ++w) {
    if (a.spins[w] == b.spins[w]) continue;
    if (v) throw InvalidArgument("packings differ at more than one vertex");
    v = w;
  }
  return v;
}

/// Updates the same uniform vertex u in both chains. Away from N(v) the two
/// availability graphs coincide and both chains take the same matching;
/// at a neighbor of v the pair comes from the glued link coupling.
inline CoupledStep coupled_glauber_step(const Instance& inst, const Packing& omega, const Packing& omega_p, Rng& rng,
                                        const CoupledStepOptions& opts = {}) {
  if (inst.n() == 0) throw InvalidArgument("empty instance");
  const auto v = disagreement_vertex(omega, omega_p);
  CoupledStep out{omega, omega_p, static_cast<int>(rng.below(static_cast<std::uint64_t>(inst.n()))),
                  UpdateKind::other, false};
  const int u = out.u;
  if (!v || u == *v || !inst.adjacent(u, *v)) {
    out.kind = (v && u == *v) ? UpdateKind::disagreeing : UpdateKind::other;
    const auto m = sample_perfect_matching(build_availability_graph(inst, omega, u), rng, opts.limits);
    out.sigma.spins[u] = m;
    out.sigma_p.spins[u] = m;
    return out;
  }
  out.kind = UpdateKind::neighbor;
  bool table = opts.mode == CouplingMode::table;
  if (opts.mode == CouplingMode::automatic) {
    const auto h = build_availability_graph(inst, omega, u);
    table = h.q() <= opts.limits.max_exact_side &&
            count_perfect_matchings_u128(h, opts.limits) <= static_cast<u128>(opts.table_cap);
  }
  out.tabulated = table;
  const auto chain = build_link_chain(inst, omega, omega_p, *v, u);
  auto [a, b] = table ? walk_link_tables(chain, rng, opts.limits) : sample_coupled_matchings(chain, rng, opts.limits);
  out.sigma.spins[u] = std::move(a);
  out.sigma_p.spins[u] = std::move(b);
  return out;
}

struct ContractionOptions {
  /// Glauber steps before the Γ-edge is drawn; 0 picks 20n.
  std::uint64_t burn_in = 0;
  double epsilon = 0.01;
  double constant_c = 16.0;
  std::size_t workers = 0;
  CoupledStepOptions step;
};

struct ContractionReport {
  int trials = 0;
  double beta_hat = 0;
  double std_error = 0;
  double ci_low = 0;
  double ci_high = 0;
  double contraction_target = 0;  // 1 − 1/(2n)
  double diameter = 0;            // (Δ+1)(q−1)n
  std::optional<double> mixing_bound;
  int frozen_trials = 0;
  int disagreeing_updates = 0;
  int neighbor_updates = 0;
  int other_updates = 0;
  int tabulated_updates = 0;
  double mean_psi = 0;
  /// Mean d_C(ρ, ρ′) over neighbor updates, and the mean of ψ/(2Δ) there.
  double mean_neighbor_distance = 0;
  double mean_neighbor_target = 0;
  double constant_c = 0;
  bool in_regime = false;  // q ≥ CΔ²
  std::uint64_t burn_in = 0;
};

namespace detail {

struct TrialOutcome {
  double ratio = 1;
  bool frozen = false;
  UpdateKind kind = UpdateKind::other;
  bool tabulated = false;
  int psi = 0;
  int neighbor_distance = 0;
};

/// Uniform Γ-edge neighbor of ω: v uniform among vertices with at least two
/// available spins, ω′_v uniform among the other available spins.
inline std::optional<std::pair<Packing, int>> random_gamma_neighbor(const Instance& inst, const Packing& omega,
                                                                    Rng& rng, const MatchingLimits& limits) {
  std::vector<int> movable;
  std::vector<BipartiteGraph> graphs;
  for (int v = 0; v < inst.n(); ++v) {
    auto h = build_availability_graph(inst, omega, v);
    if (count_perfect_matchings_u128(h, limits) >= 2) {
      movable.push_back(v);
      graphs.push_back(std::move(h));
    }
  }
  if (movable.empty()) return std::nullopt;
  const std::size_t k = rng.below(movable.size());
  const int v = movable[k];
  Packing other = omega;
  do {
    other.spins[v] = sample_perfect_matching(graphs[k], rng, limits);
  } while (other.spins[v] == omega.spins[v]);
  return std::make_pair(std::move(other), v);
}

}  // namespace detail

/// Empirical one-step contraction β̂ = mean δ(σ, σ′)/δ(ω, ω′) over random
/// Γ-edges, with δ the summed Cayley distance. A trial whose state admits
/// no Γ-edge counts as ratio 1.
inline ContractionReport path_coupling_report(const Instance& inst, int trials, const Rng& rng,
                                              const ContractionOptions& opts = {}) {
  if (trials < 1) throw InvalidArgument("trials must be positive");
  if (inst.n() == 0) throw InvalidArgument("empty instance");
  ContractionReport rep;
  rep.trials = trials;
  rep.burn_in = opts.burn_in ? opts.burn_in : 20ULL * static_cast<std::uint64_t>(inst.n());
  std::vector<detail::TrialOutcome> outcomes(trials);
  const std::size_t workers = opts.workers ? opts.workers : worker_count();
  parallel_chunks(static_cast<std::size_t>(trials), workers, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t t = begin; t < end; ++t) {
      Rng r = rng.split(t);
      ChainState state{initial_packing(inst, r), 0, r.split(0)};
      run_chain(inst, state, rep.burn_in, opts.step.limits);
      auto& o = outcomes[t];
      auto edge = detail::random_gamma_neighbor(inst, state.packing, r, opts.step.limits);
      if (!edge) {
        o.frozen = true;
        continue;
      }
      const auto& [omega_p, v] = *edge;
      o.psi = packing_distance(state.packing, omega_p);
      const auto step = coupled_glauber_step(inst, state.packing, omega_p, r, opts.step);
      if (!is_valid_packing(inst, step.sigma) || !is_valid_packing(inst, step.sigma_p)) {
        throw InvariantError("coupled step left the valid packings");
      }
      o.kind = step.kind;
      o.tabulated = step.tabulated;
      o.neighbor_distance = cayley_distance(step.sigma.spins[step.u], step.sigma_p.spins[step.u]);
      o.ratio = static_cast<double>(packing_distance(step.sigma, step.sigma_p)) / o.psi;
    }
  });

  double sum = 0;
  double sum_sq = 0;
  double psi_sum = 0;
  double nd_sum = 0;
  double nt_sum = 0;
  int moved = 0;
  const int delta = inst.max_degree();
  for (const auto& o : outcomes) {
    sum += o.ratio;
    sum_sq += o.ratio * o.ratio;
    if (o.frozen) {
      ++rep.frozen_trials;
      continue;
    }
    ++moved;
    psi_sum += o.psi;
    rep.tabulated_updates += o.tabulated ? 1 : 0;
    switch (o.kind) {
      case UpdateKind::disagreeing: ++rep.disagreeing_updates; break;
      case UpdateKind::neighbor:
        ++rep.neighbor_updates;
        nd_sum += o.neighbor_distance;
        nt_sum += delta ? o.psi / (2.0 * delta) : 0.0;
        break;
      case UpdateKind::other: ++rep.other_updates; break;
    }
  }
  const double n = trials;
  rep.beta_hat = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - n * rep.beta_hat * rep.beta_hat) / (n - 1)) : 0.0;
  rep.std_error = std::sqrt(var / n);
  rep.ci_low = rep.beta_hat - 1.96 * rep.std_error;
  rep.ci_high = rep.beta_hat + 1.96 * rep.std_error;
  rep.contraction_target = 1.0 - 1.0 / (2.0 * inst.n());
  rep.diameter = static_cast<double>(delta + 1) * (inst.q() - 1) * inst.n();
  if (rep.beta_hat < 1 && rep.diameter > 0) rep.mixing_bound = std::log(rep.diameter / opts.epsilon) / (1 - rep.beta_hat);
  rep.mean_psi = moved ? psi_sum / moved : 0.0;
  rep.mean_neighbor_distance = rep.neighbor_updates ? nd_sum / rep.neighbor_updates : 0.0;
  rep.mean_neighbor_target = rep.neighbor_updates ? nt_sum / rep.neighbor_updates : 0.0;
  rep.constant_c = opts.constant_c;
  rep.in_regime = inst.q() >= opts.constant_c * delta * delta;
  return rep;
}

inline nlohmann::json to_json(const ContractionReport& r) {
  nlohmann::json bound = r.mixing_bound ? nlohmann::json(*r.mixing_bound) : nlohmann::json(nullptr);
  return {{"trials", r.trials},
          {"beta_hat", r.beta_hat},
          {"std_error", r.std_error},
          {"ci95", {r.ci_low, r.ci_high}},
          {"contraction_target", r.contraction_target},
          {"diameter", r.diameter},
          {"mixing_bound", bound},
          {"frozen_trials", r.frozen_trials},
          {"updates", {{"disagreeing", r.disagreeing_updates},
                       {"neighbor", r.neighbor_updates},
                       {"other", r.other_updates},
                       {"tabulated", r.tabulated_updates}}},
          {"mean_psi", r.mean_psi},
          {"mean_neighbor_distance", r.mean_neighbor_distance},
          {"mean_neighbor_target", r.mean_neighbor_target},
          {"constant_c", r.constant_c},
          {"in_regime", r.in_regime},
          {"burn_in_steps", r.burn_in}};
}

}  // namespace packcount

#endif  // PACKCOUNT_PATH_COUPLING_HPP
