#ifndef PACKCOUNT_DYNAMICS_HPP
#define PACKCOUNT_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "packcount/bipartite.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/packing.hpp"
#include "packcount/rng.hpp"

namespace packcount {

/// A valid packing advanced by heat-bath Glauber updates.
struct ChainState {
  Packing packing;
  std::uint64_t step = 0;
  Rng rng;
};

/// Greedy valid packing: vertices in index order, each takes a perfect
/// matching of its availability graph against already placed neighbors.
inline Packing initial_packing(const Instance& inst, Rng& rng) {
  Packing p = Packing::identity(inst.n(), inst.q());
  for (int v = 0; v < inst.n(); ++v) {
    const auto h = build_availability_graph(inst, p, v, v);
    auto m = find_perfect_matching(h, &rng);
    if (!m) throw ConstructionFailed("construction failed: no available permutation for vertex " + std::to_string(v));
    p.spins[v] = *std::move(m);
  }
  return p;
}

/// One heat-bath update in place: a uniform vertex gets a uniform perfect
/// matching of its availability graph. The current spin is always one of
/// them, so self-loops are implicit.
inline void advance(const Instance& inst, ChainState& state, const MatchingLimits& limits = {}) {
  if (inst.n() > 0) {
    const int u = static_cast<int>(state.rng.below(static_cast<std::uint64_t>(inst.n())));
    const auto h = build_availability_graph(inst, state.packing, u);
    state.packing.spins[u] = sample_perfect_matching(h, state.rng, limits);
  }
  ++state.step;
}

inline ChainState glauber_step(const Instance& inst, ChainState state, const MatchingLimits& limits = {}) {
  advance(inst, state, limits);
  return state;
}

inline void run_chain(const Instance& inst, ChainState& state, std::uint64_t steps, const MatchingLimits& limits = {}) {
  for (std::uint64_t t = 0; t < steps; ++t) advance(inst, state, limits);
}

/// Stable byte key of a packing's spins.
inline std::string packing_key(const Packing& p) {
  std::string key;
  for (const auto& s : p.spins)
    for (int x : s.images()) key.push_back(static_cast<char>(x));
  return key;
}

/// All valid packings in lexicographic order, by vertex-wise backtracking.
inline std::vector<Packing> enumerate_packings(const Instance& inst, std::size_t cap = 100'000,
                                               const MatchingLimits& limits = {}) {
  std::vector<Packing> out;
  Packing p = Packing::identity(inst.n(), inst.q());
  auto rec = [&](auto&& self, int v) -> void {
    if (v == inst.n()) {
      if (out.size() >= cap) throw CapacityError("state space exceeds cap of " + std::to_string(cap));
      out.push_back(p);
      return;
    }
    for (auto& m : enumerate_perfect_matchings(build_availability_graph(inst, p, v, v), limits)) {
      p.spins[v] = std::move(m);
      self(self, v + 1);
    }
  };
  rec(rec, 0);
  return out;
}

/// Sparse row-stochastic matrix of the chain over enumerated valid packings.
struct TransitionMatrix {
  std::vector<Packing> states;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t size() const { return states.size(); }

  std::size_t index_of(const Packing& p) const {
    auto it = index.find(packing_key(p));
    if (it == index.end()) throw InvalidArgument("packing is not an enumerated state");
    return it->second;
  }

  double at(std::size_t a, std::size_t b) const {
    const auto& row = rows[a];
    auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(b, -1.0));
    return (it != row.end() && it->first == b) ? it->second : 0.0;
  }
};

inline TransitionMatrix transition_matrix(const Instance& inst, std::size_t cap = 100'000,
                                          const MatchingLimits& limits = {}) {
  if (inst.n() == 0) throw InvalidArgument("transition matrix needs at least one vertex");
  TransitionMatrix tm;
  tm.states = enumerate_packings(inst, cap, limits);
  for (std::size_t k = 0; k < tm.states.size(); ++k) tm.index.emplace(packing_key(tm.states[k]), k);
  tm.rows.resize(tm.states.size());
  const double vertex_weight = 1.0 / inst.n();
  for (std::size_t k = 0; k < tm.states.size(); ++k) {
    std::unordered_map<std::size_t, double> row;
    Packing next = tm.states[k];
    for (int u = 0; u < inst.n(); ++u) {
      const auto matchings = enumerate_perfect_matchings(build_availability_graph(inst, tm.states[k], u), limits);
      const double w = vertex_weight / static_cast<double>(matchings.size());
      for (const auto& m : matchings) {
        next.spins[u] = m;
        row[tm.index_of(next)] += w;
      }
      next.spins[u] = tm.states[k].spins[u];
    }
    tm.rows[k].assign(row.begin(), row.end());
    std::sort(tm.rows[k].begin(), tm.rows[k].end());
  }
  return tm;
}

/// Reachability from state 0 along nonzero transitions, forwards and backwards.
inline bool is_strongly_connected(const TransitionMatrix& tm) {
  const std::size_t n = tm.size();
  if (n == 0) return true;
  std::vector<std::vector<std::size_t>> reverse(n);
  for (std::size_t a = 0; a < n; ++a)
    for (const auto& [b, w] : tm.rows[a])
      if (w > 0) reverse[b].push_back(a);
  auto reach_all = [n](auto&& neighbors_of) {
    std::vector<char> seen(n, 0);
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!queue.empty()) {
      const auto a = queue.front();
      queue.pop_front();
      neighbors_of(a, [&](std::size_t b) {
        if (!seen[b]) {
          seen[b] = 1;
          ++count;
          queue.push_back(b);
        }
      });
    }
    return count == n;
  };
  const bool forward = reach_all([&](std::size_t a, auto&& visit) {
    for (const auto& [b, w] : tm.rows[a])
      if (w > 0) visit(b);
  });
  const bool backward = reach_all([&](std::size_t a, auto&& visit) {
    for (auto b : reverse[a]) visit(b);
  });
  return forward && backward;
}

inline double tv_to_uniform(const std::vector<double>& p) {
  const double u = 1.0 / static_cast<double>(p.size());
  double sum = 0;
  for (double x : p) sum += std::abs(x - u);
  return 0.5 * sum;
}

/// p ↦ pP.
inline std::vector<double> step_distribution(const TransitionMatrix& tm, const std::vector<double>& p) {
  std::vector<double> next(p.size(), 0.0);
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] == 0) continue;
    for (const auto& [b, w] : tm.rows[a]) next[b] += p[a] * w;
  }
  return next;
}

/// d_TV(p0 P^t, uniform) for t = 0..t_max.
inline std::vector<double> exact_tv_curve(const TransitionMatrix& tm, std::vector<double> p0, int t_max) {
  if (p0.size() != tm.size()) throw InvalidArgument("initial distribution has the wrong length");
  std::vector<double> curve;
  curve.reserve(t_max + 1);
  curve.push_back(tv_to_uniform(p0));
  for (int t = 1; t <= t_max; ++t) {
    p0 = step_distribution(tm, p0);
    curve.push_back(tv_to_uniform(p0));
  }
  return curve;
}

inline std::vector<double> point_mass(const TransitionMatrix& tm, std::size_t state) {
  std::vector<double> p(tm.size(), 0.0);
  p[state] = 1.0;
  return p;
}

/// Pointwise maximum of the TV curves over all point-mass starts.
///
/// Relabelling packing indices by the same permutation at every vertex is an
/// automorphism of the chain that fixes the uniform distribution, and every
/// orbit contains exactly one state whose vertex-0 spin is the identity, so
/// only those starts are evaluated.
inline std::vector<double> worst_case_tv_curve(const TransitionMatrix& tm, int t_max) {
  std::vector<double> worst(t_max + 1, 0.0);
  const auto id = Permutation::identity(tm.states.front().spins.front().size());
  for (std::size_t k = 0; k < tm.size(); ++k) {
    if (tm.states[k].spins.front() != id) continue;
    const auto curve = exact_tv_curve(tm, point_mass(tm, k), t_max);
    for (int t = 0; t <= t_max; ++t) worst[t] = std::max(worst[t], curve[t]);
  }
  return worst;
}

/// A single-vertex move of the chain.
struct Transition {
  int vertex = 0;
  Permutation from;
  Permutation to;
};

/// Explicit chain path from a to b: vertices are set to their target spin in
/// index order, and later neighbors that would conflict are first repacked
/// through their availability graph with the conflicting edges deleted.
/// Needs q >= 2Δ + 2 so that the edge-deleted graph still has minimum
/// degree q - Δ - 1 >= q/2.
inline std::vector<Transition> connect_states(const Instance& inst, const Packing& a, const Packing& b) {
  const int q = inst.q();
  if (q < 2 * inst.max_degree() + 2) {
    throw RegimeError("connect_states needs q >= 2*maxdeg + 2 (q=" + std::to_string(q) +
                      ", maxdeg=" + std::to_string(inst.max_degree()) + ")");
  }
  if (!is_valid_packing(inst, a) || !is_valid_packing(inst, b)) throw InvalidArgument("endpoints must be valid");
  std::vector<Transition> path;
  Packing cur = a;
  auto move = [&](int v, Permutation to) {
    if (to == cur.spins[v]) return;
    path.push_back({v, cur.spins[v], to});
    cur.spins[v] = std::move(to);
  };
  for (int i = 0; i < inst.n(); ++i) {
    const Permutation& target = b.spins[i];
    if (cur.spins[i] == target) continue;
    for (int j : inst.neighbors(i)) {
      if (j < i) continue;
      bool conflict = false;
      for (int k = 0; k < q && !conflict; ++k) {
        conflict = inst.color(j, cur.spins[j][k]) == inst.color(i, target[k]);
      }
      if (!conflict) continue;
      auto h = build_availability_graph(inst, cur, j);
      for (int k = 0; k < q; ++k) {
        if (auto idx = inst.list_index(j, inst.color(i, target[k]))) h.remove_edge(k, *idx);
      }
      auto m = find_perfect_matching(h);
      if (!m) throw InvariantError("repacking graph has no perfect matching");
      move(j, *std::move(m));
    }
    if (!build_availability_graph(inst, cur, i).is_matching(target)) {
      throw InvariantError("target spin still unavailable after repacking");
    }
    move(i, target);
  }
  return path;
}

inline int path_weight(const std::vector<Transition>& path) {
  int w = 0;
  for (const auto& t : path) w += cayley_distance(t.from, t.to);
  return w;
}

}  // namespace packcount

#endif  // PACKCOUNT_DYNAMICS_HPP
