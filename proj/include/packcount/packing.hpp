#ifndef PACKCOUNT_PACKING_HPP
#define PACKCOUNT_PACKING_HPP

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "packcount/bipartite.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/permutation.hpp"

namespace packcount {

/// One permutation spin per vertex: spins[v][i] is the list index of L(v)
/// used by coloring i at v. Pairwise disjointness of the q colorings holds
/// by construction since each spin is a bijection.
///
/// near_valid_at designates the single vertex whose incident edges may be
/// monochromatic; empty means the packing is required to be fully valid.
struct Packing {
  std::vector<Permutation> spins;
  std::optional<int> near_valid_at;

  int n() const { return static_cast<int>(spins.size()); }

  static Packing identity(int n, int q) { return Packing{std::vector<Permutation>(n, Permutation::identity(q)), {}}; }

  friend bool operator==(const Packing& a, const Packing& b) { return a.spins == b.spins; }
};

inline void check_shape(const Instance& inst, const Packing& p) {
  if (p.n() != inst.n()) throw InvalidArgument("packing has " + std::to_string(p.n()) + " spins, instance has " +
                                               std::to_string(inst.n()) + " vertices");
  for (const auto& s : p.spins) {
    if (s.size() != inst.q()) throw InvalidArgument("spin size does not match list size q");
  }
  if (p.near_valid_at && (*p.near_valid_at < 0 || *p.near_valid_at >= inst.n())) {
    throw InvalidArgument("near-valid vertex out of range");
  }
}

/// Coloring i's color at vertex v.
inline Color packing_color(const Instance& inst, const Packing& p, int v, int i) {
  return inst.color(v, p.spins[v][i]);
}

/// All q colorings are proper across the edge (u, v).
inline bool edge_is_proper(const Instance& inst, const Packing& p, const Edge& e) {
  for (int i = 0; i < inst.q(); ++i) {
    if (packing_color(inst, p, e.u, i) == packing_color(inst, p, e.v, i)) return false;
  }
  return true;
}

/// True iff every coloring is proper on every edge, regardless of near_valid_at.
inline bool is_valid_packing(const Instance& inst, const Packing& p) {
  check_shape(inst, p);
  for (const auto& e : inst.edges()) {
    if (!edge_is_proper(inst, p, e)) return false;
  }
  return true;
}

/// Validity under the packing's own mode: edges at near_valid_at are exempt.
inline bool satisfies_mode(const Instance& inst, const Packing& p) {
  check_shape(inst, p);
  for (const auto& e : inst.edges()) {
    if (p.near_valid_at && (e.u == *p.near_valid_at || e.v == *p.near_valid_at)) continue;
    if (!edge_is_proper(inst, p, e)) return false;
  }
  return true;
}

/// H_u: edge (i, j) iff the j-th color of L(u) is not used at packing index
/// i by any neighbor of u whose spin is considered. With assigned_below set,
/// only neighbors w < assigned_below are considered (partial packings).
inline BipartiteGraph build_availability_graph(const Instance& inst, const Packing& p, int u,
                                               std::optional<int> assigned_below = std::nullopt) {
  const int q = inst.q();
  BipartiteGraph h = BipartiteGraph::complete(q);
  const auto& list_u = inst.list(u);
  for (int w : inst.neighbors(u)) {
    if (assigned_below && w >= *assigned_below) continue;
    const auto& spin = p.spins[w];
    const auto& list_w = inst.list(w);
    for (int i = 0; i < q; ++i) {
      const Color c = list_w[spin[i]];
      auto it = std::lower_bound(list_u.begin(), list_u.end(), c);
      if (it != list_u.end() && *it == c) h.remove_edge(i, static_cast<int>(it - list_u.begin()));
    }
  }
  return h;
}

/// Spins ρ for u that keep every edge at u proper, i.e. the perfect
/// matchings of H_u. For a valid packing this is exactly the set of
/// replacements keeping it valid.
inline std::vector<Matching> available_permutations(const Instance& inst, const Packing& p, int u,
                                                    const MatchingLimits& limits = {}) {
  check_shape(inst, p);
  return enumerate_perfect_matchings(build_availability_graph(inst, p, u), limits);
}

inline nlohmann::json packing_to_json(const Packing& p) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : p.spins) out.push_back(s.images());
  return out;
}

inline Packing packing_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("packing must be an array of permutations");
  Packing p;
  try {
    for (const auto& js : doc) p.spins.emplace_back(js.get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid packing: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid packing: ") + e.what());
  }
  return p;
}

/// Γ-distance proxy between two packings: sum over vertices of Cayley distances.
inline int packing_distance(const Packing& a, const Packing& b) {
  int d = 0;
  for (int v = 0; v < a.n(); ++v) d += cayley_distance(a.spins[v], b.spins[v]);
  return d;
}

}  // namespace packcount

#endif  // PACKCOUNT_PACKING_HPP
