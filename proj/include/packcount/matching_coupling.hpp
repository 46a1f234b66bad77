#ifndef PACKCOUNT_MATCHING_COUPLING_HPP
#define PACKCOUNT_MATCHING_COUPLING_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "packcount/bipartite.hpp"
#include "packcount/coupling.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/packing.hpp"
#include "packcount/permutation.hpp"
#include "packcount/rng.hpp"

namespace packcount {

/// A left-right edge of a BipartiteGraph.
struct GraphEdge {
  int left = 0;
  int right = 0;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// x∘(a i j): the 3-cycle a→i→j→a applied on the left-vertex side.
inline Matching rotate_three(const Matching& x, int a, int i, int j) {
  std::vector<int> y = x.images();
  y[a] = x[i];
  y[i] = x[j];
  y[j] = x[a];
  return Matching(std::move(y));
}

namespace detail {

inline std::unordered_map<Matching, std::size_t, PermutationHash> index_map(const std::vector<Matching>& v) {
  std::unordered_map<Matching, std::size_t, PermutationHash> m;
  m.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) m.emplace(v[k], k);
  return m;
}

}  // namespace detail

/// Relation between ℒ (matchings using (a, b)) and ℛ (matchings avoiding
/// it): x ~ y iff y = x∘(a i j) for distinct i, j ≠ a.
inline RelationGraph three_cycle_relation(const BipartiteGraph& h, int a, const std::vector<Matching>& with_e,
                                          const std::vector<Matching>& without_e) {
  const auto idx = detail::index_map(without_e);
  const int q = h.q();
  RelationGraph rel(with_e.size(), without_e.size());
  for (std::size_t k = 0; k < with_e.size(); ++k) {
    for (int i = 0; i < q; ++i) {
      if (i == a) continue;
      for (int j = 0; j < q; ++j) {
        if (j == a || j == i) continue;
        const Matching y = rotate_three(with_e[k], a, i, j);
        if (!h.is_matching(y)) continue;
        auto it = idx.find(y);
        if (it == idx.end()) throw InvariantError("3-cycle image uses the forced edge");
        rel.add(k, it->second);
      }
    }
  }
  return rel;
}

struct EdgeCouplingResult {
  GraphEdge edge;
  std::vector<Matching> with_edge;     // ℒ
  std::vector<Matching> without_edge;  // ℛ
  RelationGraph relation;
  /// Max-flow coupling of U_ℒ and U_ℛ over the 3-cycle relation (indices).
  MaximalCoupling intermediate;
  /// Coupling of U_ℛ (support_a) and U_{ℒ∪ℛ} (support_b, lexicographic).
  Coupling<Matching> coupling;
  double related_probability = 0;
  double expected_distance = 0;
};

/// Coupling of the uniform distributions on ℛ and ℒ∪ℛ: with probability
/// |ℛ|/N both sides agree on a uniform element of ℛ, otherwise the pair is
/// drawn from the maximal coupling of U_ℒ and U_ℛ.
inline EdgeCouplingResult couple_matchings_edge(const BipartiteGraph& h, GraphEdge e, int delta,
                                                const MatchingLimits& limits = {}) {
  const int q = h.q();
  if (e.left < 0 || e.left >= q || e.right < 0 || e.right >= q || !h.has_edge(e.left, e.right)) {
    throw InvalidArgument("edge is not in the graph");
  }
  if (h.min_degree() < q - delta) {
    throw InvalidArgument("min degree " + std::to_string(h.min_degree()) + " is below q - delta = " +
                          std::to_string(q - delta));
  }
  EdgeCouplingResult r{e, {}, {}, RelationGraph(), {}, {}, 0, 0};
  const auto all = enumerate_perfect_matchings(h, limits);
  for (const auto& m : all) (m[e.left] == e.right ? r.with_edge : r.without_edge).push_back(m);
  if (r.without_edge.empty()) throw DegenerateCoupling("every perfect matching uses the edge");
  r.relation = three_cycle_relation(h, e.left, r.with_edge, r.without_edge);

  const auto all_idx = detail::index_map(all);
  const auto ridx = detail::index_map(r.without_edge);
  const double nl = static_cast<double>(r.with_edge.size());
  const double nr = static_cast<double>(r.without_edge.size());
  const double n = nl + nr;
  auto& c = r.coupling;
  c.support_a = r.without_edge;
  c.support_b = all;
  c.mu_a.assign(r.without_edge.size(), 1.0 / nr);
  c.mu_b.assign(all.size(), 1.0 / n);
  for (const auto& y : r.without_edge) c.joint.push_back({ridx.at(y), all_idx.at(y), 1.0 / n});
  if (!r.with_edge.empty()) {
    r.intermediate = maxflow_coupling_uniform(r.relation);
    r.related_probability = r.intermediate.edge_probability;
    for (const auto& en : r.intermediate.coupling.joint) {
      c.joint.push_back({en.b, all_idx.at(r.with_edge[en.a]), en.mass * nl / n});
    }
  }
  r.expected_distance = expectation(c, [](const Matching& a, const Matching& b) { return cayley_distance(a, b); });
  return r;
}

// ---------------------------------------------------------------------------
// Chain of single-edge links between H_u(ω) and H_u(ω′)

/// One link G_k → G_{k+1}; the graphs differ in exactly one edge.
struct Link {
  BipartiteGraph from;
  BipartiteGraph to;
  GraphEdge edge;
  bool removes = true;  // to = from − edge, else to = from + edge
  int transposition = 0;
  int delta = 0;  // degree deficit bound for the larger graph of the link

  const BipartiteGraph& larger() const { return removes ? from : to; }
};

struct LinkChain {
  int vertex = 0;  // v, the disagreeing vertex
  int target = 0;  // u, the updated neighbor
  TranspositionPath path;
  std::vector<BipartiteGraph> availability;  // H_u at each state of the path
  std::vector<Link> links;
  /// Per transposition: number of removed and added availability edges.
  std::vector<std::pair<int, int>> edge_changes;
};

/// For each transposition of ω_v → ω′_v, removes the vanishing availability
/// edges of H_u one at a time and then adds the new ones. The intermediate
/// packings (ω with v's spin partway along the path) are near-valid at v.
inline LinkChain build_link_chain(const Instance& inst, const Packing& omega, const Packing& omega_p, int v, int u) {
  check_shape(inst, omega);
  check_shape(inst, omega_p);
  for (int w = 0; w < inst.n(); ++w) {
    if (w != v && omega.spins[w] != omega_p.spins[w]) throw InvalidArgument("packings differ away from v");
  }
  if (!inst.adjacent(u, v)) throw InvalidArgument("u must be a neighbor of v");
  LinkChain chain;
  chain.vertex = v;
  chain.target = u;
  chain.path = transposition_path(omega.spins[v], omega_p.spins[v]);
  const int q = inst.q();
  const int base_delta = inst.degree(u);
  Packing cur = omega;
  cur.near_valid_at = v;
  const auto states = chain.path.states();
  for (const auto& s : states) {
    cur.spins[v] = s;
    chain.availability.push_back(build_availability_graph(inst, cur, u));
  }
  for (int k = 0; k + 1 < static_cast<int>(chain.availability.size()); ++k) {
    const auto& a = chain.availability[k];
    const auto& b = chain.availability[k + 1];
    std::vector<GraphEdge> removed;
    std::vector<GraphEdge> added;
    for (int i = 0; i < q; ++i) {
      for (int j = 0; j < q; ++j) {
        if (a.has_edge(i, j) && !b.has_edge(i, j)) removed.push_back({i, j});
        if (!a.has_edge(i, j) && b.has_edge(i, j)) added.push_back({i, j});
      }
    }
    const auto& t = chain.path.steps[k];
    auto touches_transposition = [&](const GraphEdge& g) {
      return g.left == states[k].inverse()[t.a] || g.left == states[k].inverse()[t.b];
    };
    if (removed.size() > 2 || added.size() > 2 ||
        !std::all_of(removed.begin(), removed.end(), touches_transposition) ||
        !std::all_of(added.begin(), added.end(), touches_transposition)) {
      throw InvariantError("a transposition changed availability outside its two packing indices");
    }
    chain.edge_changes.emplace_back(static_cast<int>(removed.size()), static_cast<int>(added.size()));
    BipartiteGraph g = a;
    for (const auto& e : removed) {
      BipartiteGraph next = g;
      next.remove_edge(e.left, e.right);
      chain.links.push_back({g, next, e, true, k, g == a ? base_delta : base_delta + 1});
      g = std::move(next);
    }
    for (const auto& e : added) {
      BipartiteGraph next = g;
      next.add_edge(e.left, e.right);
      chain.links.push_back({g, next, e, false, k, next == b ? base_delta : base_delta + 1});
      g = std::move(next);
    }
    if (!(g == b)) throw InvariantError("link chain does not reach the next availability graph");
  }
  return chain;
}

/// Coupling of U(PM(from)) and U(PM(to)) for one link, oriented from → to.
inline Coupling<Matching> link_coupling(const Link& link, const MatchingLimits& limits = {}) {
  const auto& big = link.larger();
  const auto small = link.removes ? link.to : link.from;
  if (count_perfect_matchings_u128(big.forcing(link.edge.left, link.edge.right), limits) == 0) {
    return identity_coupling(enumerate_perfect_matchings(small, limits));
  }
  auto r = couple_matchings_edge(big, link.edge, link.delta, limits);
  return link.removes ? transpose(r.coupling) : std::move(r.coupling);
}

struct MatchingCouplingReport {
  Coupling<Matching> coupling;  // U(PM(H_u(ω))) vs U(PM(H_u(ω′)))
  int psi = 0;
  int links = 0;
  std::vector<std::pair<int, int>> edge_changes;
  double expected_distance = 0;
  double target = 0;  // ψ / (2Δ)
  double marginal_error = 0;
  std::size_t max_support = 0;
};

/// Glues the link couplings along the chain into one coupling of the
/// uniform matchings of H_u(ω) and H_u(ω′).
inline MatchingCouplingReport couple_matching_distributions(const Instance& inst, const Packing& omega,
                                                            const Packing& omega_p, int v, int u,
                                                            const MatchingLimits& limits = {}) {
  const LinkChain chain = build_link_chain(inst, omega, omega_p, v, u);
  MatchingCouplingReport rep;
  rep.psi = chain.path.length();
  rep.links = static_cast<int>(chain.links.size());
  rep.edge_changes = chain.edge_changes;
  rep.coupling = identity_coupling(enumerate_perfect_matchings(chain.availability.front(), limits));
  rep.max_support = rep.coupling.support_a.size();
  for (const auto& link : chain.links) {
    rep.coupling = compose(rep.coupling, link_coupling(link, limits));
    rep.max_support = std::max(rep.max_support, rep.coupling.support_b.size());
  }
  rep.expected_distance =
      expectation(rep.coupling, [](const Matching& a, const Matching& b) { return cayley_distance(a, b); });
  rep.target = inst.max_degree() ? rep.psi / (2.0 * inst.max_degree()) : 0.0;
  rep.marginal_error = marginal_error(rep.coupling);
  return rep;
}

// ---------------------------------------------------------------------------
// Sampler form of the link couplings, for matching sets too large to tabulate

/// Draws from a coupling of U(PM(G)) and U(PM(G − e)) conditionally on
/// either coordinate. Related pairs are again x ~ x∘(a i j); the joint
/// mass on a related pair is min(1/(|ℒ| deg x), 1/(|ℛ| deg y)) (a
/// Metropolis kernel between U_ℒ and U_ℛ) and the rest is coupled
/// independently, which keeps both marginals exact.
class EdgeLinkSampler {
 public:
  EdgeLinkSampler(BipartiteGraph g, GraphEdge e, MatchingLimits limits = {})
      : g_(std::move(g)), without_(g_.without_edge(e.left, e.right)), forced_(g_.forcing(e.left, e.right)), e_(e),
        limits_(limits) {}

  /// Given x ~ U(PM(G)), returns y with y ~ U(PM(G − e)).
  Matching given_superset(const Matching& x, Rng& rng) {
    if (x[e_.left] != e_.right) return x;
    counts();
    const auto nbrs = left_neighbors(x);
    if (!nbrs.empty()) {
      const Matching& y = nbrs[rng.below(nbrs.size())];
      const double accept = ratio_ * static_cast<double>(nbrs.size()) / static_cast<double>(right_degree(y));
      if (rng.uniform() < accept) return y;
    }
    for (int attempt = 0; attempt < kMaxResidualAttempts; ++attempt) {
      Matching y = sample_perfect_matching(without_, rng, limits_);
      const double dy = right_degree(y);
      double s = 0;
      for (const auto& x2 : right_neighbors(y)) {
        s += std::min(1.0 / (ratio_ * static_cast<double>(left_neighbors(x2).size())), 1.0 / dy);
      }
      if (rng.uniform() < 1.0 - s) return y;
    }
    throw InvariantError("residual rejection did not terminate");
  }

  /// Given y ~ U(PM(G − e)), returns x with x ~ U(PM(G)).
  Matching given_subset(const Matching& y, Rng& rng) {
    counts();
    if (num_with_ == 0) return y;
    const double keep = static_cast<double>(num_without_) / static_cast<double>(num_with_ + num_without_);
    if (rng.uniform() < keep) return y;
    const auto nbrs = right_neighbors(y);
    if (!nbrs.empty()) {
      const Matching& x = nbrs[rng.below(nbrs.size())];
      const double accept =
          static_cast<double>(nbrs.size()) / (ratio_ * static_cast<double>(left_neighbors(x).size()));
      if (rng.uniform() < accept) return x;
    }
    for (int attempt = 0; attempt < kMaxResidualAttempts; ++attempt) {
      Matching x = sample_perfect_matching(forced_, rng, limits_);
      const double dx = static_cast<double>(left_neighbors(x).size());
      double t = 0;
      for (const auto& y2 : left_neighbors(x)) t += std::min(1.0 / dx, ratio_ / right_degree(y2));
      if (rng.uniform() < 1.0 - t) return x;
    }
    throw InvariantError("residual rejection did not terminate");
  }

  std::vector<Matching> left_neighbors(const Matching& x) const {
    std::vector<Matching> out;
    const int q = g_.q();
    for (int i = 0; i < q; ++i) {
      if (i == e_.left) continue;
      for (int j = 0; j < q; ++j) {
        if (j == e_.left || j == i) continue;
        auto y = rotate_three(x, e_.left, i, j);
        if (g_.is_matching(y)) out.push_back(std::move(y));
      }
    }
    return out;
  }

  /// x with x∘(a i j) = y: here y(j) = b, and x = y∘(a j i).
  std::vector<Matching> right_neighbors(const Matching& y) const {
    std::vector<Matching> out;
    const int q = g_.q();
    const int j = y.inverse()[e_.right];
    for (int i = 0; i < q; ++i) {
      if (i == e_.left || i == j) continue;
      auto x = rotate_three(y, e_.left, j, i);
      if (g_.is_matching(x)) out.push_back(std::move(x));
    }
    return out;
  }

  double right_degree(const Matching& y) const { return static_cast<double>(right_neighbors(y).size()); }

 private:
  static constexpr int kMaxResidualAttempts = 1'000'000;

  void counts() {
    if (counted_) return;
    num_with_ = count_perfect_matchings_u128(forced_, limits_);
    num_without_ = count_perfect_matchings_u128(without_, limits_);
    if (num_without_ == 0) throw DegenerateCoupling("every perfect matching uses the edge");
    ratio_ = static_cast<double>(num_with_) / static_cast<double>(num_without_);
    counted_ = true;
  }

  BipartiteGraph g_;
  BipartiteGraph without_;
  BipartiteGraph forced_;
  GraphEdge e_;
  MatchingLimits limits_;
  bool counted_ = false;
  u128 num_with_ = 0;
  u128 num_without_ = 0;
  double ratio_ = 0;
};

/// One coupled draw (ρ, ρ′) by walking a uniform matching of H_u(ω) along the chain.
inline std::pair<Matching, Matching> sample_coupled_matchings(const LinkChain& chain, Rng& rng,
                                                              const MatchingLimits& limits = {}) {
  Matching first = sample_perfect_matching(chain.availability.front(), rng, limits);
  Matching x = first;
  for (const auto& link : chain.links) {
    EdgeLinkSampler s(link.larger(), link.edge, limits);
    x = link.removes ? s.given_superset(x, rng) : s.given_subset(x, rng);
  }
  return {std::move(first), std::move(x)};
}

/// Same draw as sampling the glued table, without materialising it: a
/// uniform matching of H_u(ω) is pushed through each link's conditional.
inline std::pair<Matching, Matching> walk_link_tables(const LinkChain& chain, Rng& rng,
                                                      const MatchingLimits& limits = {}) {
  const auto start = enumerate_perfect_matchings(chain.availability.front(), limits);
  if (start.empty()) throw NoPerfectMatching("availability graph has no perfect matching");
  const std::size_t first = rng.below(start.size());
  std::size_t x = first;
  Matching last = start[x];
  for (const auto& link : chain.links) {
    const auto c = link_coupling(link, limits);
    double u = rng.uniform() * c.mu_a[x];
    std::optional<std::size_t> next;
    for (const auto& e : c.joint) {
      if (e.a != x) continue;
      next = e.b;
      if (u < e.mass) break;
      u -= e.mass;
    }
    if (!next) throw InvariantError("link coupling has an empty row");
    x = *next;
    last = c.support_b[x];
  }
  return {start[first], std::move(last)};
}

inline nlohmann::json to_json(const MatchingCouplingReport& r) {
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& [rem, add] : r.edge_changes) changes.push_back({{"removed", rem}, {"added", add}});
  return {{"psi", r.psi},
          {"links", r.links},
          {"edge_changes", changes},
          {"expected_distance", r.expected_distance},
          {"target", r.target},
          {"marginal_error", r.marginal_error},
          {"support_a", r.coupling.support_a.size()},
          {"support_b", r.coupling.support_b.size()},
          {"joint_entries", r.coupling.joint.size()},
          {"max_support", r.max_support}};
}

}  // namespace packcount

#endif  // PACKCOUNT_MATCHING_COUPLING_HPP
