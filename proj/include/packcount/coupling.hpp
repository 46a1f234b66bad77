#ifndef PACKCOUNT_COUPLING_HPP
#define PACKCOUNT_COUPLING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "packcount/errors.hpp"
#include "packcount/rng.hpp"

namespace packcount {

/// Running sum; compensated (Neumaier) for floating-point masses, since
/// coupling tables can hold hundreds of thousands of tiny entries.
template <class Mass>
class MassSum {
 public:
  void add(const Mass& x) {
    if constexpr (std::is_floating_point_v<Mass>) {
      const Mass t = sum_ + x;
      comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
      sum_ = t;
    } else {
      sum_ += x;
    }
  }
  Mass value() const {
    if constexpr (std::is_floating_point_v<Mass>) return sum_ + comp_;
    return sum_;
  }

 private:
  Mass sum_ = 0;
  Mass comp_ = 0;
};

/// Explicit joint distribution over support_a × support_b, with the
/// marginals it is declared to couple.
template <class T, class Mass = double>
struct Coupling {
  struct Entry {
    std::size_t a;
    std::size_t b;
    Mass mass;
  };

  std::vector<T> support_a;
  std::vector<T> support_b;
  std::vector<Mass> mu_a;
  std::vector<Mass> mu_b;
  std::vector<Entry> joint;

  Mass total_mass() const {
    MassSum<Mass> t;
    for (const auto& e : joint) t.add(e.mass);
    return t.value();
  }
};

template <class Mass>
Mass abs_mass(const Mass& x) {
  return x < 0 ? Mass(-x) : x;
}

/// Largest deviation of the joint's total mass and its two marginals from
/// 1, mu_a and mu_b. Also fails on negative entries.
template <class T, class Mass>
Mass marginal_error(const Coupling<T, Mass>& c) {
  std::vector<MassSum<Mass>> row(c.support_a.size());
  std::vector<MassSum<Mass>> col(c.support_b.size());
  Mass err = 0;
  for (const auto& e : c.joint) {
    if (e.mass < 0) err = std::max(err, Mass(-e.mass));
    row[e.a].add(e.mass);
    col[e.b].add(e.mass);
  }
  err = std::max(err, abs_mass(Mass(c.total_mass() - Mass(1))));
  for (std::size_t k = 0; k < row.size(); ++k) err = std::max(err, abs_mass(Mass(row[k].value() - c.mu_a[k])));
  for (std::size_t k = 0; k < col.size(); ++k) err = std::max(err, abs_mass(Mass(col[k].value() - c.mu_b[k])));
  return err;
}

template <class T, class Mass, class F>
double expectation(const Coupling<T, Mass>& c, F&& f) {
  double sum = 0;
  for (const auto& e : c.joint) sum += static_cast<double>(e.mass) * f(c.support_a[e.a], c.support_b[e.b]);
  return sum;
}

template <class T, class Mass>
Coupling<T, Mass> transpose(const Coupling<T, Mass>& c) {
  Coupling<T, Mass> t{c.support_b, c.support_a, c.mu_b, c.mu_a, {}};
  t.joint.reserve(c.joint.size());
  for (const auto& e : c.joint) t.joint.push_back({e.b, e.a, e.mass});
  return t;
}

/// Markov gluing of X–Y and Y–Z couplings into an X–Z coupling:
/// mass(x, z) = Σ_y mass1(x, y) mass2(y, z) / mu_Y(y). The shared middle
/// support must be listed identically in both.
template <class T>
Coupling<T> compose(const Coupling<T>& first, const Coupling<T>& second) {
  if (first.support_b.size() != second.support_a.size() || first.support_b != second.support_a) {
    throw InvalidArgument("compose: middle supports differ");
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> by_middle(second.support_a.size());
  for (const auto& e : second.joint) by_middle[e.a].emplace_back(e.b, e.mass);
  const std::size_t width = second.support_b.size();
  std::unordered_map<std::uint64_t, double> acc;
  for (const auto& e : first.joint) {
    const double scale = e.mass / first.mu_b[e.b];
    for (const auto& [z, m] : by_middle[e.b]) acc[static_cast<std::uint64_t>(e.a) * width + z] += scale * m;
  }
  Coupling<T> out{first.support_a, second.support_b, first.mu_a, second.mu_b, {}};
  out.joint.reserve(acc.size());
  for (const auto& [key, m] : acc) out.joint.push_back({key / width, key % width, m});
  std::sort(out.joint.begin(), out.joint.end(),
            [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  return out;
}

/// One draw (index into support_a, index into support_b) from the joint table.
template <class T>
std::pair<std::size_t, std::size_t> sample_pair(const Coupling<T>& c, Rng& rng) {
  double u = rng.uniform() * c.total_mass();
  for (const auto& e : c.joint) {
    if (u < e.mass) return {e.a, e.b};
    u -= e.mass;
  }
  const auto& last = c.joint.back();
  return {last.a, last.b};
}

template <class T>
Coupling<T> identity_coupling(const std::vector<T>& support) {
  const double w = 1.0 / static_cast<double>(support.size());
  Coupling<T> c{support, support, std::vector<double>(support.size(), w), std::vector<double>(support.size(), w), {}};
  for (std::size_t k = 0; k < support.size(); ++k) c.joint.push_back({k, k, w});
  return c;
}

// ---------------------------------------------------------------------------
// Max-flow machinery

/// Dinic's algorithm over capacities of type Cap. Arcs are explored in
/// insertion order, which fixes the flow chosen among ties.
template <class Cap>
class MaxFlow {
 public:
  explicit MaxFlow(int nodes, Cap eps = Cap(0)) : graph_(nodes), level_(nodes), next_(nodes), eps_(eps) {}

  /// Adds u -> v and returns a handle for flow().
  std::size_t add_arc(int u, int v, Cap cap) {
    graph_[u].push_back({v, cap, static_cast<int>(graph_[v].size())});
    graph_[v].push_back({u, Cap(0), static_cast<int>(graph_[u].size()) - 1});
    handles_.push_back({u, static_cast<int>(graph_[u].size()) - 1, cap});
    return handles_.size() - 1;
  }

  Cap run(int s, int t) {
    Cap total = 0;
    while (bfs(s, t)) {
      std::fill(next_.begin(), next_.end(), 0);
      for (;;) {
        const Cap pushed = dfs(s, t, std::numeric_limits<Cap>::max());
        if (!(pushed > eps_)) break;
        total += pushed;
      }
    }
    return total;
  }

  Cap flow(std::size_t handle) const {
    const auto& h = handles_[handle];
    return h.cap - graph_[h.node][h.index].cap;
  }

 private:
  struct Arc {
    int to;
    Cap cap;
    int rev;
  };
  struct Handle {
    int node;
    int index;
    Cap cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::deque<int> queue{s};
    level_[s] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& a : graph_[u]) {
        if (a.cap > eps_ && level_[a.to] < 0) {
          level_[a.to] = level_[u] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  Cap dfs(int u, int t, Cap limit) {
    if (u == t) return limit;
    for (int& k = next_[u]; k < static_cast<int>(graph_[u].size()); ++k) {
      Arc& a = graph_[u][k];
      if (!(a.cap > eps_) || level_[a.to] != level_[u] + 1) continue;
      const Cap pushed = dfs(a.to, t, std::min(limit, a.cap));
      if (pushed > eps_) {
        a.cap -= pushed;
        graph_[a.to][a.rev].cap += pushed;
        return pushed;
      }
    }
    return 0;
  }

  std::vector<std::vector<Arc>> graph_;
  std::vector<int> level_;
  std::vector<int> next_;
  std::vector<Handle> handles_;
  Cap eps_;
};

/// Bipartite relation between index sets [0, left) and [0, right).
struct RelationGraph {
  std::size_t left = 0;
  std::size_t right = 0;
  std::vector<std::vector<std::size_t>> adj;

  explicit RelationGraph(std::size_t l = 0, std::size_t r = 0) : left(l), right(r), adj(l) {}

  void add(std::size_t a, std::size_t b) { adj[a].push_back(b); }

  bool related(std::size_t a, std::size_t b) const {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  }

  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& row : adj) m += row.size();
    return m;
  }

  std::vector<std::size_t> right_degrees() const {
    std::vector<std::size_t> deg(right, 0);
    for (const auto& row : adj)
      for (auto b : row) ++deg[b];
    return deg;
  }
};

struct MaximalCoupling {
  Coupling<std::size_t> coupling;
  /// Pr[(a, b) is related] under the coupling.
  double edge_probability = 0;
};

namespace detail {

/// Pairs leftover row and column masses in order (north-west corner rule).
template <class Mass, class Emit>
void couple_residuals(const std::vector<Mass>& left, const std::vector<Mass>& right, Emit&& emit) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<Mass> l = left;
  std::vector<Mass> r = right;
  while (i < l.size() && j < r.size()) {
    if (!(l[i] > 0)) {
      ++i;
      continue;
    }
    if (!(r[j] > 0)) {
      ++j;
      continue;
    }
    const Mass m = std::min(l[i], r[j]);
    emit(i, j, m);
    l[i] -= m;
    r[j] -= m;
  }
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

}  // namespace detail

/// Coupling of mu_left and mu_right maximising the probability of a related
/// pair, via max-flow from a source through the relation to a sink. The
/// achieved probability equals min over A ⊆ L of 1 - mu_L(A) + mu_R(N(A)).
inline MaximalCoupling maxflow_coupling(const RelationGraph& rel, const std::vector<double>& mu_left,
                                        const std::vector<double>& mu_right) {
  if (mu_left.size() != rel.left || mu_right.size() != rel.right) {
    throw InvalidArgument("marginal lengths do not match the relation graph");
  }
  constexpr double kEps = 1e-15;
  const int source = static_cast<int>(rel.left + rel.right);
  const int sink = source + 1;
  MaxFlow<double> flow(sink + 1, kEps);
  for (std::size_t a = 0; a < rel.left; ++a) flow.add_arc(source, static_cast<int>(a), mu_left[a]);
  for (std::size_t b = 0; b < rel.right; ++b) flow.add_arc(static_cast<int>(rel.left + b), sink, mu_right[b]);
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> middle;
  for (std::size_t a = 0; a < rel.left; ++a)
    for (auto b : rel.adj[a])
      middle.push_back({{a, b}, flow.add_arc(static_cast<int>(a), static_cast<int>(rel.left + b), 2.0)});
  flow.run(source, sink);

  MaximalCoupling out;
  auto& c = out.coupling;
  c.support_a = detail::iota_indices(rel.left);
  c.support_b = detail::iota_indices(rel.right);
  c.mu_a = mu_left;
  c.mu_b = mu_right;
  std::vector<double> left_rest = mu_left;
  std::vector<double> right_rest = mu_right;
  for (const auto& [ab, handle] : middle) {
    const double f = flow.flow(handle);
    if (f <= kEps) continue;
    c.joint.push_back({ab.first, ab.second, f});
    left_rest[ab.first] -= f;
    right_rest[ab.second] -= f;
    out.edge_probability += f;
  }
  for (auto& x : left_rest) x = x < 1e-14 ? 0.0 : x;
  for (auto& x : right_rest) x = x < 1e-14 ? 0.0 : x;
  detail::couple_residuals(left_rest, right_rest, [&](std::size_t a, std::size_t b, double m) {
    c.joint.push_back({a, b, m});
    if (rel.related(a, b)) out.edge_probability += m;
  });
  return out;
}

/// As maxflow_coupling for uniform marginals, with integer capacities
/// (|R| per left vertex, |L| per right vertex) so the flow is exact.
inline MaximalCoupling maxflow_coupling_uniform(const RelationGraph& rel) {
  using Cap = std::int64_t;
  const Cap nl = static_cast<Cap>(rel.left);
  const Cap nr = static_cast<Cap>(rel.right);
  const Cap scale = nl * nr;
  const int source = static_cast<int>(rel.left + rel.right);
  const int sink = source + 1;
  MaxFlow<Cap> flow(sink + 1);
  for (std::size_t a = 0; a < rel.left; ++a) flow.add_arc(source, static_cast<int>(a), nr);
  for (std::size_t b = 0; b < rel.right; ++b) flow.add_arc(static_cast<int>(rel.left + b), sink, nl);
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> middle;
  for (std::size_t a = 0; a < rel.left; ++a)
    for (auto b : rel.adj[a])
      middle.push_back({{a, b}, flow.add_arc(static_cast<int>(a), static_cast<int>(rel.left + b), scale)});
  const Cap total = flow.run(source, sink);

  MaximalCoupling out;
  auto& c = out.coupling;
  c.support_a = detail::iota_indices(rel.left);
  c.support_b = detail::iota_indices(rel.right);
  c.mu_a.assign(rel.left, 1.0 / static_cast<double>(nl));
  c.mu_b.assign(rel.right, 1.0 / static_cast<double>(nr));
  std::vector<Cap> left_rest(rel.left, nr);
  std::vector<Cap> right_rest(rel.right, nl);
  const double unit = 1.0 / static_cast<double>(scale);
  for (const auto& [ab, handle] : middle) {
    const Cap f = flow.flow(handle);
    if (f == 0) continue;
    c.joint.push_back({ab.first, ab.second, static_cast<double>(f) * unit});
    left_rest[ab.first] -= f;
    right_rest[ab.second] -= f;
  }
  Cap extra = 0;
  detail::couple_residuals(left_rest, right_rest, [&](std::size_t a, std::size_t b, Cap m) {
    c.joint.push_back({a, b, static_cast<double>(m) * unit});
    if (rel.related(a, b)) extra += m;
  });
  if (extra != 0) throw InvariantError("residual mass landed on a relation edge after max-flow");
  out.edge_probability = static_cast<double>(total) * unit;
  return out;
}

using BigRationalMass = boost::multiprecision::cpp_rational;

/// Coupling of the uniform distributions on A and B with
/// Pr[a = b] = |A ∩ B| / max(|A|, |B|), in exact rationals.
inline Coupling<long, BigRationalMass> couple_uniform_sets(std::vector<long> a, std::vector<long> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("couple_uniform_sets needs nonempty sets");
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  using Q = BigRationalMass;
  const Q wa(1, static_cast<long>(a.size()));
  const Q wb(1, static_cast<long>(b.size()));
  const Q diag(1, static_cast<long>(std::max(a.size(), b.size())));
  Coupling<long, Q> c{a, b, std::vector<Q>(a.size(), wa), std::vector<Q>(b.size(), wb), {}};
  std::vector<Q> left_rest = c.mu_a;
  std::vector<Q> right_rest = c.mu_b;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      c.joint.push_back({i, j, diag});
      left_rest[i] -= diag;
      right_rest[j] -= diag;
      ++i;
      ++j;
    }
  }
  detail::couple_residuals(left_rest, right_rest, [&](std::size_t i, std::size_t j, const Q& m) {
    c.joint.push_back({i, j, m});
  });
  return c;
}

template <class T, class Mass>
Mass equality_probability(const Coupling<T, Mass>& c) {
  Mass p = 0;
  for (const auto& e : c.joint)
    if (c.support_a[e.a] == c.support_b[e.b]) p += e.mass;
  return p;
}

template <class T, class Mass, class ToJson>
nlohmann::json coupling_to_json(const Coupling<T, Mass>& c, ToJson&& element) {
  nlohmann::json a = nlohmann::json::array();
  nlohmann::json b = nlohmann::json::array();
  nlohmann::json joint = nlohmann::json::array();
  for (const auto& x : c.support_a) a.push_back(element(x));
  for (const auto& x : c.support_b) b.push_back(element(x));
  for (const auto& e : c.joint) joint.push_back({e.a, e.b, static_cast<double>(e.mass)});
  return {{"support_a", a}, {"support_b", b}, {"joint", joint}};
}

}  // namespace packcount

#endif  // PACKCOUNT_COUPLING_HPP
