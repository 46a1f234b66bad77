#ifndef PACKCOUNT_INSTANCE_HPP
#define PACKCOUNT_INSTANCE_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "packcount/errors.hpp"
#include "packcount/rng.hpp"

namespace packcount {

using Color = std::uint64_t;

/// Unordered vertex pair, stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A graph together with a q-list assignment. Immutable once built.
class Instance {
 public:
  Instance(int n, int q, std::vector<Edge> edges, std::vector<std::vector<Color>> lists)
      : n_(n), q_(q), edges_(std::move(edges)), lists_(std::move(lists)) {
    if (n_ < 0) throw ParseError("vertex count must be nonnegative");
    if (q_ < 1) throw ParseError("list size q must be at least 1");
    if (static_cast<int>(lists_.size()) != n_) {
      throw ParseError("expected " + std::to_string(n_) + " lists, got " + std::to_string(lists_.size()));
    }
    for (int v = 0; v < n_; ++v) {
      auto& list = lists_[v];
      if (static_cast<int>(list.size()) != q_) {
        throw ParseError("list of vertex " + std::to_string(v) + " has size " + std::to_string(list.size()) +
                         ", expected " + std::to_string(q_));
      }
      std::sort(list.begin(), list.end());
      if (std::adjacent_find(list.begin(), list.end()) != list.end()) {
        throw ParseError("list of vertex " + std::to_string(v) + " has a duplicate color");
      }
    }
    for (auto& e : edges_) {
      if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_) throw ParseError("edge references a vertex out of range");
      if (e.u == e.v) throw ParseError("self-loop at vertex " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) throw ParseError("duplicate edge");
    neighbors_.assign(n_, {});
    for (const auto& e : edges_) {
      neighbors_[e.u].push_back(e.v);
      neighbors_[e.v].push_back(e.u);
    }
    max_degree_ = 0;
    for (auto& nb : neighbors_) {
      std::sort(nb.begin(), nb.end());
      max_degree_ = std::max(max_degree_, static_cast<int>(nb.size()));
    }
  }

  int n() const { return n_; }
  int q() const { return q_; }
  int max_degree() const { return max_degree_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::vector<Color>>& lists() const { return lists_; }
  const std::vector<Color>& list(int v) const { return lists_[v]; }
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
  int degree(int v) const { return static_cast<int>(neighbors_[v].size()); }

  /// The j-th smallest color of L(v).
  Color color(int v, int j) const { return lists_[v][j]; }

  /// Position of color c in L(v), if present.
  std::optional<int> list_index(int v, Color c) const {
    const auto& list = lists_[v];
    auto it = std::lower_bound(list.begin(), list.end(), c);
    if (it == list.end() || *it != c) return std::nullopt;
    return static_cast<int>(it - list.begin());
  }

  bool adjacent(int u, int v) const {
    const auto& nb = neighbors_[u];
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Same vertices and lists, keeping only the first k edges of the sorted edge list.
  Instance with_edge_prefix(int k) const {
    return Instance(n_, q_, std::vector<Edge>(edges_.begin(), edges_.begin() + k), lists_);
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.n_ == b.n_ && a.q_ == b.q_ && a.edges_ == b.edges_ && a.lists_ == b.lists_;
  }

 private:
  int n_;
  int q_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Color>> lists_;
  std::vector<std::vector<int>> neighbors_;
  int max_degree_ = 0;
};

inline int max_degree(const Instance& inst) { return inst.max_degree(); }

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : inst.edges()) edges.push_back({e.u, e.v});
  return {{"n", inst.n()}, {"q", inst.q()}, {"edges", edges}, {"lists", inst.lists()}};
}

inline Instance instance_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
    for (const char* key : {"n", "q", "edges", "lists"}) {
      if (!doc.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    }
    const auto& jn = doc.at("n");
    const auto& jq = doc.at("q");
    if (!jn.is_number_integer() || !jq.is_number_integer()) throw ParseError("n and q must be integers");
    const int n = jn.get<int>();
    const int q = jq.get<int>();
    std::vector<Edge> edges;
    if (!doc.at("edges").is_array()) throw ParseError("edges must be an array");
    for (const auto& je : doc.at("edges")) {
      if (!je.is_array() || je.size() != 2 || !je[0].is_number_integer() || !je[1].is_number_integer()) {
        throw ParseError("each edge must be a pair of integers");
      }
      edges.push_back({je[0].get<int>(), je[1].get<int>()});
    }
    std::vector<std::vector<Color>> lists;
    if (!doc.at("lists").is_array()) throw ParseError("lists must be an array");
    for (const auto& jl : doc.at("lists")) {
      if (!jl.is_array()) throw ParseError("each list must be an array");
      std::vector<Color> list;
      for (const auto& jc : jl) {
        if (!jc.is_number_unsigned()) throw ParseError("colors must be nonnegative integers");
        list.push_back(jc.get<Color>());
      }
      lists.push_back(std::move(list));
    }
    return Instance(n, q, std::move(edges), std::move(lists));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
}

inline Instance parse_instance(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(doc);
}

/// Canonical text: sorted lists, sorted edges, compact JSON.
inline std::string serialize_instance(const Instance& inst) { return instance_to_json(inst).dump(); }

/// FNV-1a over the canonical serialization, as 16 hex digits.
inline std::string instance_digest(const Instance& inst) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_instance(inst)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Small graph families with every vertex given the list {0, ..., q-1}
/// (or explicit lists). Used by tests and fixtures.
namespace gen {

inline std::vector<std::vector<Color>> identical_lists(int n, int q) {
  std::vector<Color> list(q);
  for (int j = 0; j < q; ++j) list[j] = static_cast<Color>(j);
  return std::vector<std::vector<Color>>(n, list);
}

/// Each vertex draws q distinct colors uniformly from {0, ..., palette-1}.
inline std::vector<std::vector<Color>> random_lists(int n, int q, int palette, Rng& rng) {
  std::vector<std::vector<Color>> lists;
  std::vector<Color> all(palette);
  for (int c = 0; c < palette; ++c) all[c] = static_cast<Color>(c);
  for (int v = 0; v < n; ++v) {
    rng.shuffle(std::span<Color>(all));
    lists.emplace_back(all.begin(), all.begin() + q);
  }
  return lists;
}

inline Instance edgeless(int n, int q) { return Instance(n, q, {}, identical_lists(n, q)); }

inline Instance path(int n, int q) {
  std::vector<Edge> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1});
  return Instance(n, q, edges, identical_lists(n, q));
}

inline Instance cycle(int n, int q) {
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n});
  return Instance(n, q, edges, identical_lists(n, q));
}

inline Instance complete(int n, int q) {
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Instance(n, q, edges, identical_lists(n, q));
}

/// K_{1,leaves} with centre 0.
inline Instance star(int leaves, int q) {
  std::vector<Edge> edges;
  for (int v = 1; v <= leaves; ++v) edges.push_back({0, v});
  return Instance(leaves + 1, q, edges, identical_lists(leaves + 1, q));
}

inline Instance with_lists(const Instance& inst, std::vector<std::vector<Color>> lists) {
  return Instance(inst.n(), inst.q(), inst.edges(), std::move(lists));
}

/// Erdős–Rényi style graph with edge probability p, degrees capped at max_deg.
inline Instance random_graph(int n, int q, double p, int max_deg, Rng& rng) {
  std::vector<Edge> edges;
  std::vector<int> deg(n, 0);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (deg[u] < max_deg && deg[v] < max_deg && rng.bernoulli(p)) {
        edges.push_back({u, v});
        ++deg[u];
        ++deg[v];
      }
  return Instance(n, q, edges, identical_lists(n, q));
}

/// Random d-regular graph by the pairing model with restarts; n*d must be even.
inline Instance random_regular(int n, int d, int q, Rng& rng) {
  if ((n * d) % 2 != 0 || d >= n) throw InvalidArgument("no simple d-regular graph with these parameters");
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> points;
    for (int v = 0; v < n; ++v)
      for (int k = 0; k < d; ++k) points.push_back(v);
    rng.shuffle(std::span<int>(points));
    std::set<Edge> edges;
    bool ok = true;
    for (std::size_t k = 0; k < points.size(); k += 2) {
      Edge e{std::min(points[k], points[k + 1]), std::max(points[k], points[k + 1])};
      if (e.u == e.v || !edges.insert(e).second) {
        ok = false;
        break;
      }
    }
    if (ok) return Instance(n, q, {edges.begin(), edges.end()}, identical_lists(n, q));
  }
  throw InvariantError("random_regular: too many restarts");
}

}  // namespace gen

}  // namespace packcount

#endif  // PACKCOUNT_INSTANCE_HPP
