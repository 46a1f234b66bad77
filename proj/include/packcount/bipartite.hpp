#ifndef PACKCOUNT_BIPARTITE_HPP
#define PACKCOUNT_BIPARTITE_HPP

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "packcount/errors.hpp"
#include "packcount/permutation.hpp"
#include "packcount/rng.hpp"

namespace packcount {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt to_bigint(u128 x) {
  BigInt out = static_cast<std::uint64_t>(x >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(x);
  return out;
}

/// A perfect matching of a balanced bipartite graph: left i is matched to right perm[i].
using Matching = Permutation;

/// Balanced bipartite graph on [q] ⊔ [q], stored as one bit row per left vertex.
///
/// In availability usage the left side holds packing indices and the right
/// side holds list indices; edge (i, j) means packing index i may use list
/// index j.
class BipartiteGraph {
 public:
  static constexpr int kMaxSide = 64;

  BipartiteGraph() = default;

  explicit BipartiteGraph(int q) : q_(q), rows_(q, 0) {
    if (q < 1 || q > kMaxSide) throw InvalidArgument("bipartite side size must be in [1, 64]");
  }

  static BipartiteGraph complete(int q) {
    BipartiteGraph h(q);
    for (auto& r : h.rows_) r = h.full_mask();
    return h;
  }

  int q() const { return q_; }

  std::uint64_t full_mask() const { return q_ == 64 ? ~0ULL : ((1ULL << q_) - 1); }
  std::uint64_t row(int i) const { return rows_[i]; }

  std::uint64_t column(int j) const {
    std::uint64_t col = 0;
    for (int i = 0; i < q_; ++i)
      if ((rows_[i] >> j) & 1ULL) col |= 1ULL << i;
    return col;
  }

  bool has_edge(int i, int j) const { return (rows_[i] >> j) & 1ULL; }
  void add_edge(int i, int j) { rows_[i] |= 1ULL << j; }
  void remove_edge(int i, int j) { rows_[i] &= ~(1ULL << j); }
  void set_row(int i, std::uint64_t mask) { rows_[i] = mask & full_mask(); }

  int left_degree(int i) const { return std::popcount(rows_[i]); }
  int right_degree(int j) const { return std::popcount(column(j)); }

  int edge_count() const {
    int m = 0;
    for (auto r : rows_) m += std::popcount(r);
    return m;
  }

  /// Minimum degree over both sides.
  int min_degree() const {
    int d = q_;
    for (int i = 0; i < q_; ++i) d = std::min(d, left_degree(i));
    for (int j = 0; j < q_; ++j) d = std::min(d, right_degree(j));
    return d;
  }

  bool is_matching(const Matching& m) const {
    if (m.size() != q_) return false;
    for (int i = 0; i < q_; ++i)
      if (!has_edge(i, m[i])) return false;
    return true;
  }

  /// Copy with edge (i, j) forced: row i becomes {j} and column j loses every other edge.
  BipartiteGraph forcing(int i, int j) const {
    BipartiteGraph h = *this;
    for (int k = 0; k < q_; ++k) h.rows_[k] &= ~(1ULL << j);
    h.rows_[i] = has_edge(i, j) ? (1ULL << j) : 0;
    return h;
  }

  BipartiteGraph without_edge(int i, int j) const {
    BipartiteGraph h = *this;
    h.remove_edge(i, j);
    return h;
  }

  friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;

 private:
  int q_ = 0;
  std::vector<std::uint64_t> rows_;
};

/// Caps for the exact matching routines.
struct MatchingLimits {
  int max_exact_side = 24;
  std::uint64_t max_enumeration = 1'000'000;
};

namespace detail {

/// Ryser's formula with Gray-code subset order, evaluated modulo 2^128.
/// The permanent of a q x q 0/1 matrix is at most q! < 2^128 for q <= 33,
/// so the wrapped result is exact.
inline u128 ryser_u128(const BipartiteGraph& h) {
  const int q = h.q();
  std::vector<std::uint64_t> cols(q);
  for (int j = 0; j < q; ++j) cols[j] = h.column(j);
  std::vector<std::int64_t> row_sum(q, 0);
  u128 total = 0;
  std::uint64_t gray = 0;
  const std::uint64_t subsets = 1ULL << q;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const int j = std::countr_zero(k);
    const std::uint64_t bit = 1ULL << j;
    gray ^= bit;
    const std::int64_t delta = (gray & bit) ? 1 : -1;
    for (std::uint64_t c = cols[j]; c; c &= c - 1) row_sum[std::countr_zero(c)] += delta;
    u128 prod = 1;
    for (int i = 0; i < q && prod; ++i) prod *= static_cast<u128>(row_sum[i]);
    if (!prod) continue;
    if ((q - std::popcount(gray)) & 1) {
      total -= prod;
    } else {
      total += prod;
    }
  }
  return total;
}

/// Counts matchings of left vertices {q-|R|, ..., q-1} into right set R,
/// memoised on R. Used by the sampling descent.
class ResidualCounter {
 public:
  explicit ResidualCounter(const BipartiteGraph& h) : h_(h) {
    if (h.q() <= kDenseSide) {
      dense_.assign(std::size_t{1} << h.q(), kUnknown);
    }
  }

  u128 count(std::uint64_t right_set) {
    if (right_set == 0) return 1;
    if (!dense_.empty() && dense_[right_set] != kUnknown) return dense_[right_set];
    if (dense_.empty()) {
      auto it = sparse_.find(right_set);
      if (it != sparse_.end()) return it->second;
    }
    const int left = h_.q() - std::popcount(right_set);
    u128 total = 0;
    for (std::uint64_t cand = h_.row(left) & right_set; cand; cand &= cand - 1) {
      total += count(right_set & ~(cand & (0 - cand)));
    }
    if (!dense_.empty()) {
      dense_[right_set] = total;
    } else {
      sparse_.emplace(right_set, total);
    }
    return total;
  }

 private:
  static constexpr int kDenseSide = 16;
  static constexpr u128 kUnknown = ~u128{0};
  const BipartiteGraph& h_;
  std::vector<u128> dense_;
  std::unordered_map<std::uint64_t, u128> sparse_;
};

inline bool augment(const BipartiteGraph& h, int left, std::vector<int>& match_right, std::vector<char>& seen,
                    const std::vector<int>& right_order) {
  for (int j : right_order) {
    if (!h.has_edge(left, j) || seen[j]) continue;
    seen[j] = 1;
    if (match_right[j] < 0 || augment(h, match_right[j], match_right, seen, right_order)) {
      match_right[j] = left;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Number of perfect matchings (the permanent of the biadjacency matrix).
inline BigInt count_perfect_matchings(const BipartiteGraph& h, const MatchingLimits& limits = {}) {
  if (h.q() > limits.max_exact_side) {
    throw CapacityError("exact matching count capped at side " + std::to_string(limits.max_exact_side));
  }
  return to_bigint(detail::ryser_u128(h));
}

/// Exact count as a native integer; q <= 24 keeps it below 2^80.
inline u128 count_perfect_matchings_u128(const BipartiteGraph& h, const MatchingLimits& limits = {}) {
  if (h.q() > limits.max_exact_side) {
    throw CapacityError("exact matching count capped at side " + std::to_string(limits.max_exact_side));
  }
  return detail::ryser_u128(h);
}

/// Every perfect matching, lexicographic in (perm[0], perm[1], ...).
inline std::vector<Matching> enumerate_perfect_matchings(const BipartiteGraph& h, const MatchingLimits& limits = {}) {
  const int q = h.q();
  std::vector<Matching> out;
  std::vector<int> current(q, -1);
  // Prune with Hall-style check on the remaining suffix via residual counts.
  detail::ResidualCounter counter(h);
  auto rec = [&](auto&& self, int left, std::uint64_t used) -> void {
    if (left == q) {
      if (out.size() >= limits.max_enumeration) {
        throw CapacityError("perfect matching enumeration exceeds cap of " + std::to_string(limits.max_enumeration));
      }
      out.emplace_back(current);
      return;
    }
    const std::uint64_t free = h.full_mask() & ~used;
    for (std::uint64_t cand = h.row(left) & free; cand; cand &= cand - 1) {
      const int j = std::countr_zero(cand);
      const std::uint64_t rest = free & ~(1ULL << j);
      if (counter.count(rest) == 0) continue;
      current[left] = j;
      self(self, left + 1, used | (1ULL << j));
    }
  };
  if (h.q() > limits.max_exact_side) {
    throw CapacityError("perfect matching enumeration capped at side " + std::to_string(limits.max_exact_side));
  }
  rec(rec, 0, 0);
  return out;
}

/// Exactly uniform perfect matching by self-reducible descent: left vertex
/// k picks its partner with probability proportional to the number of
/// completions of the residual graph.
inline Matching sample_perfect_matching_descent(const BipartiteGraph& h, Rng& rng) {
  const int q = h.q();
  detail::ResidualCounter counter(h);
  std::uint64_t remaining = h.full_mask();
  const u128 total = counter.count(remaining);
  if (total == 0) throw NoPerfectMatching("graph has no perfect matching");
  std::vector<int> perm(q);
  for (int left = 0; left < q; ++left) {
    const u128 all = counter.count(remaining);
    u128 draw = rng.below128(all);
    for (std::uint64_t cand = h.row(left) & remaining; cand; cand &= cand - 1) {
      const std::uint64_t bit = cand & (0 - cand);
      const u128 w = counter.count(remaining & ~bit);
      if (draw < w) {
        perm[left] = std::countr_zero(bit);
        remaining &= ~bit;
        break;
      }
      draw -= w;
    }
  }
  return Matching(std::move(perm));
}

/// Side size above which a short burst of rejection sampling from S_q is
/// tried before the descent. Both branches return exactly uniform matchings.
inline constexpr int kRejectionSide = 12;
inline constexpr int kRejectionAttempts = 64;

inline std::optional<Matching> sample_perfect_matching_rejection(const BipartiteGraph& h, Rng& rng, int attempts) {
  const int q = h.q();
  std::vector<int> perm(q);
  for (int a = 0; a < attempts; ++a) {
    for (int k = 0; k < q; ++k) perm[k] = k;
    bool ok = true;
    // Fisher–Yates filling position left = 0..q-1, stopping at the first miss.
    for (int left = 0; left < q; ++left) {
      const auto pick = left + static_cast<int>(rng.below(static_cast<std::uint64_t>(q - left)));
      std::swap(perm[left], perm[pick]);
      if (!h.has_edge(left, perm[left])) {
        ok = false;
        break;
      }
    }
    if (ok) return Matching(perm);
  }
  return std::nullopt;
}

inline Matching sample_perfect_matching(const BipartiteGraph& h, Rng& rng, const MatchingLimits& limits = {}) {
  if (h.q() > kRejectionSide) {
    if (auto m = sample_perfect_matching_rejection(h, rng, kRejectionAttempts)) return *std::move(m);
  }
  if (h.q() > limits.max_exact_side) {
    throw CapacityError("matching sampler descent capped at side " + std::to_string(limits.max_exact_side));
  }
  return sample_perfect_matching_descent(h, rng);
}

/// Augmenting-path (Kuhn) perfect matching search. A non-null rng randomises
/// the order in which right vertices are tried.
inline std::optional<Matching> find_perfect_matching(const BipartiteGraph& h, Rng* rng = nullptr) {
  const int q = h.q();
  std::vector<int> right_order(q);
  for (int j = 0; j < q; ++j) right_order[j] = j;
  std::vector<int> left_order = right_order;
  if (rng) {
    rng->shuffle(std::span<int>(right_order));
    rng->shuffle(std::span<int>(left_order));
  }
  std::vector<int> match_right(q, -1);
  for (int left : left_order) {
    std::vector<char> seen(q, 0);
    if (!detail::augment(h, left, match_right, seen, right_order)) return std::nullopt;
  }
  std::vector<int> perm(q);
  for (int j = 0; j < q; ++j) perm[match_right[j]] = j;
  return Matching(std::move(perm));
}

struct HallCertificate {
  bool has_perfect_matching = false;
  /// True when the answer follows from minimum degree >= q/2 alone.
  bool by_density = false;
  std::optional<Matching> witness;
};

/// Perfect matching existence for a graph of minimum degree >= d. With
/// 2d >= q the answer is yes by Hall's condition; a witness is produced
/// either way when one exists.
inline HallCertificate has_perfect_matching_halldense(const BipartiteGraph& h, int d) {
  HallCertificate cert;
  cert.by_density = 2 * d >= h.q() && h.min_degree() >= d;
  cert.witness = find_perfect_matching(h);
  cert.has_perfect_matching = cert.witness.has_value();
  if (cert.by_density && !cert.has_perfect_matching) {
    throw InvariantError("dense bipartite graph without a perfect matching");
  }
  return cert;
}

inline nlohmann::json bipartite_to_json(const BipartiteGraph& h) {
  nlohmann::json adj = nlohmann::json::array();
  for (int i = 0; i < h.q(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::uint64_t r = h.row(i); r; r &= r - 1) row.push_back(std::countr_zero(r));
    adj.push_back(row);
  }
  return {{"q", h.q()}, {"adj", adj}};
}

inline BipartiteGraph bipartite_from_json(const nlohmann::json& doc) {
  try {
    BipartiteGraph h(doc.at("q").get<int>());
    const auto& adj = doc.at("adj");
    if (!adj.is_array() || static_cast<int>(adj.size()) != h.q()) throw ParseError("adj must have q rows");
    for (int i = 0; i < h.q(); ++i) {
      for (const auto& j : adj[i]) {
        const int jj = j.get<int>();
        if (jj < 0 || jj >= h.q()) throw ParseError("right vertex out of range");
        h.add_edge(i, jj);
      }
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid bipartite graph: ") + e.what());
  }
}

}  // namespace packcount

#endif  // PACKCOUNT_BIPARTITE_HPP
