#ifndef PACKCOUNT_PERMUTATION_HPP
#define PACKCOUNT_PERMUTATION_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "packcount/errors.hpp"
#include "packcount/rng.hpp"

namespace packcount {

/// A bijection of {0, ..., q-1}. Element k maps to operator[](k).
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<int> images) : images_(std::move(images)) {
    std::vector<char> seen(images_.size(), 0);
    for (int x : images_) {
      if (x < 0 || static_cast<std::size_t>(x) >= images_.size() || seen[x]) {
        throw InvalidArgument("not a permutation");
      }
      seen[x] = 1;
    }
  }

  static Permutation identity(int q) {
    Permutation p;
    p.images_.resize(q);
    std::iota(p.images_.begin(), p.images_.end(), 0);
    return p;
  }

  static Permutation random(int q, Rng& rng) {
    Permutation p = identity(q);
    rng.shuffle(std::span<int>(p.images_));
    return p;
  }

  int size() const { return static_cast<int>(images_.size()); }
  int operator[](int k) const { return images_[k]; }
  const std::vector<int>& images() const { return images_; }

  Permutation inverse() const {
    Permutation inv;
    inv.images_.resize(images_.size());
    for (int k = 0; k < size(); ++k) inv.images_[images_[k]] = k;
    return inv;
  }

  /// (this ∘ other)(k) = this[other[k]].
  Permutation compose(const Permutation& other) const {
    check_same_size(other);
    Permutation out;
    out.images_.resize(images_.size());
    for (int k = 0; k < size(); ++k) out.images_[k] = images_[other.images_[k]];
    return out;
  }

  int cycle_count() const {
    std::vector<char> seen(images_.size(), 0);
    int cycles = 0;
    for (int k = 0; k < size(); ++k) {
      if (seen[k]) continue;
      ++cycles;
      for (int x = k; !seen[x]; x = images_[x]) seen[x] = 1;
    }
    return cycles;
  }

  /// Exchanges the values a and b wherever they occur; left multiplication
  /// by the transposition (a b).
  void swap_values(int a, int b) {
    auto ia = std::find(images_.begin(), images_.end(), a);
    auto ib = std::find(images_.begin(), images_.end(), b);
    std::iter_swap(ia, ib);
  }

  /// Exchanges the images at positions i and j; right multiplication by (i j).
  void swap_positions(int i, int j) { std::swap(images_[i], images_[j]); }

  /// Advances to the lexicographic successor; false after the last one.
  bool next() { return std::next_permutation(images_.begin(), images_.end()); }

  std::string to_string() const {
    std::string s = "[";
    for (int k = 0; k < size(); ++k) {
      if (k) s += ",";
      s += std::to_string(images_[k]);
    }
    return s + "]";
  }

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

  void check_same_size(const Permutation& other) const {
    if (other.size() != size()) throw InvalidArgument("permutation size mismatch");
  }

 private:
  std::vector<int> images_;
};

struct PermutationHash {
  std::size_t operator()(const Permutation& p) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (int x : p.images()) {
      h ^= static_cast<std::uint64_t>(x) + 1;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Minimum number of transpositions turning r into s.
inline int cayley_distance(const Permutation& r, const Permutation& s) {
  r.check_same_size(s);
  return s.size() - r.inverse().compose(s).cycle_count();
}

/// Swap of two values; applying it to p is left multiplication (a b)·p.
struct Transposition {
  int a = 0;
  int b = 0;
  friend bool operator==(const Transposition&, const Transposition&) = default;
};

inline Permutation apply(const Transposition& t, Permutation p) {
  p.swap_values(t.a, t.b);
  return p;
}

/// target = steps[k-1] ··· steps[0] · source, with k minimal.
struct TranspositionPath {
  Permutation source;
  Permutation target;
  std::vector<Transposition> steps;

  int length() const { return static_cast<int>(steps.size()); }

  /// Intermediate permutations, source first and target last.
  std::vector<Permutation> states() const {
    std::vector<Permutation> out{source};
    for (const auto& t : steps) out.push_back(apply(t, out.back()));
    return out;
  }
};

inline TranspositionPath transposition_path(const Permutation& r, const Permutation& s) {
  r.check_same_size(s);
  TranspositionPath path{r, s, {}};
  Permutation cur = r;
  // Each swap places one more position; every swap splits a cycle of
  // cur^{-1} s, so the count equals the Cayley distance.
  for (int k = 0; k < cur.size(); ++k) {
    if (cur[k] == s[k]) continue;
    const Transposition t{cur[k], s[k]};
    cur.swap_values(t.a, t.b);
    path.steps.push_back(t);
  }
  return path;
}

inline std::vector<Permutation> all_permutations(int q) {
  std::vector<Permutation> out;
  Permutation p = Permutation::identity(q);
  do {
    out.push_back(p);
  } while (p.next());
  return out;
}

}  // namespace packcount

#endif  // PACKCOUNT_PERMUTATION_HPP
