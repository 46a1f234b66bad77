#ifndef PACKCOUNT_COUNTING_HPP
#define PACKCOUNT_COUNTING_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "json.hpp"

#include "packcount/bipartite.hpp"
#include "packcount/dynamics.hpp"
#include "packcount/errors.hpp"
#include "packcount/instance.hpp"
#include "packcount/packing.hpp"
#include "packcount/parallel.hpp"

namespace packcount {

using BigRational = boost::multiprecision::cpp_rational;

inline BigInt factorial(int q) {
  BigInt f = 1;
  for (int k = 2; k <= q; ++k) f *= k;
  return f;
}

inline std::string to_decimal(const BigRational& x, int digits = 20) {
  using boost::multiprecision::cpp_dec_float_50;
  const cpp_dec_float_50 v =
      cpp_dec_float_50(boost::multiprecision::numerator(x)) / cpp_dec_float_50(boost::multiprecision::denominator(x));
  return v.str(digits);
}

inline std::string to_fraction(const BigRational& x) {
  return boost::multiprecision::numerator(x).str() + "/" + boost::multiprecision::denominator(x).str();
}

struct ExactCountOptions {
  /// Cap on backtracking candidates visited.
  std::uint64_t max_nodes = 100'000'000;
  MatchingLimits limits;
};

/// Number of valid L-packings. Vertices are placed in index order; a vertex
/// with no later neighbors contributes its matching count as a factor
/// instead of being enumerated.
inline BigInt exact_count(const Instance& inst, const ExactCountOptions& opts = {}) {
  const int n = inst.n();
  std::vector<char> has_later(n, 0);
  for (const auto& e : inst.edges()) has_later[e.u] = 1;
  std::uint64_t nodes = 0;
  Packing p = Packing::identity(n, inst.q());
  auto rec = [&](auto&& self, int v) -> BigInt {
    if (v == n) return 1;
    const auto h = build_availability_graph(inst, p, v, v);
    if (!has_later[v]) {
      const BigInt here = count_perfect_matchings(h, opts.limits);
      if (here == 0) return 0;
      return here * self(self, v + 1);
    }
    BigInt total = 0;
    for (auto& m : enumerate_perfect_matchings(h, opts.limits)) {
      if (++nodes > opts.max_nodes) {
        throw CapacityError("exact count exceeds cap of " + std::to_string(opts.max_nodes) + " candidates");
      }
      p.spins[v] = std::move(m);
      total += self(self, v + 1);
    }
    return total;
  };
  return rec(rec, 0);
}

/// Theoretical range of each telescoping ratio |Ω_i| / |Ω_{i-1}|.
inline std::pair<BigRational, BigRational> ratio_bounds(int q) {
  if (q < 1) throw InvalidArgument("q must be positive");
  return {BigRational(1, BigInt(factorial(q) + 1)), BigRational(1)};
}

/// Per-ratio sampling budget.
///
/// samples = ceil(c1 * (1 + q!) * m / eps^2) and
/// burn_in = ceil(2n (ln n + ln(m * samples / failure_prob) + ln(1/eps))).
struct FprasSchedule {
  std::uint64_t samples_per_ratio = 0;
  std::uint64_t burn_in = 0;
  double c1 = 74.0;
};

inline FprasSchedule fpras_schedule(const Instance& inst, double epsilon, double failure_prob, double c1 = 74.0) {
  if (!(epsilon > 0 && epsilon < 1)) throw InvalidArgument("epsilon must lie in (0, 1)");
  if (!(failure_prob > 0 && failure_prob < 1)) throw InvalidArgument("failure probability must lie in (0, 1)");
  FprasSchedule s;
  s.c1 = c1;
  const int m = inst.edge_count();
  if (m == 0) return s;
  const double inv_bound = 1.0 + std::tgamma(inst.q() + 1.0);
  const double samples = std::ceil(c1 * inv_bound * m / (epsilon * epsilon));
  if (!(samples < 1e13)) throw CapacityError("sample budget per ratio is too large");
  s.samples_per_ratio = static_cast<std::uint64_t>(samples);
  const double n = inst.n();
  s.burn_in = static_cast<std::uint64_t>(
      std::ceil(2 * n * (std::log(n) + std::log(m * samples / failure_prob) + std::log(1 / epsilon))));
  return s;
}

struct RatioEstimate {
  int edge_index = 0;
  Edge edge;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;

  BigRational estimate() const { return BigRational(BigInt(hits), BigInt(samples)); }

  bool within_theoretical_range(int q) const {
    const auto [lo, hi] = ratio_bounds(q);
    const auto x = estimate();
    return lo <= x && x <= hi;
  }
};

struct CountEstimate {
  BigRational value;
  double epsilon = 0;
  double failure_prob = 0;
  std::uint64_t seed = 0;
  FprasSchedule schedule;
  std::vector<RatioEstimate> per_edge;
};

/// Draws one (approximately) uniform valid packing of the given graph.
using PackingSampler = std::function<Packing(const Instance&, Rng&)>;

/// Fresh chain per sample: greedy start, then burn_in Glauber steps.
inline PackingSampler chain_sampler(std::uint64_t burn_in, MatchingLimits limits = {}) {
  return [burn_in, limits](const Instance& g, Rng& rng) {
    ChainState state{initial_packing(g, rng), 0, rng};
    run_chain(g, state, burn_in, limits);
    return std::move(state.packing);
  };
}

struct FprasOptions {
  double c1 = 74.0;
  std::size_t workers = 0;  // 0: worker_count()
  bool verify_samples = false;
  /// Replaces the chain sampler (tests plug in an exact sampler here).
  PackingSampler sampler;
};

/// Telescoping-product estimator over G_0 ⊂ G_1 ⊂ ... ⊂ G_m = G, where G_i
/// keeps the first i edges of the sorted edge list; the last edge is the
/// first one removed. Ratio i is the fraction of samples from G_{i-1}
/// whose colorings are proper across edge i.
inline CountEstimate fpras_count(const Instance& inst, double epsilon, double failure_prob, std::uint64_t seed,
                                 const FprasOptions& opts = {}) {
  CountEstimate out;
  out.epsilon = epsilon;
  out.failure_prob = failure_prob;
  out.seed = seed;
  out.schedule = fpras_schedule(inst, epsilon, failure_prob, opts.c1);
  BigRational value = BigRational(boost::multiprecision::pow(factorial(inst.q()), inst.n()));
  const PackingSampler sampler = opts.sampler ? opts.sampler : chain_sampler(out.schedule.burn_in);
  const std::size_t workers = opts.workers ? opts.workers : worker_count();
  const Rng root(seed);
  for (int i = 1; i <= inst.edge_count(); ++i) {
    const Instance previous = inst.with_edge_prefix(i - 1);
    const Edge e = inst.edges()[i - 1];
    const Rng ratio_rng = root.split(static_cast<std::uint64_t>(i));
    const std::uint64_t s = out.schedule.samples_per_ratio;
    std::vector<std::uint64_t> chunk_hits(std::max<std::size_t>(1, workers), 0);
    parallel_chunks(s, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
      std::uint64_t hits = 0;
      for (std::size_t k = begin; k < end; ++k) {
        Rng rng = ratio_rng.split(k);
        const Packing sample = sampler(previous, rng);
        if (opts.verify_samples && !is_valid_packing(previous, sample)) {
          throw InvariantError("ratio sample is not a valid packing of G_{i-1}");
        }
        hits += edge_is_proper(inst, sample, e) ? 1 : 0;
      }
      chunk_hits[w] = hits;
    });
    RatioEstimate r{i, e, s, 0};
    for (auto h : chunk_hits) r.hits += h;
    value *= r.estimate();
    out.per_edge.push_back(r);
  }
  out.value = value;
  return out;
}

inline nlohmann::json to_json(const RatioEstimate& r, int q) {
  return {{"edge_index", r.edge_index},
          {"edge", {r.edge.u, r.edge.v}},
          {"samples", r.samples},
          {"hits", r.hits},
          {"estimate", to_fraction(r.estimate())},
          {"estimate_decimal", to_decimal(r.estimate(), 12)},
          {"within_theoretical_range", r.within_theoretical_range(q)}};
}

inline nlohmann::json to_json(const CountEstimate& c, int q) {
  nlohmann::json per_edge = nlohmann::json::array();
  for (const auto& r : c.per_edge) per_edge.push_back(to_json(r, q));
  const auto [lo, hi] = ratio_bounds(q);
  return {{"value", to_fraction(c.value)},
          {"value_decimal", to_decimal(c.value)},
          {"epsilon", c.epsilon},
          {"failure_prob", c.failure_prob},
          {"seed", c.seed},
          {"budget", {{"samples_per_ratio", c.schedule.samples_per_ratio},
                      {"burn_in_steps", c.schedule.burn_in},
                      {"c1", c.schedule.c1}}},
          {"ratio_lower_bound", to_fraction(lo)},
          {"ratio_upper_bound", to_fraction(hi)},
          {"per_edge", per_edge}};
}

}  // namespace packcount

#endif  // PACKCOUNT_COUNTING_HPP
