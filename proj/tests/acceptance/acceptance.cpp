// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace packcount;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fixture(const std::string& name) { return std::string(PACKCOUNT_FIXTURES) + "/" + name + ".json"; }

Instance random_small_instance(Rng& rng, int max_n, int max_q) {
  const int n = 1 + static_cast<int>(rng.below(max_n));
  const int q = 1 + static_cast<int>(rng.below(max_q));
  const auto base = gen::random_graph(n, q, 0.6, 3, rng);
  return gen::with_lists(base, gen::random_lists(n, q, q + static_cast<int>(rng.below(3)), rng));
}

std::pair<double, double> stationarity_and_symmetry(const TransitionMatrix& tm) {
  const double w = 1.0 / tm.size();
  std::vector<double> col(tm.size(), 0.0);
  double sym = 0;
  for (std::size_t a = 0; a < tm.size(); ++a)
    for (const auto& [b, p] : tm.rows[a]) {
      col[b] += w * p;
      sym = std::max(sym, std::abs(p - tm.at(b, a)));
    }
  double stat = 0;
  for (double c : col) stat = std::max(stat, std::abs(c - w));
  return {stat, sym};
}

Packing random_valid(const Instance& inst, Rng& rng, std::uint64_t steps) {
  ChainState s{initial_packing(inst, rng), 0, rng.split(rng.next())};
  run_chain(inst, s, steps);
  return s.packing;
}

// 1. Exact counts against the naive filter.
Verdict exact_counts() {
  Rng rng(101);
  int agree = 0, total = 0;
  for (int k = 0; k < 60; ++k) {
    const auto inst = random_small_instance(rng, 4, 4);
    ++total;
    agree += exact_count(inst) == oracle::naive_count(inst);
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " random instances agree"};
}

// 2. Uniform stationarity and symmetry of the exact transition matrix.
Verdict stationarity() {
  std::vector<Instance> insts{load_instance(fixture("single_vertex_q3")), load_instance(fixture("single_edge_q4")),
                              load_instance(fixture("path3_q4"))};
  Rng rng(202);
  for (int k = 0; k < 10; ++k) insts.push_back(random_small_instance(rng, 3, 3));
  double stat = 0, sym = 0;
  for (const auto& inst : insts) {
    if (oracle::naive_count(inst) == 0) continue;
    const auto [s, y] = stationarity_and_symmetry(transition_matrix(inst));
    stat = std::max(stat, s);
    sym = std::max(sym, y);
  }
  std::ostringstream d;
  d << insts.size() << " instances, max stationarity error " << stat << ", max asymmetry " << sym;
  return {stat <= 1e-12 && sym <= 1e-12, d.str()};
}

// 3. Strong connectivity for q >= 2Δ+2 and explicit connecting paths within bounds.
Verdict connectivity() {
  Rng rng(303);
  std::vector<Instance> small{gen::edgeless(2, 3), gen::path(2, 4), gen::path(2, 5)};
  for (int k = 0; k < 5; ++k) small.push_back(gen::with_lists(gen::path(2, 4), gen::random_lists(2, 4, 6, rng)));
  int connected = 0;
  for (const auto& inst : small) connected += is_strongly_connected(transition_matrix(inst));

  std::vector<Instance> big{gen::path(3, 6), gen::cycle(4, 6), gen::star(2, 6)};
  for (int k = 0; k < 5; ++k) {
    const auto base = gen::random_graph(6, 6, 0.5, 2, rng);
    big.push_back(gen::with_lists(base, gen::random_lists(6, 6, 8, rng)));
  }
  int paths = 0, good = 0;
  for (const auto& inst : big) {
    const int n = inst.n(), d = inst.max_degree();
    for (int k = 0; k < 20; ++k) {
      const auto a = random_valid(inst, rng, 200);
      const auto b = random_valid(inst, rng, 200);
      const auto path = connect_states(inst, a, b);
      bool ok = true;
      Packing cur = a;
      for (const auto& t : path) {
        ok = ok && cur.spins[t.vertex] == t.from;
        cur.spins[t.vertex] = t.to;
        ok = ok && is_valid_packing(inst, cur);
      }
      ok = ok && cur == b && static_cast<int>(path.size()) <= (d + 1) * n &&
           path_weight(path) <= (d + 1) * (inst.q() - 1) * n;
      ++paths;
      good += ok;
    }
  }
  std::ostringstream s;
  s << connected << "/" << small.size() << " enumerable chains strongly connected, " << good << "/" << paths
    << " connecting paths valid and within bounds";
  return {connected == static_cast<int>(small.size()) && good == paths, s.str()};
}

// 4. Perfect-matching sampler is uniform on availability graphs.
Verdict matching_sampler() {
  Rng rng(404);
  int graphs = 0, failures = 0;
  while (graphs < 20) {
    const int q = 5 + graphs % 2;
    const auto base = gen::random_graph(5, q, 0.6, 2, rng);
    const auto inst = gen::with_lists(base, gen::random_lists(5, q, q + 2, rng));
    Packing p;
    try {
      p = random_valid(inst, rng, 100);
    } catch (const ConstructionFailed&) {
      continue;
    }
    const int u = static_cast<int>(rng.below(inst.n()));
    if (inst.degree(u) == 0) continue;
    const auto h = build_availability_graph(inst, p, u);
    const auto all = enumerate_perfect_matchings(h);
    if (all.size() < 2) continue;
    std::map<Permutation, std::size_t> idx;
    for (std::size_t k = 0; k < all.size(); ++k) idx[all[k]] = k;
    std::vector<std::uint64_t> counts(all.size(), 0);
    for (int k = 0; k < 10000; ++k) ++counts[idx.at(sample_perfect_matching(h, rng))];
    failures += oracle::chi_square_uniform_pvalue(counts) < 0.01;
    ++graphs;
  }
  return {failures <= 1, std::to_string(failures) + "/20 chi-square rejections at alpha 0.01"};
}

RelationGraph random_relation(std::size_t l, std::size_t r, double p, Rng& rng) {
  RelationGraph g(l, r);
  for (std::size_t a = 0; a < l; ++a)
    for (std::size_t b = 0; b < r; ++b)
      if (rng.uniform() < p) g.add(a, b);
  return g;
}

// 5. Max-flow coupling is optimal and meets the degree-ratio bound.
Verdict maxflow() {
  Rng rng(505);
  int optimal = 0, bounded = 0, bound_cases = 0;
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t l = 1 + rng.below(8), r = 1 + rng.below(8);
    const auto rel = random_relation(l, r, 0.15 + 0.7 * rng.uniform(), rng);
    std::vector<double> ml(l), mr(r);
    double sl = 0, sr = 0;
    for (auto& x : ml) sl += (x = 0.05 + rng.uniform());
    for (auto& x : mr) sr += (x = 0.05 + rng.uniform());
    for (auto& x : ml) x /= sl;
    for (auto& x : mr) x /= sr;
    const auto res = maxflow_coupling(rel, ml, mr);
    const double err = std::abs(res.edge_probability - oracle::subset_min_flow(rel, ml, mr));
    worst = std::max(worst, err);
    optimal += err <= 1e-9 && marginal_error(res.coupling) <= 1e-12;

    std::size_t lo_l = r, hi_l = 0, lo_r = l, hi_r = 0;
    for (const auto& row : rel.adj) lo_l = std::min(lo_l, row.size()), hi_l = std::max(hi_l, row.size());
    for (auto d : rel.right_degrees()) lo_r = std::min(lo_r, d), hi_r = std::max(hi_r, d);
    if (lo_l > 0 && lo_r > 0) {
      ++bound_cases;
      const double bound = static_cast<double>(lo_l * lo_r) / static_cast<double>(hi_l * hi_r);
      bounded += maxflow_coupling_uniform(rel).edge_probability >= bound - 1e-12;
    }
  }
  std::ostringstream s;
  s << optimal << "/200 optimal (max deviation " << worst << "), degree-ratio bound held in " << bounded << "/"
    << bound_cases;
  return {optimal == 200 && bounded == bound_cases, s.str()};
}

// 6. Uniform-set coupling is exact.
Verdict uniform_sets() {
  using Q = BigRationalMass;
  int good = 0, total = 0;
  for (unsigned ma = 1; ma < 64; ++ma)
    for (unsigned mb = 1; mb < 64; ++mb) {
      std::vector<long> a, b;
      for (long x = 0; x < 6; ++x) {
        if ((ma >> x) & 1) a.push_back(x);
        if ((mb >> x) & 1) b.push_back(x);
      }
      const auto c = couple_uniform_sets(a, b);
      const Q want(std::popcount(ma & mb), static_cast<long>(std::max(a.size(), b.size())));
      ++total;
      good += marginal_error(c) == 0 && equality_probability(c) == want;
    }
  return {good == total, std::to_string(good) + "/" + std::to_string(total) + " pairs exact"};
}

// 7. Edge coupling on K_{q,q} and a thinned graph.
Verdict edge_coupling() {
  std::ostringstream s;
  bool ok = true;
  for (int thin = 0; thin <= 1; ++thin) {
    double prev = 1e9;
    s << (thin ? "thinned" : "complete") << " E[d_C]:";
    for (int q = 5; q <= 8; ++q) {
      BipartiteGraph h = BipartiteGraph::complete(q);
      if (thin)
        for (int i = 0; i < q; ++i) h = h.without_edge(i, (i + 1) % q);
      const auto r = couple_matchings_edge(h, {0, 0}, q - h.min_degree());
      bool local = marginal_error(r.coupling) <= 1e-12;
      for (std::size_t a = 0; a < r.relation.left; ++a)
        for (auto b : r.relation.adj[a]) local = local && cayley_distance(r.with_edge[a], r.without_edge[b]) <= 2;
      local = local && r.expected_distance < prev;
      ok = ok && local;
      prev = r.expected_distance;
      s << " q=" << q << ":" << r.expected_distance;
    }
    s << "; ";
  }
  return {ok, s.str()};
}

// 8. Path-coupling contraction in the regime.
Verdict contraction() {
  std::ostringstream s;
  bool ok = true;
  std::uint64_t seed = 808;
  for (const char* name : {"edge_q16", "matching2_q16_lists"}) {
    const auto inst = load_instance(fixture(name));
    const auto rep = path_coupling_report(inst, 1000, Rng(seed++));
    const bool good = rep.in_regime && rep.beta_hat <= rep.contraction_target + 3 * rep.std_error;
    ok = ok && good;
    s << name << ": beta_hat " << rep.beta_hat << " +/- " << rep.std_error << " vs " << rep.contraction_target
      << "; ";
  }
  return {ok, s.str()};
}

// 9. Worst-case TV drops below 0.01 within 2n ln(100|Ω|) steps.
Verdict mixing() {
  Rng rng(909);
  std::vector<Instance> insts{load_instance(fixture("single_vertex_q3")), load_instance(fixture("single_edge_q4"))};
  for (int k = 0; k < 3; ++k) insts.push_back(gen::with_lists(gen::path(2, 4), gen::random_lists(2, 4, 6, rng)));
  insts.push_back(gen::with_lists(gen::path(2, 5), gen::random_lists(2, 5, 7, rng)));
  std::ostringstream s;
  bool ok = true;
  for (const auto& inst : insts) {
    const auto tm = transition_matrix(inst);
    const int t_max = static_cast<int>(std::ceil(2 * inst.n() * std::log(100.0 * tm.size())));
    const auto curve = worst_case_tv_curve(tm, t_max);
    int hit = -1;
    for (int t = 0; t <= t_max && hit < 0; ++t)
      if (curve[t] <= 0.01) hit = t;
    ok = ok && hit >= 0;
    s << "|Omega|=" << tm.size() << ": t=" << hit << "/" << t_max << "; ";
  }
  return {ok, s.str()};
}

// 10. FPRAS accuracy with the chain sampler.
Verdict fpras() {
  std::ostringstream s;
  bool ok = true;
  for (const auto& [name, truth] : std::vector<std::pair<std::string, double>>{{"single_edge_q4", 216.0},
                                                                               {"path3_q5", 232320.0}}) {
    const auto inst = load_instance(fixture(name));
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const double v = static_cast<double>(fpras_count(inst, 0.25, 0.25, 1000 + seed).value);
      inside += std::abs(std::log(v / truth)) <= 0.25;
    }
    ok = ok && inside >= 15;
    s << name << ": " << inside << "/20 within e^(+-0.25); ";
  }
  return {ok, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"exact counts match the naive filter", exact_counts},
      {"transition matrix is symmetric with uniform stationary law", stationarity},
      {"chain is connected for q >= 2*maxdeg+2", connectivity},
      {"perfect-matching sampler is uniform", matching_sampler},
      {"max-flow coupling is optimal", maxflow},
      {"uniform-set coupling is exact", uniform_sets},
      {"edge coupling marginals and distances", edge_coupling},
      {"path coupling contracts in the regime", contraction},
      {"exact mixing within the horizon", mixing},
      {"approximate counts within tolerance", fpras}};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << ": " << criteria[k].first << " ("
              << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
