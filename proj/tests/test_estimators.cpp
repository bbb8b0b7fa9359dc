#include <doctest.h>

#include <cmath>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/estimators.hpp"
#include "treegibbs/gibbs.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/oracle.hpp"
#include "treegibbs/tree.hpp"

using namespace treegibbs;

namespace {

ChainKernel free_kernel(const ModelSpec& spec) { return chain_from_law(spec, free_law(spec)); }

bool same_report(const EstimatorReport& a, const EstimatorReport& b) {
  return a.estimate == b.estimate && a.se == b.se && a.n_samples == b.n_samples &&
         a.depth == b.depth && a.L == b.L && a.seed == b.seed && a.extras == b.extras;
}

}  // namespace

TEST_CASE("reconstruction at depth 0 matches the exact average") {
  ModelSpec spec = make_potts(2, 2, 1.3);
  ChainKernel k = free_kernel(spec);
  RunParams rp{4000, 31, 1};
  EstimatorReport rep = estimate_reconstruction(spec, k, 0, 0, rp);

  // exact: sum over the 2^3 boundaries of P(omega | root=0) pi(0 | omega)
  BallGeometry geom(2, 0);
  double expect = 0;
  for (int idx = 0; idx < 8; ++idx) {
    ConfigWindow bnd;
    double w = 1.0;
    for (int j = 0; j < 3; ++j) {
      int s = (idx >> j) & 1;
      bnd.set(1 + j, static_cast<std::uint8_t>(s));
      w *= k.row(0)[s];
    }
    expect += w * enumerate_gibbs(spec, geom, bnd).marginal(0)[0];
  }
  CHECK(rep.n_samples == 4000);
  CHECK(std::abs(rep.estimate - expect) < 4 * rep.se + 1e-12);
  CHECK(rep.extras.at("conditioned_spin") == 0.0);
}

TEST_CASE("qea estimator is unbiased against the exhaustive value") {
  for (int q : {2, 3}) {
    ModelSpec spec = make_potts(q, 2, 1.0);
    ChainKernel k = free_kernel(spec);
    double exact = exact_qea_small(spec, k, 1);
    RunParams rp{6000, 17, 2};
    EstimatorReport rep = estimate_qea(spec, k, 1, rp);
    CHECK(std::abs(rep.estimate - exact) < 4 * rep.se);
    REQUIRE(rep.extras.count("qea_sym") == 1);
    REQUIRE(rep.extras.count("qea_sym_se") == 1);
    CHECK(std::abs(rep.extras.at("qea_sym") - exact) < 4 * rep.extras.at("qea_sym_se"));
  }
}

TEST_CASE("qea limits: cold concentration, hot null") {
  ModelSpec cold = make_potts(2, 2, 6.0);
  EstimatorReport rc = estimate_qea(cold, free_kernel(cold), 6, RunParams{2000, 3, 2});
  CHECK(rc.estimate > 0.2);
  CHECK(rc.estimate < 0.26);

  ModelSpec hot = make_potts(2, 2, 0.3);
  EstimatorReport rh = estimate_qea(hot, free_kernel(hot), 8, RunParams{2000, 4, 2});
  // d tanh^2(beta/2) ~ 0.044: deep in the extremal phase, the symmetric
  // statistic must be statistically indistinguishable from zero
  CHECK(std::abs(rh.extras.at("qea_sym")) <= 3 * rh.extras.at("qea_sym_se"));
}

TEST_CASE("estimators are deterministic across reruns and worker counts") {
  ModelSpec spec = make_potts(2, 2, 2.2);
  ChainKernel k = free_kernel(spec);

  EstimatorReport q1 = estimate_qea(spec, k, 4, RunParams{1000, 9, 1});
  EstimatorReport q4 = estimate_qea(spec, k, 4, RunParams{1000, 9, 4});
  EstimatorReport q1b = estimate_qea(spec, k, 4, RunParams{1000, 9, 1});
  CHECK(same_report(q1, q4));
  CHECK(same_report(q1, q1b));

  EstimatorReport b1 = estimate_bad_rate(spec, k, {1, 2}, 3, RunParams{1000, 9, 1});
  EstimatorReport b4 = estimate_bad_rate(spec, k, {1, 2}, 3, RunParams{1000, 9, 4});
  CHECK(same_report(b1, b4));

  CovDecay c1 = estimate_cov_decay(spec, k, {2, 4}, 2, RunParams{1000, 9, 1});
  CovDecay c4 = estimate_cov_decay(spec, k, {2, 4}, 2, RunParams{1000, 9, 4});
  CHECK(c1.cov == c4.cov);
  CHECK(c1.se == c4.se);
  CHECK(c1.mean_at_u == c4.mean_at_u);

  BallGeometry geom(2, 6);
  BranchPlan plan = branch_plan(geom, 2, {1, 1, 2});
  OverlapGap g1 = estimate_overlap_gap(spec, k, plan, 6, RunParams{1000, 9, 1});
  OverlapGap g4 = estimate_overlap_gap(spec, k, plan, 6, RunParams{1000, 9, 4});
  CHECK(g1.gap == g4.gap);
  CHECK(g1.gap_se == g4.gap_se);
  CHECK(g1.matched.mean == g4.matched.mean);
  CHECK(g1.mismatched.se == g4.mismatched.se);
}

TEST_CASE("depth sweep wiring") {
  ModelSpec spec = make_potts(2, 2, 1.0);
  ChainKernel k = free_kernel(spec);
  DepthSweep s = depth_sweep(
      [&](int depth) { return estimate_qea(spec, k, depth, RunParams{1000, 5, 2}); },
      {1, 2, 4});
  REQUIRE(s.reports.size() == 3);
  REQUIRE(s.deltas.size() == 2);
  CHECK(s.reports[0].depth == 1);
  CHECK(s.reports[2].depth == 4);
  CHECK(s.deltas[1] == s.reports[2].estimate - s.reports[1].estimate);
  CHECK(s.converged == (std::abs(s.deltas.back()) <= 3 * s.delta_se.back()));
  CHECK_THROWS_AS(depth_sweep([&](int depth) { return estimate_qea(spec, k, depth, RunParams{1000, 5, 1}); },
                              std::vector<int>{4, 2}),
                  config_error);
}

TEST_CASE("overlap: matched beats mismatched in the ordered phase") {
  ModelSpec spec = make_potts(2, 2, 3.0);
  ChainKernel k = free_kernel(spec);
  BallGeometry geom(2, 6);
  BranchPlan plan = branch_plan(geom, 2, {2, 2, 2});
  RunParams rp{1500, 77, 2};

  OverlapGap g = estimate_overlap_gap(spec, k, plan, 6, rp);
  CHECK(g.matched.n_values == std::vector<int>{1, 2});
  CHECK(g.matched.vertex_counts == std::vector<int>{1, 4});
  CHECK(g.gap == doctest::Approx(g.matched.mean.back() - g.mismatched.mean.back()).epsilon(1e-14));
  CHECK(g.gap > 5 * g.gap_se);
  // mismatched agreement has exact mean 1/q by symmetry
  CHECK(std::abs(g.mismatched.mean.back() - 0.5) < 4 * g.mismatched.se.back());

  OverlapSeries m = estimate_overlap(spec, k, plan, 6, OverlapMode::kMatched, rp);
  CHECK(m.mean == g.matched.mean);
  CHECK(m.se == g.matched.se);
  OverlapSeries mm = estimate_overlap(spec, k, plan, 6, OverlapMode::kMismatched, rp);
  CHECK(mm.mean == g.mismatched.mean);
}

TEST_CASE("bad rate: shared-sweep truncation curve") {
  ModelSpec spec = make_potts(2, 2, 1.8);
  ChainKernel k = free_kernel(spec);
  EstimatorReport rep = estimate_bad_rate(spec, k, {1, 2, 4}, 4, RunParams{2000, 13, 2});
  double m1 = rep.extras.at("m_hat_L1");
  double m2 = rep.extras.at("m_hat_L2");
  double m4 = rep.extras.at("m_hat_L4");
  CHECK(m1 <= m2);
  CHECK(m2 <= m4);
  CHECK(rep.estimate == m4);
  CHECK(rep.L == 4);
  CHECK(rep.se == doctest::Approx(std::sqrt(m4 * (1 - m4) / 2000)).epsilon(1e-12));
  CHECK(m1 > 0.0);
  CHECK(m4 < 1.0);

  CHECK_THROWS_AS(estimate_bad_rate(spec, k, {2, 1}, 4, RunParams{1000, 13, 1}), config_error);
  CHECK_THROWS_AS(estimate_bad_rate(spec, k, {1, 2}, 4, RunParams{500, 13, 1}), config_error);
}

TEST_CASE("branch bad average stays in [0,1] and reports the plan") {
  ModelSpec spec = make_potts(2, 2, 1.8);
  EstimatorReport rep =
      estimate_branch_bad_average(spec, free_kernel(spec), 2, 2, RunParams{1000, 15, 2});
  CHECK(rep.estimate >= 0.0);
  CHECK(rep.estimate <= 1.0);
  CHECK(rep.extras.at("plan_vertices") == 4.0);
  CHECK(rep.extras.count("branch_avg_var") == 1);
}

TEST_CASE("covariance decay: structure and independence at long range") {
  ModelSpec spec = make_potts(2, 2, 2.5);
  ChainKernel k = free_kernel(spec);
  CovDecay c = estimate_cov_decay(spec, k, {2, 4, 8}, 2, RunParams{3000, 19, 2});
  REQUIRE(c.cov.size() == 3);
  REQUIRE(c.se.size() == 3);
  CHECK(c.mean_at_u >= 0.0);
  CHECK(c.mean_at_u <= 1.0);
  for (double s : c.se) CHECK(s >= 0.0);
  // detectors with L=2 share no edge beyond separation 3: exact independence
  CHECK(std::abs(c.cov.back()) <= 3 * c.se.back() + 1e-12);

  CHECK_THROWS_AS(estimate_cov_decay(spec, k, {4, 2}, 2, RunParams{1000, 19, 1}), config_error);
}

TEST_CASE("run parameter validation") {
  ModelSpec spec = make_potts(2, 2, 1.0);
  ChainKernel k = free_kernel(spec);
  CHECK_THROWS_AS(estimate_qea(spec, k, 2, RunParams{999, 1, 1}), config_error);
  CHECK_THROWS_AS(estimate_qea(spec, k, 2, RunParams{1000, 1, 0}), config_error);
  ChainKernel k3 = free_kernel(make_potts(3, 2, 1.0));
  CHECK_THROWS_AS(estimate_qea(spec, k3, 2, RunParams{1000, 1, 1}), config_error);
}

TEST_CASE("parallel_replicas covers every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_replicas(1000, 4, [&](std::int64_t r) { hits[static_cast<size_t>(r)] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_replicas(100, 3,
                                    [&](std::int64_t r) {
                                      if (r == 57) throw numeric_error("boom");
                                    }),
                  numeric_error);
}
