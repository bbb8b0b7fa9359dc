#include <doctest.h>

#include <cmath>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/model.hpp"

using namespace treegibbs;

TEST_CASE("free law: fixed point, frozen scale, residual") {
  ModelSpec spec = make_potts(2, 2, 2.0);
  BoundaryLaw law = free_law(spec);
  REQUIRE(law.x.size() == 2);
  // d=2: x = 1/R with R = 1 + e^{-2}
  CHECK(law.x[0] == doctest::Approx(0.8807970779778823).epsilon(1e-14));
  CHECK(law.x[0] == law.x[1]);
  CHECK(law.residual <= 1e-12);

  for (int q : {2, 3, 5})
    for (int d : {2, 3})
      for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> profile(static_cast<size_t>(q / 2) + 1, 0.0);
        for (size_t k = 1; k < profile.size(); ++k) profile[k] = 0.7 + 0.4 * static_cast<double>(k);
        BoundaryLaw l = free_law(make_clock(q, d, beta, profile));
        CHECK(l.residual <= 1e-12);
      }

  CHECK_THROWS_AS(free_law(make_potts(2, 2, 1.0, {0.05, 0.0})), config_error);
}

TEST_CASE("chain kernel: frozen p1 and lambda2 closed forms") {
  // p1 = (q-1)/(e^beta + q - 1)
  ModelSpec p2 = make_potts(2, 2, 2.0);
  ChainKernel k2 = chain_from_law(p2, free_law(p2));
  CHECK(k2.p1 == doctest::Approx(0.11920292202211755).epsilon(1e-13));
  CHECK(k2.lambda2 == doctest::Approx(std::tanh(1.0)).epsilon(1e-11));

  ModelSpec pl3 = make_potts(2, 2, std::log(3.0));
  CHECK(chain_from_law(pl3, free_law(pl3)).p1 == doctest::Approx(0.25).epsilon(1e-13));

  ModelSpec p3 = make_potts(3, 2, 1.0);
  CHECK(chain_from_law(p3, free_law(p3)).p1 ==
        doctest::Approx(0.42388311523417094).epsilon(1e-13));

  for (int q : {2, 3, 4})
    for (double beta : {0.5, 1.5, 3.0}) {
      ModelSpec s = make_potts(q, 2, beta);
      ChainKernel k = chain_from_law(s, free_law(s));
      CHECK(k.p1 == doctest::Approx((q - 1.0) / (std::exp(beta) + q - 1.0)).epsilon(1e-12));
      CHECK(p1_bound_check(s, k));
    }
  for (double beta : {0.4, 1.0, 2.0, 3.0}) {
    ModelSpec s = make_potts(2, 2, beta);
    CHECK(chain_from_law(s, free_law(s)).lambda2 ==
          doctest::Approx(std::tanh(beta / 2.0)).epsilon(1e-10));
  }
}

TEST_CASE("chain kernel structure: stochastic rows, invariance, uniform marginal") {
  ModelSpec spec = make_potts(3, 2, 1.3);
  ChainKernel k = chain_from_law(spec, free_law(spec));
  CHECK(k.irreducible_aperiodic);
  CHECK(k.row_sum_err <= 1e-12);
  CHECK(k.invariance_err <= 1e-12);
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int j = 0; j < 3; ++j) s += k.row(i)[j];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k.marginal[static_cast<size_t>(i)] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("continuation at the reference returns the free law") {
  for (int q : {2, 3})
    for (double beta : {0.8, 2.0}) {
      ModelSpec spec = make_potts(q, 2, beta);
      BoundaryLaw f = free_law(spec);
      BoundaryLaw c = solve_central(spec, spec);
      for (int i = 0; i < q; ++i)
        CHECK(c.x[static_cast<size_t>(i)] == doctest::Approx(f.x[static_cast<size_t>(i)]).epsilon(1e-10));
      CHECK(c.residual <= 1e-10);
    }
}

TEST_CASE("continuation under a small field: valid law, first-order accuracy") {
  // beta must keep 1 - d*lambda2(Qhat) away from 0: near beta = ln 4 the
  // uniform branch is soft and folds under arbitrarily small fields.
  ModelSpec ref = make_potts(3, 2, 3.0);
  ModelSpec target = ref;
  target.field = {0.02, -0.01, 0.005};
  REQUIRE(target.central_admissible());

  BoundaryLaw law = solve_central(target, ref);
  CHECK(law.residual <= 1e-10);
  ChainKernel k = chain_from_law(target, law);
  CHECK(k.row_sum_err <= 1e-12);
  CHECK(k.invariance_err <= 1e-12);
  // field breaks the spin symmetry of the marginal
  CHECK(std::abs(k.marginal[0] - k.marginal[1]) > 1e-6);

  // defect against the first-order prediction shrinks at order >= 1.8
  std::vector<double> pattern{1.0, -0.5, 0.25};
  std::vector<double> defect;
  for (double eps : {0.04, 0.02, 0.01, 0.005}) {
    ModelSpec t = ref;
    for (int i = 0; i < 3; ++i) t.field[static_cast<size_t>(i)] = eps * pattern[static_cast<size_t>(i)];
    BoundaryLaw l = solve_central(t, ref);
    std::vector<double> pred = central_first_order(t, ref);
    double w = 0;
    for (int i = 0; i < 3; ++i)
      w = std::max(w, std::abs(l.x[static_cast<size_t>(i)] - pred[static_cast<size_t>(i)]));
    defect.push_back(w);
  }
  for (size_t i = 0; i + 1 < defect.size(); ++i)
    CHECK(std::log2(defect[i] / defect[i + 1]) >= 1.8);
}

TEST_CASE("continuation rejects bad references") {
  ModelSpec target = make_potts(2, 2, 1.0);
  ModelSpec fielded = make_potts(2, 2, 1.0, {0.05, 0.0});
  CHECK_THROWS_AS(solve_central(target, fielded), config_error);
}
