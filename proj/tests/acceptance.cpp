// Acceptance gate: one line per shipping criterion, each checked at the
// tolerance printed on that line. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/estimators.hpp"
#include "treegibbs/gibbs.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/oracle.hpp"
#include "treegibbs/report.hpp"
#include "treegibbs/rng.hpp"
#include "treegibbs/tree.hpp"

using namespace treegibbs;

namespace {

int failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void line(int k, bool pass, const std::string& what, double secs) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s  [%.1fs]\n", pass ? "PASS" : "FAIL", k, what.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---- criterion 1: exact inference equals brute-force enumeration ----------
void criterion1() {
  Timer t;
  CounterRng rng(1001, 0x31);
  double worst_marg = 0, worst_logz = 0;
  long cases = 0;
  for (int q : {2, 3})
    for (int n : {1, 2}) {
      BallGeometry geom(2, n);
      Vertex nb = geom.ball_size(n);
      std::int64_t sphere = geom.sphere_size(n + 1);
      double nbound = std::pow(static_cast<double>(q), static_cast<double>(sphere));
      for (int bi = 0; bi < 5; ++bi) {
        double beta = 0.3 + 2.0 * rng.next_uniform();
        std::vector<double> field;
        if (bi % 2 == 1) {
          // random small fields probe the interior-vs-boundary field split
          field.resize(static_cast<size_t>(q));
          for (double& f : field) f = -0.05 + 0.1 * rng.next_uniform();
        }
        ModelSpec spec = make_potts(q, 2, beta, field);
        std::int64_t nb_cases = nbound <= 64 ? static_cast<std::int64_t>(nbound) : 20;
        for (std::int64_t ci = 0; ci < nb_cases; ++ci) {
          ConfigWindow bnd;
          std::int64_t code = ci;
          for (std::int64_t p = 0; p < sphere; ++p) {
            int s = nbound <= 64 ? static_cast<int>(code % q) : static_cast<int>(rng.next_word() % q);
            code /= q;
            bnd.set(nb + p, static_cast<std::uint8_t>(s));
          }
          ExactDistribution ed = enumerate_gibbs(spec, geom, bnd);
          MessageTree mt = upward_messages(spec, geom, bnd);
          for (Vertex v = 0; v < nb; ++v) {
            auto exact = ed.marginal(v);
            auto fast = site_marginal(mt, v);
            for (int s = 0; s < q; ++s)
              worst_marg = std::max(worst_marg,
                                    std::abs(exact[static_cast<size_t>(s)] - fast[static_cast<size_t>(s)]));
          }
          worst_logz = std::max(worst_logz, std::abs(ed.log_z - log_partition(mt)) /
                                                std::max(1.0, std::abs(ed.log_z)));
          ++cases;
        }
      }
    }
  bool pass = cases >= 100 && worst_marg <= 1e-12 && worst_logz <= 1e-10 && t.secs() < 60;
  line(1, pass,
       fmt("site marginals vs enumeration: %ld cases, worst %.2e (<= 1e-12), logZ rel %.2e (<= 1e-10)",
           cases, worst_marg, worst_logz),
       t.secs());
}

// ---- criterion 2: boundary-law solver -------------------------------------
void criterion2() {
  Timer t;
  double worst_free = 0;
  for (int q : {2, 3, 5})
    for (int d : {2, 3})
      for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> profile(static_cast<size_t>(q / 2) + 1, 0.0);
        for (size_t k = 1; k < profile.size(); ++k) profile[k] = 0.6 + 0.5 * static_cast<double>(k);
        worst_free = std::max(worst_free, free_law(make_clock(q, d, beta, profile)).residual);
      }

  double worst_const = 0;
  for (int q : {2, 3})
    for (double beta : {0.8, 2.0}) {
      ModelSpec spec = make_potts(q, 2, beta);
      BoundaryLaw f = free_law(spec), c = solve_central(spec, spec);
      for (int i = 0; i < q; ++i)
        worst_const = std::max(worst_const, std::abs(f.x[static_cast<size_t>(i)] - c.x[static_cast<size_t>(i)]));
    }

  ModelSpec ref = make_potts(3, 2, 3.0);
  const std::vector<double> pattern{1.0, -0.5, 0.25};
  std::vector<double> defect;
  for (double eps : {0.04, 0.02, 0.01, 0.005}) {
    ModelSpec target = ref;
    for (int i = 0; i < 3; ++i) target.field[static_cast<size_t>(i)] = eps * pattern[static_cast<size_t>(i)];
    BoundaryLaw law = solve_central(target, ref);
    auto pred = central_first_order(target, ref);
    double w = 0;
    for (int i = 0; i < 3; ++i)
      w = std::max(w, std::abs(law.x[static_cast<size_t>(i)] - pred[static_cast<size_t>(i)]));
    defect.push_back(w);
  }
  double min_order = 1e9;
  for (size_t i = 0; i + 1 < defect.size(); ++i)
    min_order = std::min(min_order, std::log2(defect[i] / defect[i + 1]));

  bool pass = worst_free <= 1e-12 && worst_const <= 1e-10 && min_order >= 1.8 && t.secs() < 10;
  line(2, pass,
       fmt("free residual %.2e (<= 1e-12), continuation-at-reference %.2e (<= 1e-10), expansion order %.2f (>= 1.8)",
           worst_free, worst_const, min_order),
       t.secs());
}

// ---- criterion 3: closed-form constants ------------------------------------
void criterion3() {
  Timer t;
  double worst_p1 = 0, worst_l2 = 0;
  for (int q : {2, 3, 4})
    for (double beta : {0.5, 1.0, 2.0, 3.0}) {
      ModelSpec s = make_potts(q, 2, beta);
      ChainKernel k = chain_from_law(s, free_law(s));
      worst_p1 = std::max(worst_p1, std::abs(k.p1 - (q - 1) / (std::exp(beta) + q - 1)));
      if (q == 2) worst_l2 = std::max(worst_l2, std::abs(k.lambda2 - std::tanh(beta / 2)));
    }

  double d0_err = std::abs(delta0(make_potts(2, 2, 1.0)) - 0.25);
  d0_err = std::max(d0_err, std::abs(delta0(make_potts(2, 3, 1.0)) - 0.5));
  d0_err = std::max(d0_err, std::abs(delta0(make_clock(4, 2, 1.0, {0.0, 1.0, 1.6})) - 0.5 / 2.6));
  double e1_err = std::abs(epsilon1(make_potts(2, 2, 16.0)).value - 0.02193071427838899);
  double e2_err = std::abs(epsilon2(make_potts(2, 2, 1.0), std::log(18.0)).value - 1.0 / 9.0);
  double lam_err = std::abs(lambda_of_p1(make_potts(2, 2, 1.0), 0.01) - 0.3184230209256697);

  CounterRng rng(1003, 0x33);
  bool quant_ok = true;
  double worst_cross = 0;
  for (int i = 0; i < 100; ++i) {
    int q = 2 + static_cast<int>(rng.next_word() % 5);
    int d = 2 + static_cast<int>(rng.next_word() % 2);
    double beta = 0.05 + 3.95 * rng.next_uniform();
    std::vector<double> profile(static_cast<size_t>(q / 2) + 1, 0.0);
    for (size_t k = 1; k < profile.size(); ++k) profile[k] = 0.5 + 1.5 * rng.next_uniform();
    EigenReport er = eigen_report(make_clock(q, d, beta, profile));
    worst_cross = std::max(worst_cross, er.cross_error);
    if (er.quant_meaningful && !er.quant_holds) quant_ok = false;
  }

  bool pass = worst_p1 <= 1e-12 && worst_l2 <= 1e-10 && d0_err <= 1e-14 && e1_err <= 1e-12 &&
              e2_err <= 1e-12 && lam_err <= 1e-12 && quant_ok && worst_cross <= 1e-10;
  line(3, pass,
       fmt("p1 %.2e (<= 1e-12), lambda2 %.2e (<= 1e-10), delta0/eps1/eps2/lambda %.1e/%.1e/%.1e/%.1e, spectral bound 100/100",
           worst_p1, worst_l2, d0_err, e1_err, e2_err, lam_err),
       t.secs());
}

// ---- criterion 4: entropy bound and exhaustive contour comparison ----------
void criterion4() {
  Timer t;
  bool counts_ok = true;
  for (int d : {2, 3}) {
    BallGeometry g(d, 6);
    auto counted = count_connected(g, 0, 6);
    for (int l = 1; l <= 6; ++l) {
      std::int64_t gf = exact_connected_count(d, l);
      std::int64_t bound = 1;
      for (int k = 0; k < 2 * (l - 1); ++k) bound *= d + 1;
      if (counted[static_cast<size_t>(l)] != gf || gf > bound) counts_ok = false;
    }
  }

  CounterRng rng(1004, 0x34);
  BallGeometry geom(2, 1);
  Vertex total = geom.ball_size(2);
  double min_slack = 1e9;
  long checks = 0;
  bool peierls_ok = true;
  std::vector<ModelSpec> specs{make_potts(2, 2, 1.0), make_potts(2, 2, 2.0), make_potts(3, 2, 1.0)};
  for (const ModelSpec& spec : specs) {
    std::vector<std::vector<std::uint8_t>> refs;
    refs.emplace_back(static_cast<size_t>(total), 0);
    refs.emplace_back(static_cast<size_t>(total), 0);
    refs.back()[static_cast<size_t>(total - 1)] = 1;
    for (int r = 0; r < 5; ++r) {
      std::vector<std::uint8_t> rnd(static_cast<size_t>(total));
      for (auto& s : rnd) s = static_cast<std::uint8_t>(rng.next_word() % spec.q);
      refs.push_back(rnd);
    }
    for (const auto& ref : refs) {
      ConfigWindow w;
      for (Vertex v = 0; v < total; ++v) w.set(v, ref[static_cast<size_t>(v)]);
      for (Vertex v = 0; v < geom.ball_size(1); ++v) {
        PeierlsLedger led = peierls_check(spec, geom, w, v);
        if (!(led.lhs <= led.rhs + 1e-12)) peierls_ok = false;
        min_slack = std::min(min_slack, led.rhs - led.lhs);
        ++checks;
      }
    }
  }
  bool pass = counts_ok && peierls_ok && t.secs() < 60;
  line(4, pass,
       fmt("subset counts within (d+1)^{2(l-1)} for d=2,3 l<=6; contour bound holds in %ld exhaustive cases (min slack %.3f)",
           checks, min_slack),
       t.secs());
}

// ---- criterion 5: overlap-parameter phase fingerprint ----------------------
void criterion5() {
  Timer t;
  RunParams rp{2000, 501, 4};

  ModelSpec uni = make_potts(2, 2, 0.8);  // d tanh^2(0.4) ~ 0.29: extremal phase
  EstimatorReport high_t = estimate_qea(uni, chain_from_law(uni, free_law(uni)), 12, rp);
  double sym = high_t.extras.at("qea_sym");
  double sym_se = high_t.extras.at("qea_sym_se");
  bool null_ok = std::abs(sym) <= 3 * sym_se;

  ModelSpec glassy = make_potts(2, 2, 3.0);  // d tanh^2(1.5) ~ 1.64: non-extremal
  EstimatorReport low_t = estimate_qea(glassy, chain_from_law(glassy, free_law(glassy)), 12, rp);
  double z_primary = low_t.estimate / low_t.se;
  double z_sym = low_t.extras.at("qea_sym") / low_t.extras.at("qea_sym_se");
  bool signal_ok = z_primary >= 10 && z_sym >= 10;

  bool pass = null_ok && signal_ok && t.secs() < 600;
  line(5, pass,
       fmt("beta=0.8: sym %.2e within 3 se (%.2e); beta=3.0: estimate %.4f at %.0f se, sym at %.0f se (>= 10)",
           sym, sym_se, low_t.estimate, z_primary, z_sym),
       t.secs());
}

// ---- criterion 6: matched vs mismatched branch overlap ---------------------
void criterion6() {
  Timer t;
  ModelSpec spec = make_potts(2, 2, 3.0);
  ChainKernel k = chain_from_law(spec, free_law(spec));
  const int depth = 14;
  std::vector<int> spacings = default_spacings(64);
  int n = max_plan_n(depth, spacings);
  BallGeometry geom(2, depth);
  BranchPlan plan = branch_plan(geom, n, spacings);
  OverlapGap g = estimate_overlap_gap(spec, k, plan, depth, RunParams{1000, 601, 4});

  double mm = g.mismatched.mean.back(), mm_se = g.mismatched.se.back();
  bool pass = g.gap > 5 * g.gap_se && std::abs(mm - 0.5) <= 3 * mm_se && t.secs() < 900;
  line(6, pass,
       fmt("plan n=%d at depth 14: gap %.4f > 5 paired se (%.4f); mismatched %.4f within 3 se of 1/q",
           n, g.gap, g.gap_se, mm),
       t.secs());
}

// ---- criterion 7: bad-event rate and decorrelation -------------------------
void criterion7() {
  Timer t;
  ModelSpec spec = make_potts(2, 2, 2.5);
  ChainKernel k = chain_from_law(spec, free_law(spec));

  std::vector<int> Ls{1, 2, 4, 6};
  EstimatorReport bad = estimate_bad_rate(spec, k, Ls, 8, RunParams{2000, 701, 4});
  bool mono = true;
  double prev = -1;
  for (int L : Ls) {
    double m = bad.extras.at("m_hat_L" + std::to_string(L));
    if (m < prev) mono = false;
    prev = m;
  }

  CovDecay cov = estimate_cov_decay(spec, k, {2, 4, 8, 16}, 4, RunParams{2000, 702, 4});
  bool decreasing = true;
  for (size_t i = 0; i + 1 < cov.cov.size(); ++i)
    if (cov.cov[i + 1] > cov.cov[i] + 3 * (cov.se[i] + cov.se[i + 1])) decreasing = false;
  bool tail_null = std::abs(cov.cov.back()) <= 3 * cov.se.back();

  bool pass = mono && decreasing && tail_null && t.secs() < 600;
  line(7, pass,
       fmt("m_hat nondecreasing over L={1,2,4,6} (ends %.3f); cov decreasing over {2,4,8,16}, cov(16) %.2e within 3 se (%.2e)",
           prev, cov.cov.back(), cov.se.back()),
       t.secs());
}

// ---- criterion 8: bitwise determinism across reruns and workers -------------
void criterion8() {
  Timer t;
  ModelSpec spec = make_potts(2, 2, 2.2);
  ChainKernel k = chain_from_law(spec, free_law(spec));
  BallGeometry geom(2, 6);
  BranchPlan plan = branch_plan(geom, 2, {1, 1, 2});

  auto bundle = [&](int workers) {
    RunParams rp{1000, 801, workers};
    std::string s;
    s += report_to_json(estimate_reconstruction(spec, k, 0, 5, rp)).dump();
    s += report_to_json(estimate_qea(spec, k, 5, rp)).dump();
    s += overlap_gap_to_json(estimate_overlap_gap(spec, k, plan, 6, rp)).dump();
    s += report_to_json(estimate_bad_rate(spec, k, {1, 2, 4}, 4, rp)).dump();
    s += cov_decay_to_json(estimate_cov_decay(spec, k, {2, 4, 8}, 2, rp)).dump();
    return s;
  };
  std::string w1 = bundle(1);
  std::string w4 = bundle(4);
  std::string w1_again = bundle(1);
  bool pass = w1 == w4 && w1 == w1_again && !w1.empty();
  line(8, pass, fmt("serialized estimator bundles identical across reruns and workers {1,4} (%zu bytes)", w1.size()),
       t.secs());
}

}  // namespace

int main() {
  Timer all;
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("acceptance: %d/8 criteria passed  [%.1fs total]\n", 8 - failures, all.secs());
  return failures;
}
