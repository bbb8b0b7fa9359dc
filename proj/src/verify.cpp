#include "treegibbs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/gibbs.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/oracle.hpp"
#include "treegibbs/rng.hpp"
#include "treegibbs/tree.hpp"

namespace treegibbs {
namespace {

ModelSpec random_pair_spec(int q, int d, CounterRng& rng, bool with_field) {
  ModelSpec m;
  m.q = q;
  m.d = d;
  m.beta = 0.2 + 2.3 * rng.next_uniform();
  m.pair_energy.assign(static_cast<size_t>(q) * q, 0.0);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      const double v = 0.5 + 1.5 * rng.next_uniform();
      m.pair_energy[static_cast<size_t>(i) * q + j] = v;
      m.pair_energy[static_cast<size_t>(j) * q + i] = v;
    }
  m.field.assign(static_cast<size_t>(q), 0.0);
  if (with_field)
    for (int i = 0; i < q; ++i) m.field[static_cast<size_t>(i)] = -0.05 + 0.1 * rng.next_uniform();
  m.clock_flag = false;
  validate(m);
  return m;
}

ModelSpec random_clock_spec(CounterRng& rng) {
  const int q = 2 + static_cast<int>(rng.next_word() % 5);
  const int d = 2 + static_cast<int>(rng.next_word() % 2);
  const double beta = 0.05 + 3.95 * rng.next_uniform();
  std::vector<double> profile(static_cast<size_t>(q / 2) + 1, 0.0);
  for (size_t k = 1; k < profile.size(); ++k) profile[k] = 0.5 + 1.5 * rng.next_uniform();
  return make_clock(q, d, beta, profile);
}

// Tail sum evaluated the long way: explicit terms in extended precision until
// they stop moving the total.
Bound tail_sum_direct(int q, int d, long double x) {
  const long double r = static_cast<long double>(d + 1) * (d + 1) * (q - 1) * x;
  Bound b;
  if (r >= 1.0L) {
    b.value = inf_d();
    b.vacuous = true;
    b.divergent = true;
    return b;
  }
  long double total = 0.0L, term = (q - 1) * x;
  for (int l = 1; l < 200000; ++l) {
    total += term;
    if (term < total * 1e-22L) break;
    term *= r;
  }
  b.value = static_cast<double>(total);
  b.divergent = false;
  b.vacuous = b.value >= 1.0;
  return b;
}

ConfigWindow full_window(const BallGeometry& geom, const std::vector<std::uint8_t>& spins) {
  ConfigWindow w;
  const std::int64_t total = static_cast<std::int64_t>(spins.size());
  w.verts.resize(spins.size());
  for (std::int64_t v = 0; v < total; ++v) w.verts[static_cast<size_t>(v)] = v;
  w.spins = spins;
  return w;
}

struct CaseBuilder {
  VerifyCase c;
  explicit CaseBuilder(std::string name, std::string tol) {
    c.name = std::move(name);
    c.tolerance = std::move(tol);
    c.pass = true;
  }
  void track_err(double err) {
    c.worst = std::max(c.worst, err);
    ++c.checks;
  }
  void require(bool ok) {
    if (!ok) c.pass = false;
    ++c.checks;
  }
  VerifyCase done(double tol) {
    if (c.worst > tol) c.pass = false;
    return c;
  }
};

VerifyCase oracle_matrix(bool quick, std::uint64_t seed) {
  CaseBuilder cb("oracle_matrix",
                 "site marginals vs enumeration <= 1e-12; log Z <= 1e-10 (scaled)");
  CounterRng rng(seed, 0x11);
  double worst_logz = 0;
  for (int q : {2, 3}) {
    for (int n : quick ? std::vector<int>{1} : std::vector<int>{1, 2}) {
      const BallGeometry geom(2, n);
      const std::int64_t nb = geom.ball_size(n);
      const std::int64_t total = geom.ball_size(n + 1);
      const std::int64_t sphere = total - nb;
      double nbound = 1;
      for (std::int64_t i = 0; i < sphere; ++i) nbound *= q;
      const int betas = quick ? 2 : 5;
      for (int bi = 0; bi < betas; ++bi) {
        const ModelSpec spec = bi % 2 == 0 ? make_potts(q, 2, 0.3 + 2.0 * rng.next_uniform())
                                           : random_pair_spec(q, 2, rng, true);
        const std::int64_t nb_cases = nbound <= 64 ? static_cast<std::int64_t>(nbound) : 20;
        for (std::int64_t ci = 0; ci < nb_cases; ++ci) {
          ConfigWindow boundary;
          for (std::int64_t p = 0; p < sphere; ++p) {
            boundary.verts.push_back(nb + p);
            const int s = nbound <= 64 ? static_cast<int>((ci / static_cast<std::int64_t>(
                                                               std::pow(q, p))) %
                                                          q)
                                       : static_cast<int>(rng.next_word() % q);
            boundary.spins.push_back(static_cast<std::uint8_t>(s));
          }
          const ExactDistribution ed = enumerate_gibbs(spec, geom, boundary);
          const MessageTree mt = upward_messages(spec, geom, boundary);
          for (Vertex v = 0; v < nb; ++v) {
            const auto exact = ed.marginal(v);
            const auto fast = site_marginal(mt, v);
            for (int s = 0; s < q; ++s)
              cb.track_err(std::abs(exact[static_cast<size_t>(s)] - fast[static_cast<size_t>(s)]));
          }
          worst_logz = std::max(
              worst_logz, std::abs(ed.log_z - log_partition(mt)) / std::max(1.0, std::abs(ed.log_z)));
        }
      }
    }
  }
  cb.require(worst_logz <= 1e-10);
  std::ostringstream d;
  d << "worst marginal err " << cb.c.worst << ", worst logZ rel err " << worst_logz;
  cb.c.detail = d.str();
  return cb.done(1e-12);
}

VerifyCase free_residual_case() {
  CaseBuilder cb("free_law_residual", "|x - Q x^d| <= 1e-12");
  for (int q : {2, 3, 5})
    for (int d : {2, 3})
      for (double beta : {0.5, 1.0, 2.0, 4.0}) {
        std::vector<double> profile(static_cast<size_t>(q / 2) + 1, 0.0);
        for (size_t k = 1; k < profile.size(); ++k) profile[k] = 0.6 + 0.3 * static_cast<double>(k);
        const ModelSpec spec = make_clock(q, d, beta, profile);
        cb.track_err(free_law(spec).residual);
      }
  return cb.done(1e-12);
}

VerifyCase central_reference_case() {
  CaseBuilder cb("solve_central_at_reference", "returns the constant free law to 1e-10");
  for (int q : {2, 3})
    for (double beta : {0.8, 2.0}) {
      const ModelSpec spec = make_potts(q, 2, beta);
      const BoundaryLaw free = free_law(spec);
      const BoundaryLaw central = solve_central(spec, spec);
      for (int i = 0; i < q; ++i)
        cb.track_err(std::abs(free.x[static_cast<size_t>(i)] - central.x[static_cast<size_t>(i)]));
      cb.track_err(central.residual);
    }
  return cb.done(1e-10);
}

VerifyCase expansion_order_case(bool quick) {
  CaseBuilder cb("central_expansion_order", "defect order across eps halvings >= 1.8");
  const ModelSpec ref = make_potts(3, 2, 3.0);
  const std::vector<double> pattern{1.0, -0.5, 0.25};
  std::vector<double> eps = quick ? std::vector<double>{0.02, 0.01}
                                  : std::vector<double>{0.04, 0.02, 0.01, 0.005};
  std::vector<double> defect;
  for (double e : eps) {
    ModelSpec target = ref;
    for (int i = 0; i < 3; ++i) target.field[static_cast<size_t>(i)] = e * pattern[static_cast<size_t>(i)];
    const BoundaryLaw law = solve_central(target, ref);
    const auto pred = central_first_order(target, ref);
    double worst = 0;
    for (int i = 0; i < 3; ++i)
      worst = std::max(worst, std::abs(law.x[static_cast<size_t>(i)] - pred[static_cast<size_t>(i)]));
    defect.push_back(worst);
  }
  double min_order = inf_d();
  for (size_t i = 0; i + 1 < defect.size(); ++i) {
    const double order = std::log2(defect[i] / defect[i + 1]);
    min_order = std::min(min_order, order);
    cb.require(order >= 1.8);
  }
  std::ostringstream d;
  d << "min observed order " << min_order;
  cb.c.detail = d.str();
  cb.c.worst = min_order;
  return cb.c;
}

VerifyCase potts_p1_case() {
  CaseBuilder cb("potts_p1_formula", "p1 == (q-1)/(e^beta + q - 1) to 1e-12");
  for (int q : {2, 3, 4})
    for (double beta : {0.5, 1.0, 2.0, 3.0}) {
      const ModelSpec spec = make_potts(q, 2, beta);
      const ChainKernel k = chain_from_law(spec, free_law(spec));
      cb.track_err(std::abs(k.p1 - (q - 1) / (std::exp(beta) + q - 1)));
    }
  return cb.done(1e-12);
}

VerifyCase ising_lambda2_case() {
  CaseBuilder cb("ising_lambda2", "lambda2 == tanh(beta/2) to 1e-10");
  for (double beta : {0.4, 0.8, 1.6, 2.4, 3.0}) {
    const ModelSpec spec = make_potts(2, 2, beta);
    const ChainKernel k = chain_from_law(spec, free_law(spec));
    cb.track_err(std::abs(k.lambda2 - std::tanh(beta / 2)));
  }
  return cb.done(1e-10);
}

VerifyCase epsilon_series_case(bool quick, std::uint64_t seed) {
  CaseBuilder cb("epsilon_series_vs_closed_form",
                 "relative error <= 1e-10 when the ratio <= 0.99, flags agree otherwise");
  CounterRng rng(seed, 0x12);
  const int cases = quick ? 10 : 100;
  const auto compare = [&cb](int q, int d, const Bound& fast, long double x) {
    const Bound slow = tail_sum_direct(q, d, x);
    cb.require(fast.divergent == slow.divergent);
    if (fast.divergent) return;
    const long double r = static_cast<long double>(d + 1) * (d + 1) * (q - 1) * x;
    if (r <= 0.99L)
      cb.track_err(std::abs(fast.value - static_cast<double>(slow.value)) /
                   std::max(1.0, std::abs(slow.value)));
    else
      // Near-divergent: the truncated direct sum only underestimates, so
      // agreement of the vacuous flags is the honest claim.
      cb.require(fast.vacuous == slow.vacuous);
  };
  for (int i = 0; i < cases; ++i) {
    const ModelSpec spec = random_clock_spec(rng);
    compare(spec.q, spec.d, epsilon1(spec),
            std::exp(static_cast<long double>(-spec.beta * (spec.d - 1) * spec.u_min() / 4)));
    const double p1 = 0.002 + 0.2 * rng.next_uniform();
    const double lambda = lambda_of_p1(spec, p1);
    compare(spec.q, spec.d, epsilon2(spec, lambda),
            std::exp(-static_cast<long double>(lambda)));
  }
  return cb.done(1e-10);
}

VerifyCase lemma_quant_case(bool quick, std::uint64_t seed) {
  CaseBuilder cb("spectral_lower_bound", "min eigenvalue >= bound whenever meaningful");
  CounterRng rng(seed, 0x13);
  const int cases = quick ? 10 : 100;
  for (int i = 0; i < cases; ++i) {
    const EigenReport er = eigen_report(random_clock_spec(rng));
    cb.track_err(er.cross_error);
    if (er.quant_meaningful) cb.require(er.quant_holds);
  }
  return cb.done(1e-10);
}

VerifyCase counts_case() {
  CaseBuilder cb("connected_subset_counts",
                 "enumeration == generating function; count <= (d+1)^{2(l-1)}");
  for (int d : {2, 3}) {
    const BallGeometry geom(d, 6);
    const auto counted = count_connected(geom, 0, 6);
    for (int l = 1; l <= 6; ++l) {
      const std::int64_t gf = exact_connected_count(d, l);
      cb.require(counted[static_cast<size_t>(l)] == gf);
      std::int64_t bound = 1;
      for (int k = 0; k < 2 * (l - 1); ++k) bound *= d + 1;
      cb.require(gf <= bound);
    }
  }
  return cb.c;
}

VerifyCase peierls_case(bool quick, std::uint64_t seed) {
  CaseBuilder cb("peierls_n1", "exact deviation probability <= contour activity sum");
  CounterRng rng(seed, 0x14);
  double min_margin = inf_d();
  std::vector<ModelSpec> specs{make_potts(2, 2, 1.0)};
  if (!quick) {
    specs.push_back(make_potts(2, 2, 2.0));
    specs.push_back(make_potts(3, 2, 1.0));
  }
  const BallGeometry geom(2, 1);
  const std::int64_t total = geom.ball_size(2);
  for (const ModelSpec& spec : specs) {
    std::vector<std::vector<std::uint8_t>> refs;
    refs.emplace_back(static_cast<size_t>(total), 0);  // constant
    {
      std::vector<std::uint8_t> one_flip(static_cast<size_t>(total), 0);
      one_flip[static_cast<size_t>(total - 1)] = 1;  // broken bond at the rim
      refs.push_back(one_flip);
    }
    for (int r = 0; r < (quick ? 1 : 5); ++r) {
      std::vector<std::uint8_t> rnd(static_cast<size_t>(total));
      for (auto& s : rnd) s = static_cast<std::uint8_t>(rng.next_word() % spec.q);
      refs.push_back(rnd);
    }
    for (const auto& ref : refs) {
      const ConfigWindow w = full_window(geom, ref);
      for (Vertex v = 0; v < geom.ball_size(1); ++v) {
        const PeierlsLedger led = peierls_check(spec, geom, w, v);
        cb.require(led.lhs <= led.rhs + 1e-12);
        min_margin = std::min(min_margin, led.rhs - led.lhs);
      }
    }
  }
  std::ostringstream d;
  d << "min slack rhs-lhs " << min_margin;
  cb.c.detail = d.str();
  cb.c.worst = min_margin;
  return cb.c;
}

}  // namespace

VerifySummary run_verify(bool quick, std::uint64_t seed) {
  VerifySummary s;
  s.cases.push_back(oracle_matrix(quick, seed));
  s.cases.push_back(free_residual_case());
  s.cases.push_back(central_reference_case());
  s.cases.push_back(expansion_order_case(quick));
  s.cases.push_back(potts_p1_case());
  s.cases.push_back(ising_lambda2_case());
  s.cases.push_back(epsilon_series_case(quick, seed));
  s.cases.push_back(lemma_quant_case(quick, seed));
  s.cases.push_back(counts_case());
  s.cases.push_back(peierls_case(quick, seed));
  for (const auto& c : s.cases)
    if (!c.pass) ++s.failed;
  return s;
}

std::string verify_text(const VerifySummary& s) {
  std::ostringstream os;
  for (const auto& c : s.cases) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.tolerance << "]  checks="
       << c.checks;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  os << (s.failed == 0 ? "verify: all cases passed" : "verify: FAILURES present") << " ("
     << s.cases.size() - static_cast<size_t>(s.failed) << "/" << s.cases.size() << ")\n";
  return os.str();
}

}  // namespace treegibbs
