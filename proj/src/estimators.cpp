#include "treegibbs/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "treegibbs/gibbs.hpp"

namespace treegibbs {
namespace {

void check_run(const ModelSpec& spec, const ChainKernel& kernel, const RunParams& rp) {
  validate(spec);
  if (kernel.q != spec.q) throw config_error("estimator: kernel/spec size mismatch");
  if (rp.n_samples < kMinSamples)
    throw config_error("estimator: need at least 1000 samples for normal CIs");
  if (rp.workers < 1) throw config_error("estimator: workers must be >= 1");
}

double mean_of(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double se_of_mean(const std::vector<double>& x) {
  const double m = mean_of(x);
  double s2 = 0;
  for (double v : x) s2 += (v - m) * (v - m);
  return std::sqrt(s2 / (static_cast<double>(x.size()) - 1) / static_cast<double>(x.size()));
}

// Boundary window of the outer sphere sliced out of dense broadcast levels.
ConfigWindow sphere_slice(const BallGeometry& geom, const std::vector<std::uint8_t>& levels) {
  const int k = geom.max_depth();
  const Vertex lo = geom.sphere_begin(k);
  const std::int64_t ss = geom.sphere_size(k);
  ConfigWindow w;
  w.verts.resize(static_cast<size_t>(ss));
  w.spins.resize(static_cast<size_t>(ss));
  for (std::int64_t p = 0; p < ss; ++p) {
    w.verts[static_cast<size_t>(p)] = lo + p;
    w.spins[static_cast<size_t>(p)] = levels[static_cast<size_t>(lo + p)];
  }
  return w;
}

}  // namespace

void parallel_replicas(std::int64_t n, int workers,
                       const std::function<void(std::int64_t)>& body) {
  if (workers <= 1 || n < 2) {
    for (std::int64_t r = 0; r < n; ++r) body(r);
    return;
  }
  const int w = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(w));
  for (int t = 0; t < w; ++t) {
    const std::int64_t lo = n * t / w;
    const std::int64_t hi = n * (t + 1) / w;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::int64_t r = lo; r < hi; ++r) body(r);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

EstimatorReport estimate_reconstruction(const ModelSpec& spec, const ChainKernel& kernel, int a,
                                        int depth, const RunParams& rp) {
  check_run(spec, kernel, rp);
  if (a < 0 || a >= spec.q) throw config_error("estimate_reconstruction: spin out of range");
  const BallGeometry geom(spec.d, depth);
  const std::int64_t N = rp.n_samples;

  std::vector<double> pi(static_cast<size_t>(N));
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    const BroadcastSpec bc{kernel, geom, sr, kTagOmega, a};
    const auto levels = broadcast_levels(bc, geom.max_depth());
    const MessageTree mt = upward_messages(spec, geom, sphere_slice(geom, levels));
    pi[static_cast<size_t>(r)] = root_marginal(mt)[static_cast<size_t>(a)];
  });

  EstimatorReport rep;
  rep.name = "reconstruction";
  rep.estimate = mean_of(pi);
  rep.se = se_of_mean(pi);
  rep.n_samples = N;
  rep.depth = depth;
  rep.seed = rp.seed;
  rep.extras["conditioned_spin"] = a;
  const Bound eps1 = epsilon1(spec);
  if (!eps1.vacuous) {
    const double thr = 1.0 - eps1.value;
    std::int64_t below = 0;
    for (double p : pi)
      if (p <= thr) ++below;
    rep.extras["recon_threshold"] = thr;
    rep.extras["freq_below_recon_threshold"] =
        static_cast<double>(below) / static_cast<double>(N);
  }
  return rep;
}

EstimatorReport estimate_qea(const ModelSpec& spec, const ChainKernel& kernel, int depth,
                             const RunParams& rp) {
  check_run(spec, kernel, rp);
  const BallGeometry geom(spec.d, depth);
  const std::int64_t N = rp.n_samples;
  const int q = spec.q;

  std::vector<double> pi(static_cast<size_t>(N) * q);
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    const BroadcastSpec bc{kernel, geom, sr, kTagOmega, -1};
    const auto levels = broadcast_levels(bc, geom.max_depth());
    const MessageTree mt = upward_messages(spec, geom, sphere_slice(geom, levels));
    const auto m = root_marginal(mt);
    for (int s = 0; s < q; ++s) pi[static_cast<size_t>(r) * q + s] = m[static_cast<size_t>(s)];
  });

  // Per-spin sample variance of the exact predictor, averaged over spins.
  std::vector<double> s1(static_cast<size_t>(q), 0.0), s2(static_cast<size_t>(q), 0.0);
  for (std::int64_t r = 0; r < N; ++r)
    for (int s = 0; s < q; ++s) {
      const double v = pi[static_cast<size_t>(r) * q + s];
      s1[static_cast<size_t>(s)] += v;
      s2[static_cast<size_t>(s)] += v * v;
    }
  auto qea_from = [&](const std::vector<double>& a1, const std::vector<double>& a2,
                      std::int64_t n) {
    double acc = 0;
    for (int s = 0; s < q; ++s) {
      const double m = a1[static_cast<size_t>(s)] / static_cast<double>(n);
      acc += (a2[static_cast<size_t>(s)] - static_cast<double>(n) * m * m) /
             static_cast<double>(n - 1);
    }
    return acc / q;
  };
  const double qea = qea_from(s1, s2, N);

  // Jackknife over replicas.
  std::vector<double> loo(static_cast<size_t>(N));
  std::vector<double> t1(static_cast<size_t>(q)), t2(static_cast<size_t>(q));
  for (std::int64_t r = 0; r < N; ++r) {
    for (int s = 0; s < q; ++s) {
      const double v = pi[static_cast<size_t>(r) * q + s];
      t1[static_cast<size_t>(s)] = s1[static_cast<size_t>(s)] - v;
      t2[static_cast<size_t>(s)] = s2[static_cast<size_t>(s)] - v * v;
    }
    loo[static_cast<size_t>(r)] = qea_from(t1, t2, N - 1);
  }
  const double loo_mean = mean_of(loo);
  double jk = 0;
  for (double v : loo) jk += (v - loo_mean) * (v - loo_mean);
  const double se = std::sqrt(jk * (static_cast<double>(N - 1) / static_cast<double>(N)));

  EstimatorReport rep;
  rep.name = "qea";
  rep.estimate = qea;
  rep.se = se;
  rep.n_samples = N;
  rep.depth = depth;
  rep.seed = rp.seed;
  if (spec.clock_flag && spec.zero_field()) {
    // E pi(a0|omega) = 1/q exactly, so mean pi(a0)^2 - 1/q^2 estimates the
    // same variance with a statistic that can go negative under the null.
    std::vector<double> sym(static_cast<size_t>(N));
    for (std::int64_t r = 0; r < N; ++r) {
      const double v = pi[static_cast<size_t>(r) * q];
      sym[static_cast<size_t>(r)] = v * v - 1.0 / (static_cast<double>(q) * q);
    }
    rep.extras["qea_sym"] = mean_of(sym);
    rep.extras["qea_sym_se"] = se_of_mean(sym);
  }
  return rep;
}

namespace {

struct OverlapAccum {
  // agreement indicators per replica and plan vertex, replica-major
  std::vector<std::uint8_t> agree;
  size_t m = 0;

  void to_series(OverlapSeries& out, std::int64_t N) const {
    int nmax = 0;
    while (static_cast<size_t>((nmax + 1) * (nmax + 1)) <= m) ++nmax;
    for (int i = 1; i <= nmax; ++i) {
      const size_t cnt = static_cast<size_t>(i) * i;
      std::vector<double> per(static_cast<size_t>(N));
      for (std::int64_t r = 0; r < N; ++r) {
        std::int64_t acc = 0;
        for (size_t k = 0; k < cnt; ++k) acc += agree[static_cast<size_t>(r) * m + k];
        per[static_cast<size_t>(r)] = static_cast<double>(acc) / static_cast<double>(cnt);
      }
      out.n_values.push_back(i);
      out.vertex_counts.push_back(static_cast<int>(cnt));
      out.mean.push_back(mean_of(per));
      out.se.push_back(se_of_mean(per));
    }
  }
};

// One replica of the overlap experiment; fills matched and/or mismatched
// agreement rows (each plan.vertices.size() wide).
void overlap_replica(const ModelSpec& spec, const ChainKernel& kernel, const BallGeometry& geom,
                     const BranchPlan& plan, std::uint64_t sr, std::uint8_t* matched_row,
                     std::uint8_t* mismatched_row) {
  const size_t m = plan.vertices.size();
  const BroadcastSpec bc{kernel, geom, sr, kTagOmega, -1};
  const auto omega = broadcast_levels(bc, geom.max_depth());

  if (matched_row != nullptr) {
    const MessageTree mt = upward_messages(spec, geom, sphere_slice(geom, omega));
    CounterRng rng(sr, kTagSigma);
    const ConfigWindow sigma = sample_interior(mt, plan, rng);
    for (size_t k = 0; k < m; ++k)
      matched_row[k] = sigma.spins[k] == omega[static_cast<size_t>(plan.vertices[k])] ? 1 : 0;
  }
  if (mismatched_row != nullptr) {
    const BroadcastSpec bc_alt{kernel, geom, sr, kTagOmegaAlt, -1};
    const auto omega_alt = broadcast_levels(bc_alt, geom.max_depth());
    const MessageTree mt = upward_messages(spec, geom, sphere_slice(geom, omega_alt));
    CounterRng rng(sr, kTagSigmaAlt);
    const ConfigWindow sigma = sample_interior(mt, plan, rng);
    for (size_t k = 0; k < m; ++k)
      mismatched_row[k] = sigma.spins[k] == omega[static_cast<size_t>(plan.vertices[k])] ? 1 : 0;
  }
}

void check_plan(const BallGeometry& geom, const BranchPlan& plan, int depth) {
  if (plan.vertices.empty()) throw config_error("overlap: empty plan");
  if (plan.depths.back() > depth) throw config_error("overlap: plan deeper than the ball");
  (void)geom;
}

}  // namespace

OverlapSeries estimate_overlap(const ModelSpec& spec, const ChainKernel& kernel,
                               const BranchPlan& plan, int depth, OverlapMode mode,
                               const RunParams& rp) {
  check_run(spec, kernel, rp);
  const BallGeometry geom(spec.d, depth);
  check_plan(geom, plan, depth);
  const std::int64_t N = rp.n_samples;
  const size_t m = plan.vertices.size();

  OverlapAccum acc;
  acc.m = m;
  acc.agree.assign(static_cast<size_t>(N) * m, 0);
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    std::uint8_t* row = acc.agree.data() + static_cast<size_t>(r) * m;
    overlap_replica(spec, kernel, geom, plan, sr,
                    mode == OverlapMode::kMatched ? row : nullptr,
                    mode == OverlapMode::kMismatched ? row : nullptr);
  });

  OverlapSeries out;
  out.mode = mode == OverlapMode::kMatched ? "matched" : "mismatched";
  out.depth = depth;
  out.n_samples = N;
  out.seed = rp.seed;
  acc.to_series(out, N);
  return out;
}

OverlapGap estimate_overlap_gap(const ModelSpec& spec, const ChainKernel& kernel,
                                const BranchPlan& plan, int depth, const RunParams& rp) {
  check_run(spec, kernel, rp);
  const BallGeometry geom(spec.d, depth);
  check_plan(geom, plan, depth);
  const std::int64_t N = rp.n_samples;
  const size_t m = plan.vertices.size();

  OverlapAccum ma, mm;
  ma.m = mm.m = m;
  ma.agree.assign(static_cast<size_t>(N) * m, 0);
  mm.agree.assign(static_cast<size_t>(N) * m, 0);
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    overlap_replica(spec, kernel, geom, plan, sr, ma.agree.data() + static_cast<size_t>(r) * m,
                    mm.agree.data() + static_cast<size_t>(r) * m);
  });

  OverlapGap out;
  out.matched.mode = "matched";
  out.mismatched.mode = "mismatched";
  for (OverlapSeries* s : {&out.matched, &out.mismatched}) {
    s->depth = depth;
    s->n_samples = N;
    s->seed = rp.seed;
  }
  ma.to_series(out.matched, N);
  mm.to_series(out.mismatched, N);

  // Paired difference at the deepest prefix (both rows share omega).
  const size_t cnt = static_cast<size_t>(out.matched.vertex_counts.back());
  std::vector<double> diff(static_cast<size_t>(N));
  for (std::int64_t r = 0; r < N; ++r) {
    std::int64_t da = 0, db = 0;
    for (size_t k = 0; k < cnt; ++k) {
      da += ma.agree[static_cast<size_t>(r) * m + k];
      db += mm.agree[static_cast<size_t>(r) * m + k];
    }
    diff[static_cast<size_t>(r)] = static_cast<double>(da - db) / static_cast<double>(cnt);
  }
  out.gap = mean_of(diff);
  out.gap_se = se_of_mean(diff);
  return out;
}

EstimatorReport estimate_bad_rate(const ModelSpec& spec, const ChainKernel& kernel,
                                  const std::vector<int>& Ls, int vertex_depth,
                                  const RunParams& rp) {
  check_run(spec, kernel, rp);
  if (Ls.empty()) throw config_error("estimate_bad_rate: no truncations");
  for (size_t i = 0; i + 1 < Ls.size(); ++i)
    if (Ls[i] >= Ls[i + 1]) throw config_error("estimate_bad_rate: truncations must increase");
  if (Ls.front() < 1) throw config_error("estimate_bad_rate: truncation < 1");
  const int lmax = Ls.back();
  const BallGeometry geom(spec.d, vertex_depth + lmax);
  const Vertex v = geom.ray_vertex(vertex_depth);
  const std::int64_t N = rp.n_samples;

  std::vector<int> min_size(static_cast<size_t>(N));
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    BroadcastSpec bc{kernel, geom, sr, kTagOmega, -1};
    LazyWindow lw(bc);
    const BadEventReport rep = detect_bad(lw, spec, v, lmax);
    min_size[static_cast<size_t>(r)] = rep.found ? rep.min_size : 0;
  });

  EstimatorReport rep;
  rep.name = "bad_rate";
  rep.n_samples = N;
  rep.depth = vertex_depth;
  rep.L = lmax;
  rep.seed = rp.seed;
  for (int L : Ls) {
    std::int64_t hits = 0;
    for (int ms : min_size)
      if (ms > 0 && ms <= L) ++hits;
    const double p = static_cast<double>(hits) / static_cast<double>(N);
    rep.extras["m_hat_L" + std::to_string(L)] = p;
    if (L == lmax) {
      rep.estimate = p;
      rep.se = std::sqrt(p * (1.0 - p) / static_cast<double>(N));
    }
  }
  return rep;
}

EstimatorReport estimate_branch_bad_average(const ModelSpec& spec, const ChainKernel& kernel,
                                            int plan_n, int L, const RunParams& rp) {
  check_run(spec, kernel, rp);
  if (plan_n < 1) throw config_error("estimate_branch_bad_average: plan_n < 1");
  // Clearance L below the deepest plan vertex so no detector is clipped.
  const std::vector<int> spacings = default_spacings(plan_n * plan_n - 1);
  int deepest = 0;
  for (int s : spacings) deepest += s;
  const BallGeometry geom(spec.d, deepest + L);
  const BranchPlan plan = branch_plan(geom, plan_n, spacings);
  const std::int64_t N = rp.n_samples;
  const size_t m = plan.vertices.size();

  std::vector<double> avg(static_cast<size_t>(N));
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    BroadcastSpec bc{kernel, geom, sr, kTagOmega, -1};
    LazyWindow lw(bc);
    std::int64_t hits = 0;
    for (Vertex u : plan.vertices)
      if (detect_bad(lw, spec, u, L).found) ++hits;
    avg[static_cast<size_t>(r)] = static_cast<double>(hits) / static_cast<double>(m);
  });

  EstimatorReport rep;
  rep.name = "branch_bad_average";
  rep.estimate = mean_of(avg);
  rep.se = se_of_mean(avg);
  rep.n_samples = N;
  rep.depth = deepest;
  rep.L = L;
  rep.seed = rp.seed;
  rep.extras["plan_vertices"] = static_cast<double>(m);
  double var = 0;
  const double mu = rep.estimate;
  for (double x : avg) var += (x - mu) * (x - mu);
  rep.extras["branch_avg_var"] = var / static_cast<double>(N - 1);
  return rep;
}

CovDecay estimate_cov_decay(const ModelSpec& spec, const ChainKernel& kernel,
                            const std::vector<int>& distances, int L, const RunParams& rp) {
  check_run(spec, kernel, rp);
  if (distances.empty()) throw config_error("estimate_cov_decay: no distances");
  for (size_t i = 0; i + 1 < distances.size(); ++i)
    if (distances[i] >= distances[i + 1])
      throw config_error("estimate_cov_decay: distances must increase");
  if (distances.front() < 1) throw config_error("estimate_cov_decay: distance < 1");
  const int dmax = distances.back();
  // u sits at depth L (detector clearance above), v at depth L + dist.
  const BallGeometry geom(spec.d, L + dmax + L);
  const Vertex u = geom.ray_vertex(L);
  std::vector<Vertex> far;
  for (int dist : distances) far.push_back(geom.ray_vertex(L + dist));

  const std::int64_t N = rp.n_samples;
  const size_t nd = distances.size();
  std::vector<std::uint8_t> xu(static_cast<size_t>(N));
  std::vector<std::uint8_t> xv(static_cast<size_t>(N) * nd);
  parallel_replicas(N, rp.workers, [&](std::int64_t r) {
    const std::uint64_t sr = derive_seed(rp.seed, kTagReplica, static_cast<std::uint64_t>(r));
    BroadcastSpec bc{kernel, geom, sr, kTagOmega, -1};
    LazyWindow lw(bc);
    xu[static_cast<size_t>(r)] = detect_bad(lw, spec, u, L).found ? 1 : 0;
    for (size_t k = 0; k < nd; ++k)
      xv[static_cast<size_t>(r) * nd + k] = detect_bad(lw, spec, far[k], L).found ? 1 : 0;
  });

  CovDecay out;
  out.distances = distances;
  out.L = L;
  out.n_samples = N;
  out.seed = rp.seed;
  double su = 0;
  for (std::int64_t r = 0; r < N; ++r) su += xu[static_cast<size_t>(r)];
  out.mean_at_u = su / static_cast<double>(N);

  for (size_t k = 0; k < nd; ++k) {
    double sv = 0, suv = 0;
    for (std::int64_t r = 0; r < N; ++r) {
      const double a = xu[static_cast<size_t>(r)];
      const double b = xv[static_cast<size_t>(r) * nd + k];
      sv += b;
      suv += a * b;
    }
    const double n = static_cast<double>(N);
    const double cov = suv / n - (su / n) * (sv / n);
    // jackknife
    std::vector<double> loo(static_cast<size_t>(N));
    for (std::int64_t r = 0; r < N; ++r) {
      const double a = xu[static_cast<size_t>(r)];
      const double b = xv[static_cast<size_t>(r) * nd + k];
      const double nm = n - 1;
      loo[static_cast<size_t>(r)] =
          (suv - a * b) / nm - ((su - a) / nm) * ((sv - b) / nm);
    }
    const double lm = mean_of(loo);
    double s2 = 0;
    for (double vlo : loo) s2 += (vlo - lm) * (vlo - lm);
    out.cov.push_back(cov);
    out.se.push_back(std::sqrt(s2 * ((n - 1) / n)));
    out.mean_at_v.push_back(sv / n);
  }

  // least-squares slope of log cov over strictly positive estimates
  std::vector<double> xs, ys;
  for (size_t k = 0; k < nd; ++k)
    if (out.cov[k] > 0) {
      xs.push_back(distances[k]);
      ys.push_back(std::log(out.cov[k]));
    }
  if (xs.size() >= 2) {
    const double mx = mean_of(xs), my = mean_of(ys);
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    out.fitted_rate = -sxy / sxx;  // positive = decay
  }
  return out;
}

DepthSweep depth_sweep(const std::function<EstimatorReport(int)>& run,
                       const std::vector<int>& depths) {
  if (depths.empty()) throw config_error("depth_sweep: no depths");
  for (size_t i = 0; i + 1 < depths.size(); ++i)
    if (depths[i] >= depths[i + 1]) throw config_error("depth_sweep: depths must increase");
  DepthSweep out;
  out.depths = depths;
  for (int n : depths) out.reports.push_back(run(n));
  for (size_t i = 0; i + 1 < out.reports.size(); ++i) {
    out.deltas.push_back(out.reports[i + 1].estimate - out.reports[i].estimate);
    out.delta_se.push_back(std::sqrt(out.reports[i + 1].se * out.reports[i + 1].se +
                                     out.reports[i].se * out.reports[i].se));
  }
  if (!out.deltas.empty())
    out.converged = std::abs(out.deltas.back()) <= 3.0 * out.delta_se.back();
  return out;
}

}  // namespace treegibbs
