#pragma once
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/sampler.hpp"
#include "treegibbs/tree.hpp"

namespace treegibbs {

// Point estimate with normal-approximation error bar plus named secondary
// statistics. Everything in the report is a pure function of
// (spec, kernel, seed, N, depth, L); worker count never changes a bit.
struct EstimatorReport {
  std::string name;
  double estimate = nan_d();
  double se = nan_d();
  std::int64_t n_samples = 0;
  int depth = 0;
  int L = -1;  // truncation, -1 when not applicable
  std::uint64_t seed = 0;
  std::map<std::string, double> extras;
};

struct RunParams {
  std::int64_t n_samples = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

// Floor for the normal-approximation intervals.
inline constexpr std::int64_t kMinSamples = 1000;

// Mean of the exact root predictor pi_n(sigma_0 = a | omega) under boundaries
// broadcast from mu(. | sigma_0 = a). extras: freq_below_recon_threshold and
// the threshold 1 - eps1 when eps1 is non-vacuous.
EstimatorReport estimate_reconstruction(const ModelSpec& spec, const ChainKernel& kernel, int a,
                                        int depth, const RunParams& rp);

// (1/q) sum_a Var_omega(pi_n(sigma_0 = a | omega)) across unconditioned
// broadcasts, jackknife se. For clock models extras carry the symmetric
// reduction mean pi(a0|omega)^2 - 1/q^2 (fixed a0 = 0) with its se: unlike the
// variance form it has signed sampling noise, so it is the right statistic to
// test against zero; the two agree within CI.
EstimatorReport estimate_qea(const ModelSpec& spec, const ChainKernel& kernel, int depth,
                             const RunParams& rp);

enum class OverlapMode { kMatched, kMismatched };

// Empirical agreement frequency between sigma (exact conditional draw given
// the boundary) and omega (the broadcast) on plan-vertex prefixes of n^2
// vertices. Matched mode conditions on omega's own boundary; mismatched on an
// independent omega'.
struct OverlapSeries {
  std::string mode;
  int depth = 0;
  std::vector<int> n_values;       // prefix index; prefix i holds i^2 vertices
  std::vector<int> vertex_counts;  // i^2
  std::vector<double> mean;
  std::vector<double> se;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

OverlapSeries estimate_overlap(const ModelSpec& spec, const ChainKernel& kernel,
                               const BranchPlan& plan, int depth, OverlapMode mode,
                               const RunParams& rp);

// Both modes with the same omega per replica, so the gap at the deepest
// prefix gets a paired standard error.
struct OverlapGap {
  OverlapSeries matched;
  OverlapSeries mismatched;
  double gap = nan_d();
  double gap_se = nan_d();
};

OverlapGap estimate_overlap_gap(const ModelSpec& spec, const ChainKernel& kernel,
                                const BranchPlan& plan, int depth, const RunParams& rp);

// Frequency of the truncated bad event at a ray vertex of the given depth,
// evaluated at every truncation in Ls from one shared detector sweep per
// sample (hence nondecreasing in L by construction). estimate/se refer to the
// largest truncation; extras carry m_hat_L<k> for each k in Ls.
EstimatorReport estimate_bad_rate(const ModelSpec& spec, const ChainKernel& kernel,
                                  const std::vector<int>& Ls, int vertex_depth,
                                  const RunParams& rp);

// Per-sample branch average of bad-event indicators over plan vertices
// (concentration diagnostic): estimate = mean of the branch average,
// extras: across-sample variance of the branch average and the plan size.
EstimatorReport estimate_branch_bad_average(const ModelSpec& spec, const ChainKernel& kernel,
                                            int plan_n, int L, const RunParams& rp);

// Covariance of bad-event indicators between a fixed ray vertex at depth L
// and descendants at the given extra distances; jackknife standard errors and
// a least-squares decay rate over the strictly positive estimates.
struct CovDecay {
  std::vector<int> distances;
  std::vector<double> cov;
  std::vector<double> se;
  std::vector<double> mean_at_v;  // bad frequency at the far vertex
  double mean_at_u = nan_d();
  double fitted_rate = nan_d();
  int L = 0;
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

CovDecay estimate_cov_decay(const ModelSpec& spec, const ChainKernel& kernel,
                            const std::vector<int>& distances, int L, const RunParams& rp);

// Shared-seed convergence sweep; flags non-convergence when the last
// successive delta exceeds 3x its combined CI.
struct DepthSweep {
  std::vector<int> depths;
  std::vector<EstimatorReport> reports;
  std::vector<double> deltas;
  std::vector<double> delta_se;
  bool converged = true;
};

DepthSweep depth_sweep(const std::function<EstimatorReport(int)>& run,
                       const std::vector<int>& depths);

// Runs body(r) for r in [0, n) over `workers` threads in fixed chunks. body
// must only write state owned by replica r; rethrows the first worker error.
void parallel_replicas(std::int64_t n, int workers,
                       const std::function<void(std::int64_t)>& body);

}  // namespace treegibbs
