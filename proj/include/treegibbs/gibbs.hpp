#pragma once
#include <cstdint>
#include <vector>

#include "treegibbs/model.hpp"
#include "treegibbs/rng.hpp"
#include "treegibbs/tree.hpp"

namespace treegibbs {

// Upward messages of the finite ball: z(v,·) is the partial partition
// function of the subtree below v with the given outer-sphere condition,
// normalised per vertex (max entry 1) with the normaliser accumulated in
// logscale so log-partition functions stay exact at any depth and beta.
struct MessageTree {
  const BallGeometry* geom = nullptr;
  int q = 0;
  int d = 0;
  double beta = 0;
  TransferMatrix tm;
  std::vector<std::uint8_t> omega;  // outer sphere spins, by position
  std::vector<double> z;            // interior vertices, q entries each
  std::vector<double> logscale;
  double log_z_q = 0;                 // log sum_i Z_root(i), pure edge-product form
  double boundary_field_share = 0;    // beta * sum_w Psi(omega_w)/(d+1)

  const double* msg(Vertex v) const { return z.data() + static_cast<size_t>(v) * q; }
};

// boundary must cover the full outer sphere S_{n+1}; extra vertices are
// ignored. Iterative level-by-level pass, no recursion.
MessageTree upward_messages(const ModelSpec& spec, const BallGeometry& geom,
                            const ConfigWindow& boundary);

std::vector<double> root_marginal(const MessageTree& mt);

// log Z with the Hamiltonian convention (pair terms on every edge of the
// closed ball, field terms on interior vertices only).
double log_partition(const MessageTree& mt);

// Exact single-site conditional law at an interior vertex: one downward pass
// along the root path combined with the upward messages.
std::vector<double> site_marginal(const MessageTree& mt, Vertex v);

// site_marginal at every plan vertex.
std::vector<std::vector<double>> path_marginals(const MessageTree& mt, const BranchPlan& plan);

// Joint conditional sample on the plan vertices: root from root_marginal,
// then forward sampling down the ray, sigma_child | sigma_v ~ Q(sigma_v, j)
// z(child, j). Requires all plan vertices on one root path.
ConfigWindow sample_interior(const MessageTree& mt, const BranchPlan& plan, CounterRng& rng);

// Full interior configuration, same forward sampling in level order.
std::vector<std::uint8_t> sample_ball(const MessageTree& mt, CounterRng& rng);

// H = sum of pair energies over every edge meeting lambda plus field terms on
// lambda. The window must cover lambda and all edge endpoints.
double hamiltonian(const ModelSpec& spec, const BallGeometry& geom, const ConfigWindow& w,
                   const std::vector<Vertex>& lambda);

// H(omega0 with labels written on gamma) - H(omega0), evaluated on the edges
// meeting gamma and the fields on gamma. labels[k] is the spin at gamma[k] and
// must differ from omega0 there. Checks the excess-energy floor
//   (d-1) u |gamma| - (U+u) |D(omega0) cap E(gamma)| + sum_gamma dPsi
// and throws numeric_error if the exact value undercuts it.
double excess_energy(const ModelSpec& spec, const BallGeometry& geom, const ConfigWindow& omega0,
                     const std::vector<Vertex>& gamma, const std::vector<std::uint8_t>& labels);

// The floor by itself.
double excess_energy_floor(const ModelSpec& spec, const BallGeometry& geom,
                           const ConfigWindow& omega0, const std::vector<Vertex>& gamma,
                           const std::vector<std::uint8_t>& labels);

struct ContourRecord {
  std::vector<Vertex> support;
  std::vector<std::uint8_t> labels;
  double excess = 0;
  double activity = 0;  // exp(-beta * excess)
};

// Exhaustive Peierls comparison on a small ball: lhs is the exact conditional
// probability of deviating from omega0 at v, rhs the activity sum over all
// labelled contours through v inside the interior ball.
struct PeierlsLedger {
  double lhs = 0;
  double rhs = 0;
  std::int64_t contour_count = 0;
  std::vector<ContourRecord> records;
};

// omega0 must cover the closed ball. Guarded to |B_n| <= 13.
PeierlsLedger peierls_check(const ModelSpec& spec, const BallGeometry& geom,
                            const ConfigWindow& omega0, Vertex v);

}  // namespace treegibbs
