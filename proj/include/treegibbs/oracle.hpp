#pragma once
#include <cstdint>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/tree.hpp"

namespace treegibbs {

// Brute-force ground truth on tiny balls. Shares no inference code with the
// message-passing module: energies are summed edge by edge and normalised by
// an explicit sum over all interior configurations.
struct ExactDistribution {
  int q = 0;
  std::int64_t interior = 0;  // |B_n|
  // Probability of every interior configuration; vertex 0 is the fastest
  // digit of the config index.
  std::vector<double> prob;
  double log_z = 0;

  std::vector<double> marginal(Vertex v) const;
};

// Guarded to q^{|B_n|} <= 10^7. boundary must cover the outer sphere.
ExactDistribution enumerate_gibbs(const ModelSpec& spec, const BallGeometry& geom,
                                  const ConfigWindow& boundary);

// Exact finite-depth Edwards-Anderson parameter of the broadcast kernel:
// (1/q) sum_a Var_omega(pi_n(sigma_0 = a | omega)) with omega the outer-sphere
// restriction of a full-ball broadcast, all sums exhaustive.
double exact_qea_small(const ModelSpec& spec, const ChainKernel& kernel, int n);

// Connected subsets of size ell containing the root of the infinite
// (d+1)-regular tree, by generating function (A = z(1+A)^d per child subtree,
// z(1+A)^{d+1} at the root). Guarded to ell <= 8; checks the entropy bound
// count <= (d+1)^{2(ell-1)}.
std::int64_t exact_connected_count(int d, int ell);

}  // namespace treegibbs
