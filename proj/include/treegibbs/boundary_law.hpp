#pragma once
#include <vector>

#include "treegibbs/common.hpp"
#include "treegibbs/model.hpp"

namespace treegibbs {

// Positive solution of x(i) = sum_j Q(i,j) x(j)^d in the c = 1 normalisation.
struct BoundaryLaw {
  std::vector<double> x;
  double residual = 0;  // sup norm of x - Q x^d
};

// Tree-indexed Markov chain induced by a boundary law:
// P(i,j) = Q(i,j) x(j)^d / sum_k Q(i,k) x(k)^d, marginal = x^{d+1}/||x^{d+1}||_1.
struct ChainKernel {
  int q = 0;
  std::vector<double> P;  // row-major stochastic
  std::vector<double> marginal;
  double p1 = 0;       // max_i sum_{j != i} P(i,j)
  double lambda2 = 0;  // second-largest eigenvalue modulus of P
  bool irreducible_aperiodic = false;
  double row_sum_err = 0;     // max_i |1 - sum_j P(i,j)| before renormalising
  double invariance_err = 0;  // || marginal^T P - marginal^T ||_inf

  const double* row(int i) const { return P.data() + static_cast<size_t>(i) * q; }
};

// Constant law of the zero-field clock model: x = R^{-1/(d-1)} with R the raw
// transfer row sum. Requires clock_flag and zero field.
BoundaryLaw free_law(const ModelSpec& spec);

struct SolveOptions {
  int homotopy_steps = 20;
  int max_newton_total = 200;
  double tol = 1e-12;  // residual target; the contract only promises 1e-10
};

// Damped-Newton continuation from the reference's constant law to the target
// transfer. Reference must be a zero-field clock model whose normalised
// spectrum avoids 1/d (Jacobian id - d Q0 invertible). Throws numeric_error
// when continuation fails (singular Jacobian, no descent, iteration budget).
BoundaryLaw solve_central(const ModelSpec& target, const ModelSpec& reference,
                          const SolveOptions& opts = {});

ChainKernel chain_from_law(const ModelSpec& spec, const BoundaryLaw& law);

// p1 <= (q-1) e^{-beta u} for the free clock chain.
bool p1_bound_check(const ModelSpec& spec, const ChainKernel& kernel);

// First-order continuation prediction 1 + (id - d Q0hat)^{-1} (Qhat - Q0hat) 1,
// with both transfers normalised by the reference row sum. Used by the
// expansion-order checks.
std::vector<double> central_first_order(const ModelSpec& target, const ModelSpec& reference);

// Normalised transfers used by the continuation (target and reference divided
// by the reference row sum). Exposed for tests.
TransferMatrix normalized_transfer(const ModelSpec& spec, const ModelSpec& reference);

}  // namespace treegibbs
