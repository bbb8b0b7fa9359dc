#pragma once
#include <vector>

#include "treegibbs/common.hpp"

namespace treegibbs {

// Nearest-neighbour spin model on the (d+1)-regular tree with single-site
// field. pair_energy is q x q, symmetric, zero diagonal, strictly positive off
// the diagonal; clock_flag marks invariance under cyclic relabelling
// (pair_energy(i,j) depends only on the cyclic distance |i-j|).
struct ModelSpec {
  int q = 2;
  int d = 2;
  double beta = 1.0;
  std::vector<double> pair_energy;  // row-major q*q
  std::vector<double> field;        // length q
  bool clock_flag = false;

  double pe(int i, int j) const { return pair_energy[static_cast<size_t>(i) * q + j]; }
  double psi(int i) const { return field[static_cast<size_t>(i)]; }
  double u_min() const;  // min off-diagonal pair energy
  double u_max() const;  // max pair energy
  bool zero_field() const;
  // The interior solver is built for small fields: max|field| <= u_min*(d-1)/8.
  // Violations are recorded by callers, never fatal here.
  bool central_admissible() const;
  ModelSpec reference() const;  // same pair part, zero field
};

// Throws config_error on any contract violation (q<2, d<2, beta<=0, asymmetry,
// nonzero diagonal, nonpositive off-diagonal, bad sizes, clock_flag mismatch).
void validate(const ModelSpec& spec);

ModelSpec make_potts(int q, int d, double beta, std::vector<double> field = {});
// profile[k] = pair energy at cyclic distance k, k = 0..floor(q/2); profile[0]
// must be 0.
ModelSpec make_clock(int q, int d, double beta, const std::vector<double>& profile,
                     std::vector<double> field = {});
// Reconstructs a spec whose transfer matrix equals Q (positive symmetric,
// beta = 1, diagonal absorbed into the field). Used to feed perturbed transfer
// matrices through the ModelSpec-typed interfaces.
ModelSpec spec_from_transfer(int q, int d, const std::vector<double>& Q);

struct TransferMatrix {
  int q = 0;
  std::vector<double> a;  // row-major, symmetric, strictly positive

  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * q + j]; }
  double row_sum(int i) const;
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * q; }
};

// Q(i,j) = exp(-beta*(pair_energy(i,j) + (field(i)+field(j))/(d+1))). The
// field split puts exactly one full field factor on each interior vertex of a
// ball (every vertex has d+1 incident edges).
TransferMatrix build_transfer(const ModelSpec& spec);

// delta0 = (1/2)(d-1) u / (u + U); always in (0, (d-1)/2).
double delta0(const ModelSpec& spec);

// Tail sum over contour sizes l >= 1 of (d+1)^{2(l-1)} (q-1)^l x^l with
// x = exp(-beta (d-1) u / 4). Divergent when (d+1)^2 (q-1) x >= 1.
Bound epsilon1(const ModelSpec& spec);

// exp(-lambda) = inf_{t>=0} exp(-t*delta0) (p1 e^t + 1 - p1)^{d+1}, evaluated
// at the interior stationary point p1 e^{t*} = (1-p1) delta0 / (d+1-delta0)
// when t* > 0, else at t = 0 (lambda = 0). Monotone nonincreasing in p1.
double lambda_of_p1(const ModelSpec& spec, double p1);

// A closed-form expression sometimes quoted for the same infimum:
// (p1/delta0)^{delta0} ((1-p1)/(d+1-delta0))^{1-delta0}. It does not match
// the actual minimum in general; recorded for comparison only.
double lambda_of_p1_quoted_form(const ModelSpec& spec, double p1);

// Same tail sum as epsilon1 with x replaced by exp(-lambda).
Bound epsilon2(const ModelSpec& spec, double lambda);

struct EigenReport {
  std::vector<double> dft;    // circulant eigenvalues, frequency order k=0..q-1
  std::vector<double> dense;  // dense symmetric solve, descending
  double cross_error = 0;     // max |dft - dense| after sorting
  double quant_lower = 0;     // (1-(q-1)e^{-beta u})/(1+(q-1)e^{-beta u})
  bool quant_meaningful = false;  // (q-1)e^{-beta u} < 1
  bool quant_holds = false;       // min eigenvalue >= quant_lower (when meaningful)
  double min_dist_to_inv_d = 0;   // min_k |lambda_k - 1/d|
  bool gap_condition = false;     // (d-1)/(d+1) > (q-1)e^{-beta u}
};

// Spectrum of the normalized reference transfer Q0/||Q0||_1 (zero-field clock
// part of spec). Requires clock_flag.
EigenReport eigen_report(const ModelSpec& spec);

struct BoundsReport {
  double delta0 = nan_d();
  Bound epsilon1;
  double p1 = nan_d();
  double lambda_p1 = nan_d();
  double lambda_p1_quoted_form = nan_d();
  bool lambda_forms_agree = false;
  Bound epsilon2;
  double eig_lower = nan_d();
  bool gap_condition = false;
  bool central_admissible = true;
};

// delta0/admissibility/spectral fields only; chain-dependent fields stay NaN.
BoundsReport constants(const ModelSpec& spec);
// Everything, given the chain's laziness parameter p1.
BoundsReport bounds_report(const ModelSpec& spec, double p1);

}  // namespace treegibbs
