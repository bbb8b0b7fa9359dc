#include "treegibbs/boundary_law.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

namespace treegibbs {

BoundaryLaw free_law(const ModelSpec& spec) {
  if (!spec.clock_flag || !spec.zero_field())
    throw config_error("free_law: needs a zero-field clock model");
  const TransferMatrix tm = build_transfer(spec);
  const double R = tm.row_sum(0);
  const double s = std::pow(R, -1.0 / (spec.d - 1));
  BoundaryLaw law;
  law.x.assign(spec.q, s);
  double worst = 0;
  const double sd = std::pow(s, spec.d);
  for (int i = 0; i < spec.q; ++i) {
    double acc = 0;
    for (int j = 0; j < spec.q; ++j) acc += tm(i, j) * sd;
    worst = std::max(worst, std::abs(s - acc));
  }
  law.residual = worst;
  return law;
}

TransferMatrix normalized_transfer(const ModelSpec& spec, const ModelSpec& reference) {
  if (spec.q != reference.q)
    throw config_error("normalized_transfer: state-space mismatch");
  if (!reference.clock_flag || !reference.zero_field())
    throw config_error("normalized_transfer: reference must be a zero-field clock model");
  TransferMatrix tm = build_transfer(spec);
  const double R = build_transfer(reference).row_sum(0);
  for (double& a : tm.a) a /= R;
  return tm;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

VectorXd law_defect(const MatrixXd& Qt, const VectorXd& x, int d) {
  return x - Qt * x.array().pow(d).matrix();
}

// One damped Newton solve of x = Qt x^d starting from x. Returns the number of
// iterations spent, or throws numeric_error.
int newton_solve(const MatrixXd& Qt, int d, double tol, int budget, VectorXd& x) {
  int used = 0;
  VectorXd F = law_defect(Qt, x, d);
  while (F.lpNorm<Eigen::Infinity>() > tol) {
    if (++used > budget) throw numeric_error("solve_central: Newton budget exhausted");
    MatrixXd J = MatrixXd::Identity(x.size(), x.size()) -
                 d * Qt * x.array().pow(d - 1).matrix().asDiagonal().toDenseMatrix();
    Eigen::FullPivLU<MatrixXd> lu(J);
    if (!lu.isInvertible()) throw numeric_error("solve_central: singular Jacobian");
    VectorXd delta = lu.solve(-F);
    const double f0 = F.lpNorm<Eigen::Infinity>();
    double step = 1.0;
    while (true) {
      VectorXd cand = x + step * delta;
      if (cand.minCoeff() > 0) {
        VectorXd Fc = law_defect(Qt, cand, d);
        if (Fc.lpNorm<Eigen::Infinity>() < f0) {
          x = cand;
          F = Fc;
          break;
        }
      }
      step *= 0.5;
      if (step < 0x1p-30)
        throw numeric_error(
            "solve_central: line search stalled; no law near the uniform branch "
            "(model may sit at a soft-mode threshold)");
    }
  }
  return used;
}

}  // namespace

BoundaryLaw solve_central(const ModelSpec& target, const ModelSpec& reference,
                          const SolveOptions& opts) {
  const TransferMatrix hat = normalized_transfer(target, reference);
  const TransferMatrix hat0 = normalized_transfer(reference, reference);
  const int q = target.q;
  const int d = target.d;
  Eigen::Map<const RowMat> Q1(hat.a.data(), q, q);
  Eigen::Map<const RowMat> Q0(hat0.a.data(), q, q);

  VectorXd x = VectorXd::Ones(q);  // constant law of the normalised reference
  int budget = opts.max_newton_total;
  for (int k = 1; k <= opts.homotopy_steps; ++k) {
    const double t = static_cast<double>(k) / opts.homotopy_steps;
    MatrixXd Qt = Q0 + t * (Q1 - Q0);
    budget -= newton_solve(Qt, d, opts.tol, budget, x);
  }

  // Back to the c = 1 normalisation of the raw target transfer.
  const double R = build_transfer(reference).row_sum(0);
  const double scale = std::pow(R, -1.0 / (d - 1));
  BoundaryLaw law;
  law.x.resize(q);
  for (int i = 0; i < q; ++i) law.x[i] = scale * x[i];

  const TransferMatrix raw = build_transfer(target);
  double worst = 0;
  for (int i = 0; i < q; ++i) {
    double acc = 0;
    for (int j = 0; j < q; ++j) acc += raw(i, j) * std::pow(law.x[j], d);
    worst = std::max(worst, std::abs(law.x[i] - acc));
  }
  law.residual = worst;
  return law;
}

std::vector<double> central_first_order(const ModelSpec& target, const ModelSpec& reference) {
  const TransferMatrix hat = normalized_transfer(target, reference);
  const TransferMatrix hat0 = normalized_transfer(reference, reference);
  const int q = target.q;
  Eigen::Map<const RowMat> Q1(hat.a.data(), q, q);
  Eigen::Map<const RowMat> Q0(hat0.a.data(), q, q);
  MatrixXd J0 = MatrixXd::Identity(q, q) - target.d * Q0;
  Eigen::FullPivLU<MatrixXd> lu(J0);
  if (!lu.isInvertible())
    throw numeric_error("central_first_order: reference Jacobian singular");
  VectorXd rhs = (Q1 - Q0) * VectorXd::Ones(q);
  VectorXd x = VectorXd::Ones(q) + lu.solve(rhs);

  const double R = build_transfer(reference).row_sum(0);
  const double scale = std::pow(R, -1.0 / (target.d - 1));
  std::vector<double> out(q);
  for (int i = 0; i < q; ++i) out[i] = scale * x[i];
  return out;
}

ChainKernel chain_from_law(const ModelSpec& spec, const BoundaryLaw& law) {
  const int q = spec.q;
  if (static_cast<int>(law.x.size()) != q)
    throw config_error("chain_from_law: law size mismatch");
  const TransferMatrix tm = build_transfer(spec);

  ChainKernel k;
  k.q = q;
  k.P.assign(static_cast<size_t>(q) * q, 0);
  std::vector<double> xd(q);
  for (int j = 0; j < q; ++j) xd[j] = std::pow(law.x[j], spec.d);

  double row_err = 0;
  for (int i = 0; i < q; ++i) {
    double denom = 0;
    for (int j = 0; j < q; ++j) denom += tm(i, j) * xd[j];
    if (!(denom > 0)) throw numeric_error("chain_from_law: vanishing row normaliser");
    double sum = 0;
    for (int j = 0; j < q; ++j) {
      const double p = tm(i, j) * xd[j] / denom;
      k.P[static_cast<size_t>(i) * q + j] = p;
      sum += p;
    }
    row_err = std::max(row_err, std::abs(sum - 1.0));
    for (int j = 0; j < q; ++j) k.P[static_cast<size_t>(i) * q + j] /= sum;
  }
  k.row_sum_err = row_err;

  k.marginal.resize(q);
  double norm = 0;
  for (int i = 0; i < q; ++i) {
    k.marginal[i] = std::pow(law.x[i], spec.d + 1);
    norm += k.marginal[i];
  }
  for (double& m : k.marginal) m /= norm;

  double inv_err = 0;
  for (int j = 0; j < q; ++j) {
    double acc = 0;
    for (int i = 0; i < q; ++i) acc += k.marginal[i] * k.P[static_cast<size_t>(i) * q + j];
    inv_err = std::max(inv_err, std::abs(acc - k.marginal[j]));
  }
  k.invariance_err = inv_err;

  double min_diag = 1.0, min_entry = 1.0;
  for (int i = 0; i < q; ++i) {
    min_diag = std::min(min_diag, k.P[static_cast<size_t>(i) * q + i]);
    for (int j = 0; j < q; ++j) min_entry = std::min(min_entry, k.P[static_cast<size_t>(i) * q + j]);
  }
  k.p1 = 1.0 - min_diag;
  k.irreducible_aperiodic = min_entry > 0;

  MatrixXd Pm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(k.P.data(), q, q);
  Eigen::EigenSolver<MatrixXd> es(Pm, /*computeEigenvectors=*/false);
  std::vector<double> mods(q);
  for (int i = 0; i < q; ++i) mods[i] = std::abs(es.eigenvalues()[i]);
  std::sort(mods.begin(), mods.end(), std::greater<>());
  k.lambda2 = q > 1 ? mods[1] : 0.0;
  return k;
}

bool p1_bound_check(const ModelSpec& spec, const ChainKernel& kernel) {
  if (!spec.clock_flag || !spec.zero_field())
    throw config_error("p1_bound_check: needs a zero-field clock model");
  const double bound = (spec.q - 1) * std::exp(-spec.beta * spec.u_min());
  return kernel.p1 <= bound + 1e-12;
}

}  // namespace treegibbs
