#include "treegibbs/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace treegibbs {

namespace {
constexpr double kSymTol = 1e-12;

int cyc_dist(int i, int j, int q) {
  int k = std::abs(i - j);
  return std::min(k, q - k);
}
}  // namespace

double ModelSpec::u_min() const {
  double m = inf_d();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      if (i != j) m = std::min(m, pe(i, j));
  return m;
}

double ModelSpec::u_max() const {
  double m = -inf_d();
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) m = std::max(m, pe(i, j));
  return m;
}

bool ModelSpec::zero_field() const {
  for (double f : field)
    if (f != 0.0) return false;
  return true;
}

bool ModelSpec::central_admissible() const {
  double m = 0;
  for (double f : field) m = std::max(m, std::abs(f));
  return m <= u_min() * (d - 1) / 8.0 + 1e-15;
}

ModelSpec ModelSpec::reference() const {
  ModelSpec r = *this;
  std::fill(r.field.begin(), r.field.end(), 0.0);
  return r;
}

void validate(const ModelSpec& spec) {
  if (spec.q < 2) throw config_error("q must be >= 2");
  if (spec.d < 2) throw config_error("d must be >= 2");
  if (!(spec.beta > 0) || !std::isfinite(spec.beta))
    throw config_error("beta must be positive and finite");
  if (spec.pair_energy.size() != static_cast<size_t>(spec.q) * spec.q)
    throw config_error("pair_energy must be q x q");
  if (spec.field.size() != static_cast<size_t>(spec.q))
    throw config_error("field must have length q");
  double scale = 1.0;
  for (double v : spec.pair_energy) {
    if (!std::isfinite(v)) throw config_error("pair_energy entries must be finite");
    scale = std::max(scale, std::abs(v));
  }
  for (double f : spec.field)
    if (!std::isfinite(f)) throw config_error("field entries must be finite");
  for (int i = 0; i < spec.q; ++i) {
    if (std::abs(spec.pe(i, i)) > kSymTol * scale)
      throw config_error("pair_energy diagonal must be zero");
    for (int j = i + 1; j < spec.q; ++j) {
      if (std::abs(spec.pe(i, j) - spec.pe(j, i)) > kSymTol * scale)
        throw config_error("pair_energy must be symmetric");
      if (!(spec.pe(i, j) > 0))
        throw config_error("off-diagonal pair_energy must be positive");
    }
  }
  if (spec.clock_flag) {
    for (int i = 0; i < spec.q; ++i)
      for (int j = 0; j < spec.q; ++j)
        if (std::abs(spec.pe(i, j) - spec.pe(0, cyc_dist(i, j, spec.q))) > kSymTol * scale)
          throw config_error("clock_flag set but pair_energy is not a cyclic-distance function");
  }
}

ModelSpec make_potts(int q, int d, double beta, std::vector<double> field) {
  ModelSpec s;
  s.q = q;
  s.d = d;
  s.beta = beta;
  s.pair_energy.assign(static_cast<size_t>(q) * q, 1.0);
  for (int i = 0; i < q; ++i) s.pair_energy[static_cast<size_t>(i) * q + i] = 0.0;
  s.field = field.empty() ? std::vector<double>(q, 0.0) : std::move(field);
  s.clock_flag = true;
  validate(s);
  return s;
}

ModelSpec make_clock(int q, int d, double beta, const std::vector<double>& profile,
                     std::vector<double> field) {
  if (profile.size() != static_cast<size_t>(q / 2) + 1)
    throw config_error("clock profile must have floor(q/2)+1 entries");
  ModelSpec s;
  s.q = q;
  s.d = d;
  s.beta = beta;
  s.pair_energy.resize(static_cast<size_t>(q) * q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j)
      s.pair_energy[static_cast<size_t>(i) * q + j] = profile[cyc_dist(i, j, q)];
  s.field = field.empty() ? std::vector<double>(q, 0.0) : std::move(field);
  s.clock_flag = true;
  validate(s);
  return s;
}

ModelSpec spec_from_transfer(int q, int d, const std::vector<double>& Q) {
  if (Q.size() != static_cast<size_t>(q) * q)
    throw config_error("transfer matrix must be q x q");
  ModelSpec s;
  s.q = q;
  s.d = d;
  s.beta = 1.0;
  s.pair_energy.resize(Q.size());
  s.field.resize(q);
  for (int i = 0; i < q; ++i) {
    if (!(Q[static_cast<size_t>(i) * q + i] > 0))
      throw config_error("transfer matrix must be strictly positive");
    s.field[i] = -(d + 1) * 0.5 * std::log(Q[static_cast<size_t>(i) * q + i]);
  }
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      double qij = Q[static_cast<size_t>(i) * q + j];
      if (!(qij > 0)) throw config_error("transfer matrix must be strictly positive");
      s.pair_energy[static_cast<size_t>(i) * q + j] =
          -std::log(qij) - (s.field[i] + s.field[j]) / (d + 1);
    }
  // Clean up roundoff so validate()'s exact-zero diagonal check passes.
  for (int i = 0; i < q; ++i) s.pair_energy[static_cast<size_t>(i) * q + i] = 0.0;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      double m = 0.5 * (s.pe(i, j) + s.pe(j, i));
      s.pair_energy[static_cast<size_t>(i) * q + j] = m;
      s.pair_energy[static_cast<size_t>(j) * q + i] = m;
    }
  s.clock_flag = false;
  validate(s);
  return s;
}

double TransferMatrix::row_sum(int i) const {
  double s = 0;
  for (int j = 0; j < q; ++j) s += (*this)(i, j);
  return s;
}

TransferMatrix build_transfer(const ModelSpec& spec) {
  validate(spec);
  TransferMatrix Q;
  Q.q = spec.q;
  Q.a.resize(static_cast<size_t>(spec.q) * spec.q);
  for (int i = 0; i < spec.q; ++i)
    for (int j = 0; j < spec.q; ++j)
      Q.a[static_cast<size_t>(i) * spec.q + j] = std::exp(
          -spec.beta * (spec.pe(i, j) + (spec.psi(i) + spec.psi(j)) / (spec.d + 1)));
  return Q;
}

double delta0(const ModelSpec& spec) {
  double u = spec.u_min(), U = spec.u_max();
  double v = 0.5 * (spec.d - 1) * u / (u + U);
  if (!(v > 0 && v < 0.5 * (spec.d - 1))) throw numeric_error("delta0 out of range");
  return v;
}

namespace {
// Tail sum over l >= 1 of (d+1)^{2(l-1)} (q-1)^l x^l: geometric with ratio
// r = (d+1)^2 (q-1) x; equals (q-1) x / (1 - r) when r < 1.
Bound contour_tail_sum(int d, int q, double x) {
  Bound b;
  double r = static_cast<double>(d + 1) * (d + 1) * (q - 1) * x;
  if (r >= 1.0) {
    b.value = inf_d();
    b.divergent = true;
    b.vacuous = true;
    return b;
  }
  b.value = (q - 1) * x / (1.0 - r);
  b.divergent = false;
  b.vacuous = b.value >= 1.0;
  return b;
}
}  // namespace

Bound epsilon1(const ModelSpec& spec) {
  double x = std::exp(-spec.beta * (spec.d - 1) * spec.u_min() / 4.0);
  return contour_tail_sum(spec.d, spec.q, x);
}

double lambda_of_p1(const ModelSpec& spec, double p1) {
  if (!(p1 > 0 && p1 < 1)) throw config_error("p1 must lie in (0,1)");
  double dlt = delta0(spec);
  int d = spec.d;
  double thr = dlt * (1 - p1) / (d + 1 - dlt);  // = p1 e^{t*}
  if (p1 >= thr) return 0.0;                    // t* <= 0: infimum at t = 0
  double tstar = std::log(thr / p1);
  return dlt * tstar - (d + 1) * std::log1p(thr - p1);
}

double lambda_of_p1_quoted_form(const ModelSpec& spec, double p1) {
  if (!(p1 > 0 && p1 < 1)) throw config_error("p1 must lie in (0,1)");
  double dlt = delta0(spec);
  int d = spec.d;
  double v = std::pow(p1 / dlt, dlt) * std::pow((1 - p1) / (d + 1 - dlt), 1 - dlt);
  return -std::log(v);
}

Bound epsilon2(const ModelSpec& spec, double lambda) {
  if (!(lambda >= 0)) throw config_error("lambda must be nonnegative");
  return contour_tail_sum(spec.d, spec.q, std::exp(-lambda));
}

EigenReport eigen_report(const ModelSpec& spec) {
  validate(spec);
  if (!spec.clock_flag) throw config_error("eigen_report requires a clock model");
  ModelSpec ref = spec.reference();
  TransferMatrix Q0 = build_transfer(ref);
  double norm = Q0.row_sum(0);
  int q = spec.q;

  EigenReport rep;
  rep.dft.resize(q);
  const double pi2 = 2.0 * std::acos(-1.0);
  for (int k = 0; k < q; ++k) {
    double re = 0;
    for (int j = 0; j < q; ++j) re += Q0(0, j) / norm * std::cos(pi2 * j * k / q);
    rep.dft[k] = re;  // profile is even in j, so the spectrum is real
  }

  Eigen::MatrixXd M(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) M(i, j) = Q0(i, j) / norm;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw numeric_error("dense eigensolver failed");
  rep.dense.assign(es.eigenvalues().data(), es.eigenvalues().data() + q);
  std::sort(rep.dense.begin(), rep.dense.end(), std::greater<double>());

  std::vector<double> sorted_dft = rep.dft;
  std::sort(sorted_dft.begin(), sorted_dft.end(), std::greater<double>());
  for (int k = 0; k < q; ++k)
    rep.cross_error = std::max(rep.cross_error, std::abs(sorted_dft[k] - rep.dense[k]));

  double x = (q - 1) * std::exp(-spec.beta * spec.u_min());
  rep.quant_lower = (1 - x) / (1 + x);
  rep.quant_meaningful = x < 1;
  double mn = *std::min_element(rep.dft.begin(), rep.dft.end());
  rep.quant_holds = !rep.quant_meaningful || mn >= rep.quant_lower - 1e-12;
  rep.min_dist_to_inv_d = inf_d();
  for (double ev : rep.dft)
    rep.min_dist_to_inv_d = std::min(rep.min_dist_to_inv_d, std::abs(ev - 1.0 / spec.d));
  rep.gap_condition = static_cast<double>(spec.d - 1) / (spec.d + 1) > x;
  return rep;
}

BoundsReport constants(const ModelSpec& spec) {
  validate(spec);
  BoundsReport r;
  r.delta0 = delta0(spec);
  r.epsilon1 = epsilon1(spec);
  r.central_admissible = spec.central_admissible();
  if (spec.clock_flag) {
    EigenReport er = eigen_report(spec);
    r.eig_lower = er.quant_lower;
    r.gap_condition = er.gap_condition;
  }
  return r;
}

BoundsReport bounds_report(const ModelSpec& spec, double p1) {
  BoundsReport r = constants(spec);
  r.p1 = p1;
  r.lambda_p1 = lambda_of_p1(spec, p1);
  r.lambda_p1_quoted_form = lambda_of_p1_quoted_form(spec, p1);
  r.lambda_forms_agree =
      std::abs(r.lambda_p1 - r.lambda_p1_quoted_form) <= 1e-9 * std::max(1.0, r.lambda_p1);
  r.epsilon2 = epsilon2(spec, r.lambda_p1);
  return r;
}

}  // namespace treegibbs
