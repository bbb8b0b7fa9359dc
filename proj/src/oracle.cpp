#include "treegibbs/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace treegibbs {
namespace {

double int_pow(double b, std::int64_t e) {
  double r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

std::vector<double> ExactDistribution::marginal(Vertex v) const {
  std::int64_t stride = 1;
  for (Vertex u = 0; u < v; ++u) stride *= q;
  // long double accumulators: plain double summation over ~q^|B_n| terms
  // costs n*eps and would eat the oracle's accuracy budget
  std::vector<long double> m(static_cast<size_t>(q), 0.0L);
  for (size_t idx = 0; idx < prob.size(); ++idx)
    m[static_cast<size_t>((static_cast<std::int64_t>(idx) / stride) % q)] += prob[idx];
  std::vector<double> out(static_cast<size_t>(q));
  for (int a = 0; a < q; ++a) out[static_cast<size_t>(a)] = static_cast<double>(m[static_cast<size_t>(a)]);
  return out;
}

ExactDistribution enumerate_gibbs(const ModelSpec& spec, const BallGeometry& geom,
                                  const ConfigWindow& boundary) {
  validate(spec);
  if (spec.d != geom.d()) throw config_error("enumerate_gibbs: spec/geometry degree mismatch");
  const int q = spec.q;
  const std::int64_t nb = geom.ball_size(geom.depth());
  const std::int64_t total = geom.ball_size(geom.depth() + 1);
  if (int_pow(q, nb) > 1e7) throw guard_error("enumerate_gibbs: too many interior configurations");
  const std::int64_t nconf = [&] {
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < nb; ++i) r *= q;
    return r;
  }();

  std::vector<int> s(static_cast<size_t>(total));
  for (Vertex v = nb; v < total; ++v) {
    const int sp = boundary.at(v);
    if (sp >= q) throw config_error("enumerate_gibbs: boundary spin out of range");
    s[static_cast<size_t>(v)] = sp;
  }
  std::vector<Vertex> par(static_cast<size_t>(total), 0);
  for (Vertex v = 1; v < total; ++v) par[static_cast<size_t>(v)] = geom.parent(v);

  // H = pair terms on every edge of the closed ball + field terms on B_n.
  std::vector<double> h(static_cast<size_t>(nconf));
  for (std::int64_t idx = 0; idx < nconf; ++idx) {
    std::int64_t rest = idx;
    for (Vertex v = 0; v < nb; ++v) {
      s[static_cast<size_t>(v)] = static_cast<int>(rest % q);
      rest /= q;
    }
    long double e = 0;
    for (Vertex v = 1; v < total; ++v)
      e += spec.pe(s[static_cast<size_t>(par[static_cast<size_t>(v)])], s[static_cast<size_t>(v)]);
    for (Vertex v = 0; v < nb; ++v) e += spec.psi(s[static_cast<size_t>(v)]);
    h[static_cast<size_t>(idx)] = static_cast<double>(e);
  }

  const double hmin = *std::min_element(h.begin(), h.end());
  ExactDistribution out;
  out.q = q;
  out.interior = nb;
  out.prob.resize(static_cast<size_t>(nconf));
  long double z = 0;
  for (std::int64_t idx = 0; idx < nconf; ++idx) {
    const double w = std::exp(-spec.beta * (h[static_cast<size_t>(idx)] - hmin));
    out.prob[static_cast<size_t>(idx)] = w;
    z += w;
  }
  const double zd = static_cast<double>(z);
  for (double& p : out.prob) p /= zd;
  out.log_z = static_cast<double>(std::log(z)) - spec.beta * hmin;
  return out;
}

double exact_qea_small(const ModelSpec& spec, const ChainKernel& kernel, int n) {
  validate(spec);
  if (kernel.q != spec.q) throw config_error("exact_qea_small: kernel/spec size mismatch");
  const int q = spec.q;
  BallGeometry geom(spec.d, n);
  const std::int64_t nb = geom.ball_size(n);
  const std::int64_t total = geom.ball_size(n + 1);
  const std::int64_t sphere = total - nb;
  if (int_pow(q, total) > 2e7 || int_pow(q, sphere) * int_pow(q, nb) > 2e7)
    throw guard_error("exact_qea_small: ball too large to enumerate");

  std::vector<Vertex> par(static_cast<size_t>(total), 0);
  for (Vertex v = 1; v < total; ++v) par[static_cast<size_t>(v)] = geom.parent(v);

  // Exhaustive broadcast law of the outer sphere.
  std::int64_t nfull = 1, nomega = 1;
  for (std::int64_t i = 0; i < total; ++i) nfull *= q;
  for (std::int64_t i = 0; i < sphere; ++i) nomega *= q;
  std::vector<double> bw(static_cast<size_t>(nomega), 0.0);
  std::vector<int> s(static_cast<size_t>(total));
  for (std::int64_t idx = 0; idx < nfull; ++idx) {
    std::int64_t rest = idx;
    for (Vertex v = 0; v < total; ++v) {
      s[static_cast<size_t>(v)] = static_cast<int>(rest % q);
      rest /= q;
    }
    double w = kernel.marginal[static_cast<size_t>(s[0])];
    for (Vertex v = 1; v < total; ++v)
      w *= kernel.row(s[static_cast<size_t>(par[static_cast<size_t>(v)])])[s[static_cast<size_t>(v)]];
    std::int64_t widx = 0;
    for (Vertex v = total - 1; v >= nb; --v) widx = widx * q + s[static_cast<size_t>(v)];
    bw[static_cast<size_t>(widx)] += w;
  }

  std::vector<double> s1(static_cast<size_t>(q), 0.0), s2(static_cast<size_t>(q), 0.0);
  double wtot = 0;
  ConfigWindow boundary;
  boundary.verts.resize(static_cast<size_t>(sphere));
  boundary.spins.resize(static_cast<size_t>(sphere));
  for (std::int64_t p = 0; p < sphere; ++p) boundary.verts[static_cast<size_t>(p)] = nb + p;
  for (std::int64_t widx = 0; widx < nomega; ++widx) {
    const double w = bw[static_cast<size_t>(widx)];
    if (w == 0) continue;
    std::int64_t rest = widx;
    for (std::int64_t p = 0; p < sphere; ++p) {
      boundary.spins[static_cast<size_t>(p)] = static_cast<std::uint8_t>(rest % q);
      rest /= q;
    }
    const std::vector<double> pi = enumerate_gibbs(spec, geom, boundary).marginal(0);
    wtot += w;
    for (int a = 0; a < q; ++a) {
      s1[static_cast<size_t>(a)] += w * pi[static_cast<size_t>(a)];
      s2[static_cast<size_t>(a)] += w * pi[static_cast<size_t>(a)] * pi[static_cast<size_t>(a)];
    }
  }

  double qea = 0;
  for (int a = 0; a < q; ++a) {
    const double m1 = s1[static_cast<size_t>(a)] / wtot;
    const double m2 = s2[static_cast<size_t>(a)] / wtot;
    qea += m2 - m1 * m1;
  }
  return qea / q;
}

std::int64_t exact_connected_count(int d, int ell) {
  if (ell < 1 || ell > 8) throw guard_error("exact_connected_count: ell out of range [1,8]");
  if (d < 2) throw config_error("exact_connected_count: d < 2");
  if (std::pow(d + 1.0, 2 * (ell - 1)) > 4e18)
    throw guard_error("exact_connected_count: counts exceed 64-bit range");
  // Truncated integer polynomials in z up to degree ell; p[k] = coeff of z^k.
  using Poly = std::vector<std::int64_t>;
  const size_t deg = static_cast<size_t>(ell) + 1;
  auto mul = [&](const Poly& a, const Poly& b) {
    Poly c(deg, 0);
    for (size_t i = 0; i < deg; ++i)
      for (size_t j = 0; i + j < deg; ++j) c[i + j] += a[i] * b[j];
    return c;
  };
  auto pow_poly = [&](Poly a, int e) {
    Poly r(deg, 0);
    r[0] = 1;
    while (e > 0) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  };

  // A(z) counts connected subsets containing the top of one child subtree
  // (each vertex there has d children): A = z (1 + A)^d.
  Poly A(deg, 0);
  for (int it = 0; it <= ell; ++it) {
    Poly base = A;
    base[0] += 1;
    Poly next = pow_poly(base, d);
    for (size_t k = deg - 1; k >= 1; --k) next[k] = next[k - 1];
    next[0] = 0;
    A = next;
  }
  Poly base = A;
  base[0] += 1;
  const Poly root = pow_poly(base, d + 1);
  const std::int64_t count = root[static_cast<size_t>(ell) - 1];  // z^{ell-1} after the z factor
  std::int64_t bound = 1;
  for (int k = 0; k < 2 * (ell - 1); ++k) bound *= d + 1;
  if (count > bound) throw numeric_error("exact_connected_count: entropy bound violated");
  return count;
}

}  // namespace treegibbs
