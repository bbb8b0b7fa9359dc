#include "treegibbs/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace treegibbs {
namespace {

// Message of child c as seen from a parent spin i: either the transfer column
// of a fixed outer-sphere spin, or the transfer applied to c's upward message.
void child_lift(const MessageTree& mt, Vertex c, std::vector<double>& t) {
  const int q = mt.q;
  const BallGeometry& g = *mt.geom;
  if (g.depth_of(c) == g.max_depth()) {
    const int s = mt.omega[static_cast<size_t>(c - g.sphere_begin(g.max_depth()))];
    for (int i = 0; i < q; ++i) t[i] = mt.tm(i, s);
  } else {
    const double* zc = mt.msg(c);
    for (int i = 0; i < q; ++i) {
      const double* row = mt.tm.row(i);
      double acc = 0;
      for (int j = 0; j < q; ++j) acc += row[j] * zc[j];
      t[i] = acc;
    }
  }
}

std::vector<double> normalized(std::vector<double> p) {
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
  return p;
}

// Root path root -> v inclusive; ascending because parents precede children
// in level order.
std::vector<Vertex> root_path(const BallGeometry& g, Vertex v) {
  std::vector<Vertex> path{v};
  while (g.depth_of(path.back()) > 0) path.push_back(g.parent(path.back()));
  std::reverse(path.begin(), path.end());
  return path;
}

// Downward prefix weights along the root path of v: pre(v, j) proportional to
// the law of sigma_v with the subtree below v removed.
std::vector<double> downward_prefix(const MessageTree& mt, Vertex v) {
  const int q = mt.q;
  const BallGeometry& g = *mt.geom;
  std::vector<Vertex> path = root_path(g, v);
  std::vector<double> pre(q, 1.0), t(q), a(q), next(q);
  for (size_t step = 0; step + 1 < path.size(); ++step) {
    const Vertex p = path[step];
    const Vertex tgt = path[step + 1];
    a.assign(pre.begin(), pre.end());
    const int nc = g.child_count(p);
    for (int j = 0; j < nc; ++j) {
      const Vertex c = g.child(p, j);
      if (c == tgt) continue;
      child_lift(mt, c, t);
      for (int i = 0; i < q; ++i) a[i] *= t[i];
    }
    for (int jj = 0; jj < q; ++jj) {
      double acc = 0;
      for (int i = 0; i < q; ++i) acc += a[i] * mt.tm(i, jj);
      next[jj] = acc;
    }
    pre = normalized(next);
  }
  return pre;
}

}  // namespace

MessageTree upward_messages(const ModelSpec& spec, const BallGeometry& geom,
                            const ConfigWindow& boundary) {
  if (spec.d != geom.d()) throw config_error("upward_messages: spec/geometry degree mismatch");
  MessageTree mt;
  mt.geom = &geom;
  mt.q = spec.q;
  mt.d = geom.d();
  mt.beta = spec.beta;
  mt.tm = build_transfer(spec);

  const int n = geom.depth();
  const std::int64_t sb = geom.sphere_begin(n + 1);
  const std::int64_t ss = geom.sphere_size(n + 1);
  mt.omega.resize(static_cast<size_t>(ss));
  const int idx0 = boundary.find(sb);
  const bool contiguous =
      idx0 >= 0 && idx0 + ss <= static_cast<std::int64_t>(boundary.verts.size()) &&
      boundary.verts[static_cast<size_t>(idx0 + ss - 1)] == sb + ss - 1;
  if (contiguous) {
    std::copy_n(boundary.spins.begin() + idx0, ss, mt.omega.begin());
  } else {
    for (std::int64_t p = 0; p < ss; ++p) {
      const int k = boundary.find(sb + p);
      if (k < 0) throw config_error("upward_messages: boundary misses part of the outer sphere");
      mt.omega[static_cast<size_t>(p)] = boundary.spins[static_cast<size_t>(k)];
    }
  }
  for (std::int64_t p = 0; p < ss; ++p)
    if (mt.omega[static_cast<size_t>(p)] >= spec.q)
      throw config_error("upward_messages: boundary spin out of range");

  if (!spec.zero_field()) {
    double acc = 0;
    for (std::int64_t p = 0; p < ss; ++p) acc += spec.psi(mt.omega[static_cast<size_t>(p)]);
    mt.boundary_field_share = spec.beta * acc / (spec.d + 1);
  }

  const std::int64_t nb = geom.ball_size(n);
  const int q = spec.q;
  mt.z.assign(static_cast<size_t>(nb) * q, 0.0);
  mt.logscale.assign(static_cast<size_t>(nb), 0.0);

  std::vector<double> t(q);
  for (int k = n; k >= 0; --k) {
    const Vertex lo = geom.sphere_begin(k);
    const Vertex hi = lo + geom.sphere_size(k);
    for (Vertex v = lo; v < hi; ++v) {
      double* zv = mt.z.data() + static_cast<size_t>(v) * q;
      std::fill_n(zv, q, 1.0);
      double child_logs = 0;
      const int nc = geom.child_count(v);
      for (int j = 0; j < nc; ++j) {
        const Vertex c = geom.child(v, j);
        if (k == n) {
          const int s = mt.omega[static_cast<size_t>(c - sb)];
          for (int i = 0; i < q; ++i) zv[i] *= mt.tm(i, s);
        } else {
          const double* zc = mt.msg(c);
          for (int i = 0; i < q; ++i) {
            const double* row = mt.tm.row(i);
            double acc = 0;
            for (int jj = 0; jj < q; ++jj) acc += row[jj] * zc[jj];
            zv[i] *= acc;
          }
          child_logs += mt.logscale[static_cast<size_t>(c)];
        }
      }
      const double m = *std::max_element(zv, zv + q);
      if (!(m > 0) || !std::isfinite(m))
        throw numeric_error("upward_messages: degenerate message");
      for (int i = 0; i < q; ++i) zv[i] /= m;
      mt.logscale[static_cast<size_t>(v)] = std::log(m) + child_logs;
    }
  }

  const double* zr = mt.msg(0);
  mt.log_z_q = std::log(std::accumulate(zr, zr + q, 0.0)) + mt.logscale[0];
  return mt;
}

std::vector<double> root_marginal(const MessageTree& mt) {
  return normalized(std::vector<double>(mt.msg(0), mt.msg(0) + mt.q));
}

double log_partition(const MessageTree& mt) { return mt.log_z_q + mt.boundary_field_share; }

std::vector<double> site_marginal(const MessageTree& mt, Vertex v) {
  if (mt.geom->depth_of(v) > mt.geom->depth())
    throw config_error("site_marginal: target outside the interior ball");
  std::vector<double> pre = downward_prefix(mt, v);
  const double* zv = mt.msg(v);
  for (int i = 0; i < mt.q; ++i) pre[static_cast<size_t>(i)] *= zv[i];
  return normalized(std::move(pre));
}

std::vector<std::vector<double>> path_marginals(const MessageTree& mt, const BranchPlan& plan) {
  std::vector<std::vector<double>> out;
  out.reserve(plan.vertices.size());
  for (Vertex v : plan.vertices) out.push_back(site_marginal(mt, v));
  return out;
}

ConfigWindow sample_interior(const MessageTree& mt, const BranchPlan& plan, CounterRng& rng) {
  if (plan.vertices.empty()) throw config_error("sample_interior: empty plan");
  const BallGeometry& g = *mt.geom;
  if (g.depth_of(plan.vertices.back()) > g.depth())
    throw config_error("sample_interior: target outside the interior ball");
  std::vector<Vertex> path = root_path(g, plan.vertices.back());
  for (Vertex v : plan.vertices)
    if (!std::binary_search(path.begin(), path.end(), v))
      throw config_error("sample_interior: plan vertices not on one root path");

  const int q = mt.q;
  std::vector<int> spin(path.size());
  std::vector<double> w = root_marginal(mt);
  spin[0] = sample_categorical(w.data(), q, rng.next_uniform());
  for (size_t k = 1; k < path.size(); ++k) {
    const int i = spin[k - 1];
    const double* zc = mt.msg(path[k]);
    for (int j = 0; j < q; ++j) w[static_cast<size_t>(j)] = mt.tm(i, j) * zc[j];
    w = normalized(std::move(w));
    spin[k] = sample_categorical(w.data(), q, rng.next_uniform());
  }

  ConfigWindow out;
  size_t k = 0;
  for (Vertex v : plan.vertices) {
    while (path[k] != v) ++k;
    out.verts.push_back(v);
    out.spins.push_back(static_cast<std::uint8_t>(spin[k]));
  }
  return out;
}

std::vector<std::uint8_t> sample_ball(const MessageTree& mt, CounterRng& rng) {
  const BallGeometry& g = *mt.geom;
  const int q = mt.q;
  const std::int64_t nb = g.ball_size(g.depth());
  std::vector<std::uint8_t> spins(static_cast<size_t>(nb));
  std::vector<double> w = root_marginal(mt);
  spins[0] = static_cast<std::uint8_t>(sample_categorical(w.data(), q, rng.next_uniform()));
  for (Vertex v = 1; v < nb; ++v) {
    const int i = spins[static_cast<size_t>(g.parent(v))];
    const double* zv = mt.msg(v);
    for (int j = 0; j < q; ++j) w[static_cast<size_t>(j)] = mt.tm(i, j) * zv[j];
    w = normalized(std::move(w));
    spins[static_cast<size_t>(v)] =
        static_cast<std::uint8_t>(sample_categorical(w.data(), q, rng.next_uniform()));
  }
  return spins;
}

double hamiltonian(const ModelSpec& spec, const BallGeometry& geom, const ConfigWindow& w,
                   const std::vector<Vertex>& lambda) {
  std::vector<Vertex> sorted = lambda;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw config_error("hamiltonian: duplicate vertices in lambda");
  double h = 0;
  for (const Edge& e : attached_edges(geom, sorted)) h += spec.pe(w.at(e.a), w.at(e.b));
  for (Vertex v : sorted) h += spec.psi(w.at(v));
  return h;
}

double excess_energy_floor(const ModelSpec& spec, const BallGeometry& geom,
                           const ConfigWindow& omega0, const std::vector<Vertex>& gamma,
                           const std::vector<std::uint8_t>& labels) {
  const double u = spec.u_min();
  const double U = spec.u_max();
  std::int64_t broken = 0;
  for (const Edge& e : attached_edges(geom, gamma))
    if (omega0.at(e.a) != omega0.at(e.b)) ++broken;
  double dpsi = 0;
  for (size_t k = 0; k < gamma.size(); ++k)
    dpsi += spec.psi(labels[k]) - spec.psi(omega0.at(gamma[k]));
  return (geom.d() - 1) * u * static_cast<double>(gamma.size()) -
         (U + u) * static_cast<double>(broken) + dpsi;
}

double excess_energy(const ModelSpec& spec, const BallGeometry& geom, const ConfigWindow& omega0,
                     const std::vector<Vertex>& gamma, const std::vector<std::uint8_t>& labels) {
  if (gamma.empty() || gamma.size() != labels.size())
    throw config_error("excess_energy: gamma/labels size mismatch");
  for (size_t k = 0; k < gamma.size(); ++k) {
    if (labels[k] >= spec.q) throw config_error("excess_energy: label out of range");
    if (labels[k] == omega0.at(gamma[k]))
      throw config_error("excess_energy: label equals the reference on gamma");
  }
  // flipped(v): labels on gamma, omega0 elsewhere
  std::vector<Vertex> sorted = gamma;
  std::vector<size_t> order(gamma.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return gamma[a] < gamma[b]; });
  std::sort(sorted.begin(), sorted.end());
  auto flipped = [&](Vertex v) -> int {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    if (it != sorted.end() && *it == v)
      return labels[order[static_cast<size_t>(it - sorted.begin())]];
    return omega0.at(v);
  };

  double h1 = 0, h0 = 0;
  for (const Edge& e : attached_edges(geom, gamma)) {
    h1 += spec.pe(flipped(e.a), flipped(e.b));
    h0 += spec.pe(omega0.at(e.a), omega0.at(e.b));
  }
  for (size_t k = 0; k < gamma.size(); ++k) {
    h1 += spec.psi(labels[k]);
    h0 += spec.psi(omega0.at(gamma[k]));
  }
  const double excess = h1 - h0;
  if (excess < excess_energy_floor(spec, geom, omega0, gamma, labels) - 1e-9)
    throw numeric_error("excess_energy: value undercuts its floor");
  return excess;
}

PeierlsLedger peierls_check(const ModelSpec& spec, const BallGeometry& geom,
                            const ConfigWindow& omega0, Vertex v) {
  if (spec.d != geom.d()) throw config_error("peierls_check: spec/geometry degree mismatch");
  const int n = geom.depth();
  const std::int64_t nb = geom.ball_size(n);
  const std::int64_t total = geom.ball_size(n + 1);
  if (nb > 13) throw guard_error("peierls_check: interior ball larger than 13 vertices");
  if (geom.depth_of(v) > n) throw config_error("peierls_check: v outside the interior ball");

  std::vector<std::uint8_t> ref(static_cast<size_t>(total));
  for (Vertex u = 0; u < total; ++u) ref[static_cast<size_t>(u)] = omega0.at(u);
  std::vector<Vertex> par(static_cast<size_t>(total), -1);
  for (Vertex u = 1; u < total; ++u) par[static_cast<size_t>(u)] = geom.parent(u);

  const int q = spec.q;
  auto energy = [&](const std::vector<std::uint8_t>& s) {
    double h = 0;
    for (Vertex u = 1; u < total; ++u)
      h += spec.pe(s[static_cast<size_t>(par[static_cast<size_t>(u)])], s[static_cast<size_t>(u)]);
    for (Vertex u = 0; u < nb; ++u) h += spec.psi(s[static_cast<size_t>(u)]);
    return h;
  };

  // Exhaustive conditional law over the q^{|B_n|} interior configurations.
  std::vector<std::uint8_t> s = ref;
  double hmin = inf_d();
  const double nconf = std::pow(static_cast<double>(q), static_cast<double>(nb));
  if (nconf > 2e7) throw guard_error("peierls_check: too many interior configurations");
  auto for_each_config = [&](auto&& body) {
    std::fill(s.begin(), s.begin() + nb, 0);
    while (true) {
      body();
      Vertex pos = 0;
      while (pos < nb) {
        if (++s[static_cast<size_t>(pos)] < q) break;
        s[static_cast<size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == nb) break;
    }
  };
  for_each_config([&] { hmin = std::min(hmin, energy(s)); });

  PeierlsLedger ledger;
  double zall = 0, zneq = 0;
  const std::uint8_t ref_v = ref[static_cast<size_t>(v)];
  for_each_config([&] {
    const double w = std::exp(-spec.beta * (energy(s) - hmin));
    zall += w;
    if (s[static_cast<size_t>(v)] != ref_v) zneq += w;
  });
  ledger.lhs = zneq / zall;

  enumerate_connected(geom, v, static_cast<int>(nb), [&](const std::vector<Vertex>& gamma) {
    std::vector<std::uint8_t> labels(gamma.size(), 0);
    // odometer over per-vertex labels != reference
    std::vector<std::uint8_t> digit(gamma.size(), 0);
    auto spin_of = [&](size_t k) {
      const std::uint8_t r = ref[static_cast<size_t>(gamma[k])];
      return static_cast<std::uint8_t>(digit[k] < r ? digit[k] : digit[k] + 1);
    };
    while (true) {
      for (size_t k = 0; k < gamma.size(); ++k) labels[k] = spin_of(k);
      const double excess = excess_energy(spec, geom, omega0, gamma, labels);
      const double act = std::exp(-spec.beta * excess);
      ledger.rhs += act;
      ++ledger.contour_count;
      if (ledger.records.size() < 100000)
        ledger.records.push_back({gamma, labels, excess, act});
      size_t pos = 0;
      while (pos < gamma.size()) {
        if (++digit[pos] < static_cast<std::uint8_t>(q - 1)) break;
        digit[pos] = 0;
        ++pos;
      }
      if (pos == gamma.size()) break;
    }
  });
  return ledger;
}

}  // namespace treegibbs
