#include "treegibbs/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace treegibbs {
namespace {

int root_spin(const BroadcastSpec& bc) {
  if (bc.root_condition >= 0) {
    if (bc.root_condition >= bc.kernel.q)
      throw config_error("broadcast: root condition out of range");
    return bc.root_condition;
  }
  return sample_categorical(bc.kernel.marginal.data(), bc.kernel.q,
                            vertex_uniform(bc.master_seed, bc.tag, 0));
}

int child_spin(const BroadcastSpec& bc, int parent_spin, Vertex v) {
  return sample_categorical(bc.kernel.row(parent_spin), bc.kernel.q,
                            vertex_uniform(bc.master_seed, bc.tag, v));
}

}  // namespace

LazyWindow::LazyWindow(const BroadcastSpec& bc) : bc_(&bc) {}

int LazyWindow::spin(Vertex v) {
  chain_.clear();
  Vertex u = v;
  while (memo_.find(u) == memo_.end() && bc_->geom.depth_of(u) > 0) {
    chain_.push_back(u);
    u = bc_->geom.parent(u);
  }
  int cur;
  const auto it = memo_.find(u);
  if (it != memo_.end()) {
    cur = it->second;
  } else {
    cur = root_spin(*bc_);
    memo_.emplace(u, cur);
  }
  for (auto rit = chain_.rbegin(); rit != chain_.rend(); ++rit) {
    cur = child_spin(*bc_, cur, *rit);
    memo_.emplace(*rit, cur);
  }
  return cur;
}

ConfigWindow broadcast(const BroadcastSpec& bc, const std::vector<Vertex>& region) {
  std::vector<Vertex> verts = region;
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  LazyWindow lw(bc);
  ConfigWindow out;
  out.verts = std::move(verts);
  out.spins.reserve(out.verts.size());
  for (Vertex v : out.verts) out.spins.push_back(static_cast<std::uint8_t>(lw.spin(v)));
  return out;
}

std::vector<std::uint8_t> broadcast_levels(const BroadcastSpec& bc, int kmax) {
  if (kmax < 0 || kmax > bc.geom.max_depth())
    throw config_error("broadcast_levels: depth outside geometry");
  const std::int64_t total = bc.geom.ball_size(kmax);
  std::vector<std::uint8_t> spins(static_cast<size_t>(total));
  spins[0] = static_cast<std::uint8_t>(root_spin(bc));
  for (Vertex v = 1; v < total; ++v)
    spins[static_cast<size_t>(v)] = static_cast<std::uint8_t>(
        child_spin(bc, spins[static_cast<size_t>(bc.geom.parent(v))], v));
  return spins;
}

ConfigWindow broadcast_sphere(const BroadcastSpec& bc, int k) {
  const std::vector<std::uint8_t> spins = broadcast_levels(bc, k);
  const Vertex lo = bc.geom.sphere_begin(k);
  const std::int64_t ss = bc.geom.sphere_size(k);
  ConfigWindow out;
  out.verts.resize(static_cast<size_t>(ss));
  out.spins.resize(static_cast<size_t>(ss));
  for (std::int64_t p = 0; p < ss; ++p) {
    out.verts[static_cast<size_t>(p)] = lo + p;
    out.spins[static_cast<size_t>(p)] = spins[static_cast<size_t>(lo + p)];
  }
  return out;
}

BadEventReport detect_bad(LazyWindow& w, const ModelSpec& spec, Vertex v, int L,
                          std::int64_t max_sets) {
  const BallGeometry& geom = w.spec().geom;
  const double delta = delta0(spec);
  BadEventReport rep;
  rep.v = v;
  rep.L = L;
  enumerate_connected(
      geom, v, L,
      [&](const std::vector<Vertex>& gamma) {
        if (rep.found && static_cast<int>(gamma.size()) >= rep.min_size) return;
        std::int64_t broken = 0;
        const auto edges = attached_edges(geom, gamma);
        for (const Edge& e : edges)
          if (w.spin(e.a) != w.spin(e.b)) ++broken;
        const double ratio = static_cast<double>(broken) / static_cast<double>(gamma.size());
        if (ratio >= delta) {
          rep.found = true;
          rep.min_size = static_cast<int>(gamma.size());
          rep.witness = gamma;
          rep.ratio = ratio;
        }
      },
      max_sets);
  return rep;
}

ExpMomentReport exp_moment_check(const ModelSpec& spec, const ChainKernel& kernel,
                                 const BallGeometry& geom, const std::vector<Vertex>& gamma,
                                 double t, std::int64_t n, std::uint64_t seed) {
  if (t < 0) throw config_error("exp_moment_check: t must be nonnegative");
  if (gamma.empty()) throw config_error("exp_moment_check: empty gamma");
  if (n < 2) throw config_error("exp_moment_check: need at least 2 samples");
  const auto edges = attached_edges(geom, gamma);

  ExpMomentReport rep;
  rep.t = t;
  rep.n = n;
  rep.rhs = std::pow(kernel.p1 * std::exp(t) + 1.0 - kernel.p1,
                     (geom.d() + 1.0) * static_cast<double>(gamma.size()));
  rep.holds = true;
  for (int a = 0; a < spec.q; ++a) {
    double s1 = 0, s2 = 0;
    BroadcastSpec bc{kernel, geom, 0, kTagOmega, a};
    for (std::int64_t r = 0; r < n; ++r) {
      bc.master_seed = derive_seed(seed, kTagReplica, static_cast<std::uint64_t>(r));
      LazyWindow lw(bc);
      std::int64_t broken = 0;
      for (const Edge& e : edges)
        if (lw.spin(e.a) != lw.spin(e.b)) ++broken;
      const double x = std::exp(t * static_cast<double>(broken));
      s1 += x;
      s2 += x * x;
    }
    const double mean = s1 / static_cast<double>(n);
    const double var = std::max(0.0, (s2 - s1 * mean) / static_cast<double>(n - 1));
    const double se = std::sqrt(var / static_cast<double>(n));
    rep.lhs.push_back(mean);
    rep.se.push_back(se);
    if (mean > rep.rhs * (1.0 + 5.0 * se / mean)) rep.holds = false;
  }
  return rep;
}

}  // namespace treegibbs
