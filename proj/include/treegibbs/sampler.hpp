#pragma once
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "treegibbs/boundary_law.hpp"
#include "treegibbs/model.hpp"
#include "treegibbs/rng.hpp"
#include "treegibbs/tree.hpp"

namespace treegibbs {

// Broadcast of a chain kernel over the implicit tree. The uniform driving any
// vertex is a pure function of (master_seed, tag, address), so spins are
// queryable lazily and reproduce exactly however much of the configuration is
// materialised.
struct BroadcastSpec {
  ChainKernel kernel;
  BallGeometry geom;
  std::uint64_t master_seed = 0;
  std::uint64_t tag = kTagOmega;
  int root_condition = -1;  // fixed root spin, or -1 to draw from the marginal
};

// Memoising lazy view of one broadcast configuration.
class LazyWindow {
 public:
  explicit LazyWindow(const BroadcastSpec& bc);
  int spin(Vertex v);
  const BroadcastSpec& spec() const { return *bc_; }

 private:
  const BroadcastSpec* bc_;
  std::unordered_map<Vertex, int> memo_;
  std::vector<Vertex> chain_;
};

ConfigWindow broadcast(const BroadcastSpec& bc, const std::vector<Vertex>& region);
// Dense spins of the closed ball B_kmax in level order.
std::vector<std::uint8_t> broadcast_levels(const BroadcastSpec& bc, int kmax);
// The whole sphere S_k as a window.
ConfigWindow broadcast_sphere(const BroadcastSpec& bc, int k);

// Truncated bad-event detector: first connected gamma containing v with
// |gamma| <= L and |D(omega) cap E(gamma)| >= delta0 |gamma|, smallest support
// first. found implies ratio >= delta0.
struct BadEventReport {
  Vertex v = 0;
  int L = 0;
  bool found = false;
  int min_size = 0;  // smallest witness size, 0 when not found
  std::vector<Vertex> witness;
  double ratio = 0;
};

BadEventReport detect_bad(LazyWindow& w, const ModelSpec& spec, Vertex v, int L,
                          std::int64_t max_sets = 10'000'000);

// Monte Carlo check of the edge-factorised exponential moment bound
// E[e^{t |D(omega) cap E(gamma)|} | sigma_0 = a] <= (p1 e^t + 1 - p1)^{(d+1)|gamma|}
// for every conditioning spin a. t >= 0.
struct ExpMomentReport {
  double t = 0;
  double rhs = 0;
  std::vector<double> lhs;     // per conditioning spin
  std::vector<double> se;      // standard errors of lhs
  std::int64_t n = 0;
  bool holds = false;  // each lhs <= rhs * (1 + 5 * se/lhs)
};

ExpMomentReport exp_moment_check(const ModelSpec& spec, const ChainKernel& kernel,
                                 const BallGeometry& geom, const std::vector<Vertex>& gamma,
                                 double t, std::int64_t n, std::uint64_t seed);

}  // namespace treegibbs
