#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "treegibbs/common.hpp"

namespace treegibbs {

using Vertex = std::int64_t;

// Ball of interior depth n in the (d+1)-regular rooted tree: the root has d+1
// children, every other vertex d. Addresses are level order; sphere k occupies
// the contiguous range [sphere_begin(k), sphere_begin(k+1)). Addresses are
// valid through depth n+1 (the boundary sphere). Everything is arithmetic;
// no adjacency is materialised.
class BallGeometry {
 public:
  BallGeometry(int d, int depth);

  int d() const { return d_; }
  int depth() const { return depth_; }  // interior depth n
  int max_depth() const { return depth_ + 1; }

  std::int64_t sphere_size(int k) const;  // |S_k| = (d+1) d^{k-1}, |S_0| = 1
  std::int64_t ball_size(int k) const;    // |B_k|
  Vertex sphere_begin(int k) const;
  int depth_of(Vertex v) const;
  std::int64_t position_of(Vertex v) const;
  Vertex at(int k, std::int64_t pos) const;

  Vertex parent(Vertex v) const;  // throws config_error on the root
  int child_count(Vertex v) const;
  Vertex child(Vertex v, int j) const;
  // Parent first (absent for the root), then children in order.
  void neighbors(Vertex v, std::vector<Vertex>& out) const;

  // k-th vertex of a downward ray from the root. Seed 0 is the canonical
  // leftmost ray; other seeds pick a pseudo-random child at every level so
  // independence of results from the branch choice can be checked.
  Vertex ray_vertex(int k, std::uint64_t direction_seed = 0) const;

  std::string address_string(Vertex v) const;  // "0.2.1.1"

 private:
  int d_;
  int depth_;
  std::vector<std::int64_t> offsets_;  // sphere_begin for k = 0..max_depth+1
};

// n^2 vertices along one ray; |v_{i+1}| - |v_i| = spacings[i].
struct BranchPlan {
  std::vector<Vertex> vertices;
  std::vector<int> depths;
  std::vector<int> spacings;
  std::uint64_t direction_seed = 0;
};

BranchPlan branch_plan(const BallGeometry& geom, int n, const std::vector<int>& spacings,
                       std::uint64_t direction_seed = 0);
// Default spacing r_i = 2^{ceil(i/4)}, i = 1-based.
std::vector<int> default_spacings(int count);
// Largest n such that the n^2-vertex plan with the given spacings stays within
// interior depth `depth` (0 if even a single vertex does not fit).
int max_plan_n(int depth, const std::vector<int>& spacings);

// Explicit finite configuration window: sorted unique vertices with spins.
struct ConfigWindow {
  std::vector<Vertex> verts;        // ascending
  std::vector<std::uint8_t> spins;  // parallel to verts

  int find(Vertex v) const;              // index, or -1
  std::uint8_t at(Vertex v) const;       // throws config_error on a miss
  void set(Vertex v, std::uint8_t s);    // insert or overwrite, keeps order
  size_t size() const { return verts.size(); }
};

// Throws config_error on duplicate vertices or spins outside [0,q).
void validate_window(const ConfigWindow& w, int q);

struct Edge {
  Vertex a, b;  // a = parent(b)
  bool operator==(const Edge& o) const { return a == o.a && b == o.b; }
};

// All tree edges meeting gamma (E(gamma)). Requires every gamma vertex at
// interior depth (<= geom.depth()) so no incident edge is clipped; the outer
// endpoints may lie on the boundary sphere. |E(gamma)| <= (d+1)|gamma|.
std::vector<Edge> attached_edges(const BallGeometry& geom, const std::vector<Vertex>& gamma);

// Broken bonds D(omega) restricted to edges with both endpoints in the window.
std::vector<Edge> broken_bonds(const BallGeometry& geom, const ConfigWindow& w);

// Connected subsets containing v of size <= lmax, each emitted exactly once.
// Aborts with guard_error when more than max_sets subsets would be emitted.
void enumerate_connected(const BallGeometry& geom, Vertex v, int lmax,
                         const std::function<void(const std::vector<Vertex>&)>& emit,
                         std::int64_t max_sets = 10'000'000);

// Count by size, same guard.
std::vector<std::int64_t> count_connected(const BallGeometry& geom, Vertex v, int lmax,
                                          std::int64_t max_sets = 10'000'000);

}  // namespace treegibbs
