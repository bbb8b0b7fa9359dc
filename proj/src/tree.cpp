#include "treegibbs/tree.hpp"

#include <algorithm>
#include <cmath>

#include "treegibbs/rng.hpp"

namespace treegibbs {

BallGeometry::BallGeometry(int d, int depth) : d_(d), depth_(depth) {
  if (d < 2) throw config_error("ball geometry needs d >= 2");
  if (depth < 0) throw config_error("ball depth must be nonnegative");
  // Addresses must stay well inside int64; |B_k| ~ (d+1) d^{k-1}.
  if (depth + 1 > 62.0 / std::log2(static_cast<double>(d)))
    throw guard_error("ball depth too large for 64-bit addressing");
  offsets_.resize(static_cast<size_t>(depth_) + 3);
  offsets_[0] = 0;
  std::int64_t size = 1, sphere = 1;
  for (int k = 1; k <= depth_ + 2; ++k) {
    offsets_[k] = size;
    sphere = (k == 1) ? d_ + 1 : sphere * d_;
    size += sphere;
  }
}

std::int64_t BallGeometry::sphere_size(int k) const {
  if (k < 0 || k > max_depth()) throw config_error("sphere depth out of range");
  if (k == 0) return 1;
  std::int64_t s = d_ + 1;
  for (int i = 1; i < k; ++i) s *= d_;
  return s;
}

std::int64_t BallGeometry::ball_size(int k) const {
  if (k < 0 || k > max_depth()) throw config_error("ball depth out of range");
  return offsets_[static_cast<size_t>(k) + 1];
}

Vertex BallGeometry::sphere_begin(int k) const {
  if (k < 0 || k > max_depth() + 1) throw config_error("sphere depth out of range");
  return offsets_[static_cast<size_t>(k)];
}

int BallGeometry::depth_of(Vertex v) const {
  if (v < 0 || v >= offsets_.back()) throw config_error("vertex address out of range");
  int k = 0;
  while (v >= offsets_[static_cast<size_t>(k) + 1]) ++k;
  return k;
}

std::int64_t BallGeometry::position_of(Vertex v) const {
  return v - sphere_begin(depth_of(v));
}

Vertex BallGeometry::at(int k, std::int64_t pos) const {
  if (pos < 0 || pos >= sphere_size(k)) throw config_error("sphere position out of range");
  return sphere_begin(k) + pos;
}

Vertex BallGeometry::parent(Vertex v) const {
  int k = depth_of(v);
  if (k == 0) throw config_error("root has no parent");
  std::int64_t pos = v - sphere_begin(k);
  if (k == 1) return 0;
  return sphere_begin(k - 1) + pos / d_;
}

int BallGeometry::child_count(Vertex v) const {
  int k = depth_of(v);
  if (k >= max_depth()) return 0;
  return k == 0 ? d_ + 1 : d_;
}

Vertex BallGeometry::child(Vertex v, int j) const {
  int k = depth_of(v);
  int nc = child_count(v);
  if (j < 0 || j >= nc) throw config_error("child index out of range");
  if (k == 0) return sphere_begin(1) + j;
  std::int64_t pos = v - sphere_begin(k);
  return sphere_begin(k + 1) + pos * d_ + j;
}

void BallGeometry::neighbors(Vertex v, std::vector<Vertex>& out) const {
  out.clear();
  int k = depth_of(v);
  if (k > 0) out.push_back(parent(v));
  int nc = child_count(v);
  for (int j = 0; j < nc; ++j) out.push_back(child(v, j));
}

Vertex BallGeometry::ray_vertex(int k, std::uint64_t direction_seed) const {
  if (k < 0 || k > max_depth()) throw config_error("ray depth out of range");
  if (direction_seed == 0) return sphere_begin(k);  // leftmost: child 0 at every level
  std::int64_t pos = 0;
  for (int lvl = 1; lvl <= k; ++lvl) {
    int branches = (lvl == 1) ? d_ + 1 : d_;
    int j = static_cast<int>(Stream(direction_seed, 0x52415953ull).word(lvl) % branches);
    pos = (lvl == 1) ? j : pos * d_ + j;
  }
  return sphere_begin(k) + pos;
}

std::string BallGeometry::address_string(Vertex v) const {
  std::vector<int> digits;
  Vertex cur = v;
  while (depth_of(cur) > 0) {
    Vertex p = parent(cur);
    int k = depth_of(cur);
    std::int64_t pos = cur - sphere_begin(k);
    digits.push_back(static_cast<int>(k == 1 ? pos : pos % d_));
    cur = p;
  }
  std::string s = "0";
  for (auto it = digits.rbegin(); it != digits.rend(); ++it)
    s += "." + std::to_string(*it);
  return s;
}

BranchPlan branch_plan(const BallGeometry& geom, int n, const std::vector<int>& spacings,
                       std::uint64_t direction_seed) {
  if (n < 1) throw config_error("plan needs n >= 1");
  size_t count = static_cast<size_t>(n) * n;
  if (spacings.size() + 1 < count)
    throw config_error("plan needs n^2-1 spacings");
  BranchPlan plan;
  plan.direction_seed = direction_seed;
  plan.spacings.assign(spacings.begin(), spacings.begin() + (count - 1));
  int depth = 0;
  plan.vertices.push_back(geom.ray_vertex(0, direction_seed));
  plan.depths.push_back(0);
  for (size_t i = 0; i + 1 < count; ++i) {
    if (spacings[i] < 1) throw config_error("plan spacings must be >= 1");
    depth += spacings[i];
    if (depth > geom.depth())
      throw config_error("plan exceeds interior depth of the ball");
    plan.vertices.push_back(geom.ray_vertex(depth, direction_seed));
    plan.depths.push_back(depth);
  }
  return plan;
}

std::vector<int> default_spacings(int count) {
  std::vector<int> r(static_cast<size_t>(std::max(count, 0)));
  for (int i = 1; i <= count; ++i) r[static_cast<size_t>(i) - 1] = 1 << ((i + 3) / 4);
  return r;
}

int max_plan_n(int depth, const std::vector<int>& spacings) {
  int n = 0, used_depth = 0;
  size_t idx = 0;
  for (int cand = 1;; ++cand) {
    size_t count = static_cast<size_t>(cand) * cand;
    while (idx + 1 < count) {
      if (idx >= spacings.size()) return n;
      used_depth += spacings[idx++];
    }
    if (used_depth > depth) return n;
    n = cand;
  }
}

int ConfigWindow::find(Vertex v) const {
  auto it = std::lower_bound(verts.begin(), verts.end(), v);
  if (it == verts.end() || *it != v) return -1;
  return static_cast<int>(it - verts.begin());
}

std::uint8_t ConfigWindow::at(Vertex v) const {
  int i = find(v);
  if (i < 0) throw config_error("window does not cover vertex " + std::to_string(v));
  return spins[static_cast<size_t>(i)];
}

void ConfigWindow::set(Vertex v, std::uint8_t s) {
  auto it = std::lower_bound(verts.begin(), verts.end(), v);
  size_t idx = static_cast<size_t>(it - verts.begin());
  if (it != verts.end() && *it == v) {
    spins[idx] = s;
    return;
  }
  verts.insert(it, v);
  spins.insert(spins.begin() + static_cast<std::ptrdiff_t>(idx), s);
}

void validate_window(const ConfigWindow& w, int q) {
  if (w.verts.size() != w.spins.size())
    throw config_error("window vertex/spin size mismatch");
  for (size_t i = 0; i + 1 < w.verts.size(); ++i) {
    if (w.verts[i] == w.verts[i + 1]) throw config_error("duplicate vertex in window");
    if (w.verts[i] > w.verts[i + 1]) throw config_error("window vertices must be sorted");
  }
  for (std::uint8_t s : w.spins)
    if (s >= q) throw config_error("window spin out of range");
}

std::vector<Edge> attached_edges(const BallGeometry& geom, const std::vector<Vertex>& gamma) {
  std::vector<Vertex> sorted = gamma;
  std::sort(sorted.begin(), sorted.end());
  auto in_gamma = [&](Vertex v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
  };
  std::vector<Edge> edges;
  for (Vertex v : sorted) {
    if (geom.depth_of(v) > geom.depth())
      throw config_error("attached_edges: gamma must be interior");
    if (geom.depth_of(v) > 0) edges.push_back({geom.parent(v), v});
    int nc = geom.child_count(v);
    for (int j = 0; j < nc; ++j) {
      Vertex c = geom.child(v, j);
      if (!in_gamma(c)) edges.push_back({v, c});  // child in gamma adds it as its parent edge
    }
  }
  return edges;
}

std::vector<Edge> broken_bonds(const BallGeometry& geom, const ConfigWindow& w) {
  std::vector<Edge> out;
  for (size_t i = 0; i < w.verts.size(); ++i) {
    Vertex v = w.verts[i];
    if (geom.depth_of(v) == 0) continue;
    Vertex p = geom.parent(v);
    int pi = w.find(p);
    if (pi < 0) continue;
    if (w.spins[static_cast<size_t>(pi)] != w.spins[i]) out.push_back({p, v});
  }
  return out;
}

namespace {
struct Enumerator {
  const BallGeometry& geom;
  int lmax;
  std::int64_t max_sets;
  std::int64_t emitted = 0;
  const std::function<void(const std::vector<Vertex>&)>& emit;
  std::vector<Vertex> current;
  std::vector<Vertex> scratch;

  // Connected supersets of `current`: grow through the sorted frontier, each
  // candidate forbidden for later branches at the same level, so every subset
  // comes out exactly once.
  void rec(std::vector<Vertex>& forbidden) {
    if (++emitted > max_sets) throw guard_error("connected-subset enumeration guard exceeded");
    emit(current);
    if (static_cast<int>(current.size()) == lmax) return;
    std::vector<Vertex> frontier;
    for (Vertex v : current) {
      geom.neighbors(v, scratch);
      for (Vertex w : scratch) {
        if (geom.depth_of(w) > geom.depth()) continue;  // subsets stay interior
        if (std::binary_search(current.begin(), current.end(), w)) continue;
        if (std::binary_search(forbidden.begin(), forbidden.end(), w)) continue;
        frontier.push_back(w);
      }
    }
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
    std::vector<Vertex> local_forbidden = forbidden;
    for (Vertex w : frontier) {
      current.insert(std::upper_bound(current.begin(), current.end(), w), w);
      rec(local_forbidden);
      current.erase(std::find(current.begin(), current.end(), w));
      local_forbidden.insert(
          std::upper_bound(local_forbidden.begin(), local_forbidden.end(), w), w);
    }
  }
};
}  // namespace

void enumerate_connected(const BallGeometry& geom, Vertex v, int lmax,
                         const std::function<void(const std::vector<Vertex>&)>& emit,
                         std::int64_t max_sets) {
  if (lmax < 1) throw config_error("enumerate_connected needs lmax >= 1");
  if (geom.depth_of(v) > geom.depth())
    throw config_error("enumerate_connected: v must be interior");
  Enumerator e{geom, lmax, max_sets, 0, emit, {v}, {}};
  std::vector<Vertex> forbidden;
  e.rec(forbidden);
}

std::vector<std::int64_t> count_connected(const BallGeometry& geom, Vertex v, int lmax,
                                          std::int64_t max_sets) {
  std::vector<std::int64_t> counts(static_cast<size_t>(lmax) + 1, 0);
  enumerate_connected(
      geom, v, lmax, [&](const std::vector<Vertex>& s) { ++counts[s.size()]; }, max_sets);
  return counts;
}

}  // namespace treegibbs
