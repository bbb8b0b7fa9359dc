#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "treegibbs/rng.hpp"

using namespace treegibbs;

TEST_CASE("mix64 is a fixed bijective-style mixer") {
  CHECK(mix64(0x123456789abcdef0ull) == mix64(0x123456789abcdef0ull));
  CHECK(mix64(1) != mix64(2));
  // avalanche sanity: flipping one input bit flips many output bits
  int flips = __builtin_popcountll(mix64(42) ^ mix64(43));
  CHECK(flips >= 16);
  CHECK(flips <= 48);
}

TEST_CASE("streams are pure functions of (seed, id, counter)") {
  Stream a(7, kTagOmega), b(7, kTagOmega), c(7, kTagSigma), d(8, kTagOmega);
  CHECK(a.word(0) == b.word(0));
  CHECK(a.word(5) == b.word(5));
  CHECK(a.word(0) != c.word(0));
  CHECK(a.word(0) != d.word(0));
  CHECK(a.word(0) != a.word(1));
  CHECK(a.uniform(3) == b.uniform(3));
}

TEST_CASE("derive_seed separates replica streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(derive_seed(1, kTagReplica, r));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, kTagReplica, 3) == derive_seed(1, kTagReplica, 3));
  CHECK(derive_seed(1, kTagReplica, 3) != derive_seed(2, kTagReplica, 3));
}

TEST_CASE("vertex_uniform is reproducible and tag-separated") {
  CHECK(vertex_uniform(9, kTagOmega, 12345) == vertex_uniform(9, kTagOmega, 12345));
  CHECK(vertex_uniform(9, kTagOmega, 12345) != vertex_uniform(9, kTagOmegaAlt, 12345));
  for (std::int64_t v = 0; v < 200; ++v) {
    double u = vertex_uniform(9, kTagOmega, v);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniforms look uniform") {
  Stream s(2024, 0x99);
  double sum = 0, sum2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform(static_cast<std::uint64_t>(i));
    sum += u;
    sum2 += u * u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
  CHECK(std::abs(sum2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("sample_categorical is the inverse CDF") {
  std::vector<double> p{0.25, 0.5, 0.25};
  CHECK(sample_categorical(p.data(), 3, 0.0) == 0);
  CHECK(sample_categorical(p.data(), 3, 0.2499) == 0);
  CHECK(sample_categorical(p.data(), 3, 0.25) == 1);
  CHECK(sample_categorical(p.data(), 3, 0.7499) == 1);
  CHECK(sample_categorical(p.data(), 3, 0.75) == 2);
  CHECK(sample_categorical(p.data(), 3, 0.9999) == 2);
  // degenerate tail: u numerically 1 still lands on the last state
  CHECK(sample_categorical(p.data(), 3, 1.0) == 2);
}

TEST_CASE("CounterRng walks the stream in counter order") {
  Stream s(11, 0x5);
  CounterRng r(11, 0x5);
  CHECK(r.next_word() == s.word(0));
  CHECK(r.next_word() == s.word(1));
  CHECK(r.next_uniform() == s.uniform(2));
}
