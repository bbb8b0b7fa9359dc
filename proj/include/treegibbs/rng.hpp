#pragma once
#include <cstdint>

namespace treegibbs {

// Counter-based keyed generator. Every draw is a pure function of
// (seed, stream id, counter), so any vertex's randomness can be reproduced at
// any time without storing generator state. Mixing is the splitmix64
// finalizer over a Weyl sequence; distinct ids give decorrelated streams.

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Stream domains. Keeps omega broadcasts, interior sampling and replica
// seed derivation from ever sharing a stream.
enum StreamTag : std::uint64_t {
  kTagReplica = 0x01,
  kTagOmega = 0x02,
  kTagOmegaAlt = 0x03,  // the independent omega' broadcast in mismatched mode
  kTagSigma = 0x04,     // interior conditional sampling
  kTagSigmaAlt = 0x05,  // interior sampling against the omega' boundary
};

struct Stream {
  std::uint64_t key;

  Stream(std::uint64_t seed, std::uint64_t id)
      : key(mix64(mix64(seed ^ 0x243F6A8885A308D3ull) +
                  0x9E3779B97F4A7C15ull * id)) {}

  std::uint64_t word(std::uint64_t ctr) const {
    return mix64(key + 0xD1B54A32D192ED03ull * ctr);
  }
  double uniform(std::uint64_t ctr) const {
    return static_cast<double>(word(ctr) >> 11) * 0x1.0p-53;
  }
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag,
                                 std::uint64_t index) {
  return Stream(seed, tag).word(index);
}

// Single uniform attached to (seed, tag, vertex address): the per-vertex
// stream of a broadcast.
inline double vertex_uniform(std::uint64_t seed, std::uint64_t tag,
                             std::int64_t address) {
  return Stream(seed ^ mix64(tag), static_cast<std::uint64_t>(address))
      .uniform(0);
}

// Inverse-CDF draw from q probabilities; deterministic in u.
inline int sample_categorical(const double* p, int q, double u) {
  double acc = 0.0;
  for (int i = 0; i < q - 1; ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return q - 1;
}

// Stateful convenience wrapper when a consumer just wants consecutive draws.
struct CounterRng {
  Stream stream;
  std::uint64_t ctr = 0;
  CounterRng(std::uint64_t seed, std::uint64_t id) : stream(seed, id) {}
  std::uint64_t next_word() { return stream.word(ctr++); }
  double next_uniform() { return stream.uniform(ctr++); }
};

}  // namespace treegibbs
