#pragma once

#include <cstdint>
#include <random>

namespace abstain {

// SplitMix64 mixing step. Used to whiten user seeds and to derive
// independent per-stream / per-chunk seeds from a single master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for chunk `chunk` of stream `stream` under `master`. Chunked
// consumers get identical draws no matter how chunks are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t chunk) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (0xd6e8feb86659fd93ULL * (stream + 1)));
  s = splitmix64(s ^ (0xa0761d6478bd642fULL * (chunk + 1)));
  return s;
}

// mt19937_64 is fully specified by the standard, so draws are identical
// across platforms and compilers.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  /// Uniform draw strictly inside (0,1).
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t next_u64() { return gen_(); }

private:
  std::mt19937_64 gen_;
};

}  // namespace abstain
