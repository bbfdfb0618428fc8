#ifndef SEQPRIOR_RNG_HPP_
#define SEQPRIOR_RNG_HPP_

#include <cstdint>
#include <random>

namespace seqprior {

using Rng = std::mt19937_64;

// splitmix64 step; used to decorrelate seeds derived from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream: deterministic in (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace seqprior

#endif  // SEQPRIOR_RNG_HPP_
