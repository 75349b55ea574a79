#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace scanreg {

/// Engine behind every random draw in the library. Boost's mt19937_64 and
/// Boost.Random distributions are implemented in headers with fixed
/// algorithms, so draws are identical on every platform (unlike the
/// implementation-defined std:: distributions).
using Engine = boost::random::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream `index` of master seed `seed`: the engine is seeded with
/// splitmix64(splitmix64(seed) ^ splitmix64(index + golden)). Streams depend
/// only on (seed, index), never on which thread consumes them.
inline Engine make_stream(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t s = splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return Engine(s);
}

}  // namespace scanreg
