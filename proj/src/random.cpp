#include "zdq/random.hpp"

#include <cmath>
#include <numbers>

namespace zdq {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream RandomStream::split(std::uint64_t id) const {
  return RandomStream(splitmix64(key_ ^ splitmix64(id ^ 0x5851f42d4c957f2dULL)));
}

std::uint64_t RandomStream::next_u64() { return splitmix64(key_ + (counter_++) * kGolden); }

double RandomStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace zdq
