#include "vqrate/rng.hpp"

#include <cmath>
#include <numbers>

namespace vqrate {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
__extension__ using u128 = unsigned __int128;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : key_(mix64(mix64(seed + kGolden) ^ (stream_id * kGolden + 0x632be59bd9b4e019ULL))) {}

Stream Stream::split(std::uint64_t child) const noexcept {
  Stream s;
  s.key_ = mix64(key_ ^ mix64(child + 0xd1b54a32d192ed03ULL));
  s.counter_ = 0;
  return s;
}

Stream::result_type Stream::operator()() noexcept {
  const std::uint64_t c = counter_++;
  // Two rounds of the splitmix finalizer over (counter, key).
  return mix64(mix64(c * kGolden + key_) ^ (key_ >> 17 | key_ << 47));
}

double Stream::uniform() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() noexcept {
  // Box-Muller, one output per pair of uniforms so the draw count is fixed.
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::below(std::uint64_t bound) noexcept {
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = (*this)();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace vqrate
