#pragma once

#include <cstdint>
#include <limits>

namespace vqrate {

// Counter-based random stream. The state is a (key, counter) pair and the
// n-th output is a pure function of (key, n), so streams can be split into
// independent children without sharing any mutable state.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream() = default;
  explicit Stream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  // Child stream keyed by (this key, child). Does not advance this stream.
  [[nodiscard]] Stream split(std::uint64_t child) const noexcept;

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1), 53 random bits.
  double uniform() noexcept;
  double normal() noexcept;
  // Unbiased integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  friend bool operator==(const Stream&, const Stream&) = default;

 private:
  std::uint64_t key_ = 0x853c49e6748fea9bULL;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

}  // namespace vqrate
