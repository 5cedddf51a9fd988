#pragma once

#include <cstdint>

namespace zdq {

// Counter-based random stream. Draw i of a stream with key k is
// splitmix64(k + i * golden), so a draw depends only on (key, position).
// Child streams are derived by hashing the parent key with a stream id;
// paths and tasks get their own children, which keeps results independent
// of how work is scheduled.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  RandomStream split(std::uint64_t id) const;

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();

  // Standard normal by Box-Muller; always consumes exactly two draws.
  double normal();

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

  friend bool operator==(const RandomStream&, const RandomStream&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace zdq
