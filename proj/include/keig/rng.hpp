#pragma once

// Counter-based random streams (Philox 4x32, 10 rounds). Every random draw in
// the library comes from a stream addressed by (run seed, purpose, time index,
// unit index), so results are bit-identical regardless of thread count or
// evaluation order. The generator satisfies UniformRandomBitGenerator and can
// drive the <random> distributions directly.

#include <array>
#include <cstdint>

namespace keig {

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
  const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
  const std::array<std::uint32_t, 4> out{
      static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0,
      static_cast<std::uint32_t>(p1),
      static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1,
      static_cast<std::uint32_t>(p0),
  };
  c = out;
}

}  // namespace detail

// One 128-bit block of Philox4x32-10 output.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::uint32_t key0, std::uint32_t key1) {
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(ctr, key0, key1);
    key0 += 0x9E3779B9u;  // Weyl increments between rounds
    key1 += 0xBB67AE85u;
  }
  return ctr;
}

// Disjoint roles keep streams from ever colliding across algorithm phases.
enum class StreamPurpose : std::uint32_t {
  init = 0,       // initial ensemble draws
  selection = 1,  // multinomial ancestor choices
  mutation = 2,   // kernel moves
  chain = 3,      // twisted-chain sampling
  naive = 4,      // direct Monte Carlo replicates
  twisted = 5,    // grid twisted-kernel replicates
  scratch = 6,    // tests and ad-hoc draws
};

class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint32_t time_index,
            std::uint32_t unit)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        base_{0u, static_cast<std::uint32_t>(purpose), time_index, unit} {}

  static constexpr result_type min() { return 0u; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (idx_ == 4) refill();
    return buf_[idx_++];
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>((((hi << 32) | lo) >> 11)) * 0x1.0p-53;
  }

 private:
  void refill() {
    std::array<std::uint32_t, 4> c = base_;
    c[0] = block_++;
    buf_ = philox4x32(c, key0_, key1_);
    idx_ = 0;
  }

  std::uint32_t key0_, key1_;
  std::array<std::uint32_t, 4> base_;
  std::array<std::uint32_t, 4> buf_{};
  std::uint32_t block_ = 0;
  int idx_ = 4;
};

}  // namespace keig
