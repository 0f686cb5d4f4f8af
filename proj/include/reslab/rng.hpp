#pragma once

#include <cmath>
#include <cstdint>

namespace reslab {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Streams are split by construction: the 64-bit key carries the master seed,
// counter words 2..3 carry the path index and words 0..1 the block index
// within the path. Distinct path indices therefore address disjoint counter
// blocks of one fixed bijection, so per-path streams cannot overlap no matter
// how many blocks each path consumes (up to 2^64).
struct Philox4x32 {
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static void round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t out[4] = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    ctr[0] = out[0];
    ctr[1] = out[1];
    ctr[2] = out[2];
    ctr[3] = out[3];
  }

  // 10 rounds with Weyl key schedule.
  static void block(std::uint64_t seed, std::uint64_t path, std::uint64_t blk,
                    std::uint32_t out[4]) {
    std::uint32_t key[2] = {static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
    out[0] = static_cast<std::uint32_t>(blk);
    out[1] = static_cast<std::uint32_t>(blk >> 32);
    out[2] = static_cast<std::uint32_t>(path);
    out[3] = static_cast<std::uint32_t>(path >> 32);
    for (int r = 0; r < 10; ++r) {
      round(out, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
  }
};

// One reproducible random stream per simulated path, indexed by
// (master_seed, path_id). Results do not depend on thread scheduling.
class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::uint64_t path_id)
      : seed_(master_seed), path_(path_id) {}

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      Philox4x32::block(seed_, path_, block_++, buf_);
      idx_ = 0;
    }
    return buf_[idx_++];
  }

  // Uniform on (0, 1]: never returns 0, so logs are safe.
  double next_uniform() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    const std::uint64_t bits = (hi << 21) ^ (lo >> 11);  // 53 bits
    return (static_cast<double>(bits & ((1ull << 53) - 1)) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; deterministic for a fixed call sequence.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Exp(1) variate.
  double next_exponential() { return -std::log(next_uniform()); }

 private:
  std::uint64_t seed_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int idx_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace reslab
