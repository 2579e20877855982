#ifndef COPROMPT_CORE_RNG_HPP_
#define COPROMPT_CORE_RNG_HPP_

#include <array>
#include <cstdint>

namespace coprompt {

// Avalanching 2-input mixer (splitmix64 finalizer). Used to derive named
// substreams and per-episode seeds from the single run seed, so every
// random decision is a pure function of (run_seed, stream, counters) and
// never of execution order.
uint64_t mix_seed(uint64_t seed, uint64_t tag);

// Stream tags. Chained through mix_seed, e.g.
//   Rng(mix_seed(mix_seed(mix_seed(seed, kRolloutStream), iteration), episode))
namespace streams {
inline constexpr uint64_t kInit = 0x11;
inline constexpr uint64_t kRollout = 0x22;
inline constexpr uint64_t kEval = 0x33;
inline constexpr uint64_t kOpponent = 0x44;
inline constexpr uint64_t kShuffle = 0x55;
inline constexpr uint64_t kPrompt = 0x66;
}  // namespace streams

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform double in [0, 1), 53-bit resolution.
  double next_double();

  // Uniform integer in [0, n), n >= 1.
  uint32_t next_below(uint32_t n);

  double next_uniform(double lo, double hi);

  // Independent stream derived from this generator's seed (not its state).
  Rng child(uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::array<uint64_t, 4> state_;
};

}  // namespace coprompt

#endif  // COPROMPT_CORE_RNG_HPP_
