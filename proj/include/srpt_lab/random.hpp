#ifndef SRPT_LAB_RANDOM_HPP
#define SRPT_LAB_RANDOM_HPP

#include <bit>
#include <cstdint>
#include <random>

namespace srpt_lab {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream identifiers mixed into derived seeds.
enum class StreamTag : std::uint64_t {
  Interarrival = 1,
  ProcessingTime = 2,
  Brownian = 3,
};

/// seed = hash(base_seed, r, replication, tag); r enters by bit pattern.
inline std::uint64_t derive_seed(std::uint64_t base, double r,
                                 std::uint64_t replication,
                                 StreamTag tag) noexcept {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ std::bit_cast<std::uint64_t>(r));
  h = splitmix64(h ^ replication);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  return h;
}

/// Uniform variates strictly inside (0,1) from 53 random bits. The mapping is
/// fixed here so streams are reproducible across standard libraries.
class UniformStream {
public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 &engine() noexcept { return engine_; }

private:
  std::mt19937_64 engine_;
};

} // namespace srpt_lab

#endif // SRPT_LAB_RANDOM_HPP
