#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace ric {

// Deterministic RNG with fully specified sampling algorithms. mt19937_64 is
// pinned by the standard and the transforms below avoid std::*_distribution,
// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Named substream: hash-chains the seed with a tag path so independent
  // consumers (per example, per epoch, ...) never share a stream.
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t raw() { return gen_(); }

  // Uniform on the open interval (0,1).
  double uniform01() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller (no cached spare; state is just gen_).
  double normal();

  // Gamma(alpha, 1), alpha > 0, Marsaglia-Tsang with the alpha < 1 boost.
  double gamma(double alpha);

  // Dirichlet draw by normalized gammas; strictly interior (coordinates
  // clamped away from exact zero before normalizing).
  Eigen::ArrayXd dirichlet(const Eigen::ArrayXd& alpha);

  std::string state_string() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 gen_;
};

// splitmix64; used for seed derivation and stable content hashing.
std::uint64_t hash_mix(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

}  // namespace ric
