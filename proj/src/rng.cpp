#include "ric/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ric {

std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return hash_mix(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
}

Rng Rng::substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = hash_mix(seed);
  for (std::uint64_t p : path) h = hash_combine(h, p);
  return Rng(h);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // Rejection strip to kill modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::gamma(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("Rng::gamma: alpha must be positive");
  if (alpha < 1.0) {
    const double boost = std::pow(uniform01(), 1.0 / alpha);
    return gamma(alpha + 1.0) * boost;
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Eigen::ArrayXd Rng::dirichlet(const Eigen::ArrayXd& alpha) {
  Eigen::ArrayXd g(alpha.size());
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    // Floor keeps samples strictly interior even for tiny concentrations,
    // where Gamma draws can underflow to subnormal/zero.
    g[k] = std::max(gamma(alpha[k]), 1e-290);
  }
  return g / g.sum();
}

std::string Rng::state_string() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

void Rng::set_state(const std::string& s) {
  std::istringstream is(s);
  is >> gen_;
  if (is.fail()) throw std::runtime_error("Rng::set_state: malformed state string");
}

}  // namespace ric
