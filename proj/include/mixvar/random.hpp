#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace mixvar {

// SplitMix64 finalizer. Used to derive independent stream seeds from a
// single root seed: stream k of root r is seeded with
// splitmix64(r ^ splitmix64(k + 1)).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  return splitmix64(root ^ splitmix64(stream + 1));
}

// Random source shared by every sampler. Boost distributions are used
// instead of <random> ones because their algorithms are fixed, so a seed
// yields the same stream on every platform.
class Rng {
 public:
  using Engine = boost::random::mt19937_64;

  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  Rng split(std::uint64_t stream) { return Rng(derive_seed(engine_(), stream)); }

  double uniform() { return boost::random::uniform_01<double>()(engine_); }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    double u = 0.0;
    while (u == 0.0) u = uniform();
    return u;
  }

  double normal() { return boost::random::normal_distribution<double>()(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  // Gamma with shape k and scale theta.
  double gamma(double shape, double scale) {
    return boost::random::gamma_distribution<double>(shape, scale)(engine_);
  }

  // Inverse gamma with density proportional to x^{-shape-1} exp(-rate / x).
  double inv_gamma(double shape, double rate) { return rate / gamma(shape, 1.0); }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof, 1.0); }

  double beta(double a, double b) {
    return boost::random::beta_distribution<double>(a, b)(engine_);
  }

  // Standard Laplace, density 0.5 exp(-|x|).
  double laplace() {
    const double e = -std::log(uniform_open());
    return uniform() < 0.5 ? -e : e;
  }

  int uniform_int(int lo, int hi) {
    return boost::random::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
};

}  // namespace mixvar
