#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace nnghmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using Rng = std::mt19937_64;

// Independent, reproducible streams derived from one user seed.
enum class Stream : std::uint64_t {
  momentum = 1,
  metropolis = 2,
  minibatch = 3,
  init = 4,
  training = 5,
  probe = 6,
  data = 7,
  perturbation = 8,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t salt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(salt & 0xffffffffu),
                    static_cast<std::uint32_t>(salt >> 32)};
  return Rng(seq);
}

inline Vector standard_normal(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace nnghmc
