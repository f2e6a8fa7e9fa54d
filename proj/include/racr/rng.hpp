#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace racr::rng {

/// splitmix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a, used to turn a purpose label into a key.
constexpr std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derive a child key from (seed, index, purpose). Streams keyed this way do
/// not depend on the order in which they are requested.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t index, std::string_view purpose) {
  return mix(mix(seed ^ hash_label(purpose)) + mix(index + 0x632be59bd9b4e019ULL));
}

using Engine = std::mt19937_64;

inline Engine stream(std::uint64_t seed, std::uint64_t index, std::string_view purpose) {
  return Engine(derive(seed, index, purpose));
}

inline Eigen::MatrixXd gaussian(Engine& engine, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(engine);
  return M;
}

}  // namespace racr::rng
