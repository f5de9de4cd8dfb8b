#pragma once

#include <cstdint>
#include <numbers>
#include <random>

#include "adaptrack/linalg.hpp"

namespace adaptrack {

using Rng = std::mt19937_64;

/// Independent stream for item `index` under a master seed.
inline Rng substream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return Rng(seq);
}

inline Complex random_unit_complex(Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  return std::polar(1.0, phase(rng));
}

inline CVector random_unit_vector(Index n, Rng& rng) {
  CVector v(n);
  for (Index k = 0; k < n; ++k) v(k) = random_unit_complex(rng);
  return v;
}

inline CMatrix random_unit_matrix(Index rows, Index cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = random_unit_complex(rng);
  return m;
}

}  // namespace adaptrack
