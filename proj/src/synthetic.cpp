#include "lpcoreset/synthetic.hpp"

#include <cmath>

#include "lpcoreset/rng.hpp"

namespace lpcs {

DenseMatrix synthetic_low_rank(Index n, Index d, Index planted_rank,
                               double noise_sigma, bool heavy_tail,
                               std::uint64_t seed) {
  if (n < 1 || d < 1 || planted_rank < 1 || planted_rank > d)
    throw std::invalid_argument("synthetic_low_rank: bad shape");
  Rng rng(hash_combine(seed, 0x10ull));
  Mat left(n, planted_rank);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < planted_rank; ++j) left(i, j) = rng.normal();
  Mat right(planted_rank, d);
  for (Index i = 0; i < planted_rank; ++i)
    for (Index j = 0; j < d; ++j) right(i, j) = rng.normal();

  Mat data = left * right / std::sqrt(static_cast<double>(planted_rank));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) data(i, j) += noise_sigma * rng.normal();

  if (heavy_tail) {
    for (Index i = 0; i < n; ++i)
      data.row(i) *= 1.0 / std::sqrt(rng.uniform());  // Pareto(2) row scale
  }
  return DenseMatrix::from(std::move(data));
}

}  // namespace lpcs
