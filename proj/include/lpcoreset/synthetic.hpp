#pragma once

#include "lpcoreset/core.hpp"

namespace lpcs {

/// Planted low-rank data: L R^T / sqrt(r) plus i.i.d. Gaussian noise of the
/// given standard deviation. With heavy_tail, each row is additionally
/// scaled by a Pareto(2) factor to produce occasional large rows.
DenseMatrix synthetic_low_rank(Index n, Index d, Index planted_rank,
                               double noise_sigma, bool heavy_tail,
                               std::uint64_t seed);

}  // namespace lpcs
