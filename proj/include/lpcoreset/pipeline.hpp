#pragma once

#include "lpcoreset/flatten.hpp"
#include "lpcoreset/sampling.hpp"

namespace lpcs {

/// Offline strong-coreset construction. For p < 2 the matrix is first
/// flattened against a bicriteria subspace; then rounds of root ridge
/// leverage score sampling run until the working set is at most
/// target_size, max_rounds is reached, or a round fails to shrink it.
/// A round that drops every row is retried with a fresh derived seed up to
/// three times before failing. Scales compose back to original rows.
WeightedCoreset build_strong_coreset(const DenseMatrix& m, SamplerConfig cfg);

/// Concatenates two coresets over the same dataset and exponent p. Costs
/// add exactly; ordering is c1's rows then c2's.
WeightedCoreset merge(const WeightedCoreset& c1, const WeightedCoreset& c2);

/// Re-runs the offline construction on the materialized coreset. Output
/// indices still reference the original dataset; a coreset already within
/// the target size is returned unchanged.
WeightedCoreset reduce(const DenseMatrix& original, const WeightedCoreset& c,
                       SamplerConfig cfg);

}  // namespace lpcs
