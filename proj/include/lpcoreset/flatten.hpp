#pragma once

#include <cstdint>
#include <vector>

#include "lpcoreset/core.hpp"

namespace lpcs {

/// t x d sparse embedding: every column has exactly s nonzeros at uniform
/// distinct positions with values +-1/sqrt(s). Deterministic per seed.
DenseMatrix sparse_embedding(Index d, Index t, Index s, std::uint64_t seed);

struct BicriteriaResult {
  SubspaceQuery subspace;
  double residual_cost = 0.0;          // (p,2)-norm^p of the residual
  std::vector<std::int64_t> sampled_rows;  // deduplicated row indices
  Index sketch_dim = 0;
  Index sketch_sparsity = 0;
};

/// Constant-factor bicriteria subspace for p in [1,2]: sketches the rows
/// with a sparse embedding, samples rows proportionally to the lp Lewis
/// weights of the sketched matrix, and returns an orthonormal basis of the
/// span of the sampled rows together with its residual cost.
BicriteriaResult bicriteria_subspace(const DenseMatrix& m, double p, Index k,
                                     double delta, std::uint64_t seed);

/// Splits every row whose residual cost share against `f` exceeds 2/n of
/// the total into l = ceil(n * share / 2) copies with weight w / l^{1/p}.
/// The objective of every query subspace is preserved exactly, the output
/// has at most 1.5x the rows, and afterwards every row's cost share against
/// `f` is at most 2/n (n = input row count). Zero residual cost returns the
/// input unchanged.
DenseMatrix flatten(const DenseMatrix& m, const SubspaceQuery& f, double p);

}  // namespace lpcs
