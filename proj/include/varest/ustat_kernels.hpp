#pragma once

// Closed-form evaluation of distinct-index sums. Every sum written as
// Σ_{i1≠i2} or Σ_{i1≠i2≠i3} (all indices pairwise distinct) is reduced to
// per-index power sums, turning O(n²)/O(n³) loops into O(n).

#include "varest/core_model.hpp"

namespace varest {

using VectorRef = Eigen::Ref<const Vector>;

/// Σ_{i1≠i2} u_{i1} v_{i2}.
double pair_sum_distinct(const VectorRef& u, const VectorRef& v);

/// Σ over pairwise-distinct (i1, i2, i3) of u_{i1} v_{i2} w_{i3}. Requires n >= 3.
double triple_sum_distinct(const VectorRef& u, const VectorRef& v, const VectorRef& w);

/// Gram matrix of the rows of W, g[i1][i2] = W_{i1}·W_{i2}, exactly symmetric.
struct GramMatrix {
    Matrix g;
    Vector row_sums_offdiag;

    std::size_t n() const { return static_cast<std::size_t>(g.rows()); }
};

GramMatrix gram(const WMatrix& w);
GramMatrix gram(const Matrix& rows);

/// Σ_{i1≠i2} g[i1][i2]² (unnormalized).
double offdiag_square_sum(const GramMatrix& g);

/// Σ over pairwise-distinct (i1, i2, i3) of g[i1][i2]·g[i2][i3]. Requires n >= 3.
double chain_sum_distinct(const GramMatrix& g);

}  // namespace varest
