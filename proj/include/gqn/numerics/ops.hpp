#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gqn/numerics/tensor.hpp"

// Differentiable building blocks. Matrices are rank-2 row-major tensors;
// "rows" below always means dim 0.
namespace gqn::numerics {

/// How the inner reduction of a product is ordered. `index` runs k ascending;
/// `canonical` uses canonical_sum so the result ignores the order of the
/// reduced set.
enum class SumOrder { index, canonical };

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// [n x k] * [k x m] -> [n x m].
Tensor matmul(const Tensor& a, const Tensor& b,
              SumOrder order = SumOrder::index);
/// [n x k] * [m x k]^T -> [n x m].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// [n x k] * [k] -> [n].
Tensor matvec(const Tensor& a, const Tensor& v);

/// Adds a length-m bias to every row of an [n x m] matrix.
Tensor add_bias(const Tensor& a, const Tensor& bias);
Tensor relu(const Tensor& a);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_cols(std::initializer_list<Tensor> parts);
/// Vertical concatenation of matrices with equal width.
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_rows(std::initializer_list<Tensor> parts);
/// Rows (or, for a vector, elements) picked by index; repeats are allowed.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);
Tensor row(const Tensor& a, std::size_t r);
Tensor column(const Tensor& a, std::size_t c);
Tensor stack_rows(std::span<const Tensor> rows);
Tensor broadcast_rows(const Tensor& v, std::size_t n);
Tensor reshape(const Tensor& a, Shape shape);

/// Row r multiplied by w[r].
Tensor scale_rows(const Tensor& a, const Tensor& w);
/// out[r] = <a[r], b[r]>.
Tensor rowwise_dot(const Tensor& a, const Tensor& b);

/// Numerically stable softmax of a vector. Throws InvalidInput on empty or
/// non-finite input.
Tensor softmax(const Tensor& scores);
/// Softmax of each matrix row.
Tensor row_softmax(const Tensor& scores);
/// Softmax of `scores[e]` within each group `group[e]`; every group in
/// [0, num_groups) must be non-empty.
Tensor group_softmax(const Tensor& scores, std::span<const std::size_t> group,
                     std::size_t num_groups);
/// out[g] = sum over e in group g of w[e] * rows[e].
Tensor group_weighted_sum(const Tensor& rows, const Tensor& w,
                          std::span<const std::size_t> group,
                          std::size_t num_groups);

/// Elementwise maximum over the rows of a matrix (first maximum wins the
/// gradient on ties).
Tensor max_rows(const Tensor& a);
/// Mean of the rows landing in each cell; cells nobody writes stay zero.
Tensor scatter_mean(const Tensor& rows, std::span<const std::size_t> cell,
                    std::size_t num_cells);

Tensor sum(const Tensor& a);
Tensor mean_squared_error(const Tensor& prediction, const Tensor& target);

}  // namespace gqn::numerics
