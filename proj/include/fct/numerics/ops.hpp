#pragma once

#include <span>
#include <vector>

#include "fct/numerics/matrix.hpp"

namespace fct {

// v / ||v||_2. Throws DegenerateInputError for the zero vector.
std::vector<double> l2_normalize(std::span<const double> v);

// Row-wise l2 normalization of a batch.
Matrix normalize_rows(const Matrix& m);

// Backward of normalize_rows: given the pre-normalization rows and
// dL/d(normalized), returns dL/d(rows).
Matrix normalize_rows_backward(const Matrix& rows, const Matrix& grad_normalized);

// Rows [a | b], both with the same row count.
Matrix hconcat(const Matrix& a, const Matrix& b);

// Rows of m selected by index, in the given order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx);

}  // namespace fct
