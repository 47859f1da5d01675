#pragma once

#include "fct/numerics/matrix.hpp"

namespace fct {

// Linear centered kernel alignment between two representations of the same
// n samples: ||Y'X||_F^2 / (||X'X||_F ||Y'Y||_F) after column centering.
// Returns 0 when either side has zero variance. Requires n >= 2.
double cka_linear(const Matrix& x, const Matrix& y);

}  // namespace fct
