#include "fct/retrieval/cka.hpp"

#include <string>

#include "fct/error.hpp"

namespace fct {

double cka_linear(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) {
    throw ShapeError("cka_linear: row count mismatch " + shape_str(x) + " vs " + shape_str(y));
  }
  if (x.rows() < 2) throw DegenerateInputError("cka_linear needs at least 2 samples");
  const Matrix xc = x.rowwise() - x.colwise().mean();
  const Matrix yc = y.rowwise() - y.colwise().mean();
  const double xx = (xc.transpose() * xc).norm();
  const double yy = (yc.transpose() * yc).norm();
  if (xx == 0.0 || yy == 0.0) return 0.0;
  const double yx = (yc.transpose() * xc).squaredNorm();
  return yx / (xx * yy);
}

}  // namespace fct
