#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>

namespace fct {

// Row-major so one row is one sample; batches are rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Throws ShapeError unless m is rows x cols.
void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what);
void require_cols(const Matrix& m, Eigen::Index cols, const char* what);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
// Throws NumericError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace fct
