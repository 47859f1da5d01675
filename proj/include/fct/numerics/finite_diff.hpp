#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fct {

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
// Used as the reference gradient in tests.
std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> params, double h = 1e-5);

// Relative error |a - b| / max(|a|, |b|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

}  // namespace fct
