#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fpforge/errors.hpp"

namespace fpforge::nn {

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
};

// Central finite differences of a scalar program against its analytic
// gradient, coordinate by coordinate, in 64-bit arithmetic.
// rel error = |a - n| / max(|a|, |n|, 1e-8).
inline GradcheckResult gradcheck(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> point,
                                 const std::vector<double>& analytic, double h = 1e-4) {
  if (point.size() != analytic.size())
    throw InvalidArgument("gradcheck: gradient size does not match point size");
  GradcheckResult result;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double f_plus = f(point);
    point[i] = saved - h;
    const double f_minus = f(point);
    point[i] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
      throw ParseError("gradcheck: non-finite value at coordinate " + std::to_string(i));
    const double numeric = (f_plus - f_minus) / (2.0 * h);
    const double a = analytic[i];
    if (!std::isfinite(a))
      throw ParseError("gradcheck: non-finite analytic gradient at coordinate " + std::to_string(i));
    const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
    const double rel = std::fabs(a - numeric) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_coordinate = i;
    }
  }
  return result;
}

}  // namespace fpforge::nn
