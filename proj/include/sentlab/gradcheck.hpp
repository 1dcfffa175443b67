#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sentlab/errors.hpp"

namespace sentlab {

// Central finite differences against an analytic gradient, coordinate by
// coordinate, in double precision. Returns the worst relative error, with
// max(|analytic|, |numeric|, 1e-8) as the denominator.
template <class LossFn, class GradFn>
double grad_check(LossFn&& loss_fn, GradFn&& grad_fn, std::vector<double> params,
                  double h = 1e-5) {
  if (!(h > 0)) throw std::invalid_argument("grad_check: h must be > 0");
  const std::vector<double> analytic = grad_fn(params);
  if (analytic.size() != params.size())
    throw std::invalid_argument("grad_check: gradient size mismatch");
  double worst = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss_fn(params);
    params[i] = saved - h;
    const double down = loss_fn(params);
    params[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericError("grad_check: non-finite loss at coordinate " +
                         std::to_string(i));
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace sentlab
