#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace tsns
{
struct MeanEstimate
{
    double mean = 0;
    double se = 0;  //!< sample stdev / sqrt(n)
    std::size_t n = 0;
};

MeanEstimate mean_estimate(std::span<double const> samples);

//! Wilson score interval for k successes in n trials at normal quantile z
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n,
                                          double z = 1.96);

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double slope_se = 0;
    std::size_t n = 0;
};

/*!
 * Least squares y ≈ a + b x.
 *
 * With weights, minimizes Σ w_i (y_i - a - b x_i)² and reports the slope
 * standard error for weights w_i = 1/var(y_i). Without weights the slope
 * error comes from the residual variance.
 */
LinearFit linear_fit(std::span<double const> x, std::span<double const> y,
                     std::span<double const> weights = {});
}  // namespace tsns
