#include "tsns/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsns
{
MeanEstimate mean_estimate(std::span<double const> samples)
{
    MeanEstimate est;
    est.n = samples.size();
    if (est.n == 0)
        return est;
    double sum = 0;
    for (double s : samples)
        sum += s;
    est.mean = sum / static_cast<double>(est.n);
    if (est.n < 2)
        return est;
    double ss = 0;
    for (double s : samples)
        ss += (s - est.mean) * (s - est.mean);
    double var = ss / static_cast<double>(est.n - 1);
    est.se = std::sqrt(var / static_cast<double>(est.n));
    return est;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n,
                                          double z)
{
    if (n == 0)
        return {0.0, 1.0};
    double nn = static_cast<double>(n);
    double p = static_cast<double>(k) / nn;
    double z2 = z * z;
    double denom = 1 + z2 / nn;
    double center = (p + z2 / (2 * nn)) / denom;
    double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn))
                  / denom;
    double lo = std::max(0.0, center - half);
    double hi = std::min(1.0, center + half);
    // Guard the endpoints against rounding so the interval contains p
    if (k == 0)
        lo = 0;
    if (k == n)
        hi = 1;
    return {std::min(lo, p), std::max(hi, p)};
}

LinearFit linear_fit(std::span<double const> x, std::span<double const> y,
                     std::span<double const> weights)
{
    if (x.size() != y.size() || (!weights.empty() && weights.size() != x.size()))
        throw std::invalid_argument("linear_fit: size mismatch");
    LinearFit fit;
    fit.n = x.size();
    if (fit.n < 2)
        throw std::invalid_argument("linear_fit: need at least two points");
    auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < fit.n; ++i)
    {
        sw += w(i);
        sx += w(i) * x[i];
        sy += w(i) * y[i];
    }
    double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < fit.n; ++i)
    {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        syy += w(i) * dy * dy;
    }
    if (sxx == 0)
        throw std::invalid_argument("linear_fit: degenerate abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < fit.n; ++i)
    {
        double r = y[i] - fit.intercept - fit.slope * x[i];
        sse += w(i) * r * r;
    }
    fit.r2 = syy > 0 ? 1 - sse / syy : 1.0;
    if (weights.empty())
    {
        fit.slope_se = fit.n > 2
                           ? std::sqrt(sse / double(fit.n - 2) / sxx)
                           : 0.0;
    }
    else
    {
        fit.slope_se = std::sqrt(1.0 / sxx);
    }
    return fit;
}
}  // namespace tsns
