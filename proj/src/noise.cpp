#include "tsns/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "tsns/parallel.hpp"

namespace tsns
{
double NoiseSpec::sigma(double k2) const
{
    return c0 * std::pow(k2, -0.5 * exponent());
}

void NoiseSpec::validate() const
{
    if (!(alpha0 > 0) || !std::isfinite(alpha0))
        throw std::invalid_argument("alpha0 must be positive");
    if (!(c0 >= 0) || !std::isfinite(c0))
        throw std::invalid_argument("c0 must be nonnegative");
}

double sigma_of(WaveVector const& k, NoiseSpec const& spec)
{
    if (k.is_zero())
        throw std::domain_error("sigma_of: zero wavevector");
    return spec.sigma(k.norm2());
}

double ou_step_variance(double sigma, double lambda, double dt)
{
    if (lambda == 0)
        return sigma * sigma * dt;
    // (1 - e^{-2λΔt}) / (2λ) without cancellation for small λΔt
    return sigma * sigma * (-std::expm1(-2 * lambda * dt)) / (2 * lambda);
}

SpectralField ou_exact_step(SpectralField z, double dt, double nu,
                            NoiseSpec const& spec, Rng& rng)
{
    if (!(dt > 0))
        throw std::invalid_argument("ou_exact_step: dt must be positive");
    auto const& ms = z.modes();
    std::normal_distribution<double> normal;
    constexpr double kHalf = 0.70710678118654752440;
    for (std::size_t i = 0; i < ms.size(); ++i)
    {
        double k2 = ms.k2(i);
        double lambda = nu * k2;
        double decay = std::exp(-lambda * dt);
        double s = std::sqrt(ou_step_variance(spec.sigma(k2), lambda, dt));
        auto const& [a1, a2] = ms.tangent_basis(i);
        double g1 = normal(rng);
        double g2 = normal(rng);
        double g3 = normal(rng);
        double g4 = normal(rng);
        cplx w1 = s * kHalf * cplx(g1, g2);
        cplx w2 = s * kHalf * cplx(g3, g4);
        for (int j = 0; j < 3; ++j)
            z[i][j] = decay * z[i][j] + w1 * a1[j] + w2 * a2[j];
    }
    return z;
}

//---------------------------------------------------------------------------//

double ZPath::uniform_step() const
{
    if (times.size() < 2)
        throw std::invalid_argument("z path has fewer than two grid points");
    double h = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i)
    {
        double expect = h * static_cast<double>(i);
        if (std::abs(times[i] - expect) > 1e-9 * std::max(1.0, expect))
            throw std::invalid_argument("z path grid is not uniform");
    }
    return h;
}

ZPath ZPath::subsample(std::size_t stride) const
{
    if (stride == 0)
        throw std::invalid_argument("subsample stride must be positive");
    ZPath out;
    for (std::size_t i = 0; i < times.size(); i += stride)
    {
        out.times.push_back(times[i]);
        out.states.push_back(states[i]);
    }
    return out;
}

std::vector<double> uniform_grid(double dt, std::size_t steps)
{
    std::vector<double> g(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i)
        g[i] = dt * static_cast<double>(i);
    return g;
}

ZPath sample_z_path(ModeSetPtr modes, std::span<double const> grid,
                    double nu, NoiseSpec const& spec, Rng& rng)
{
    if (grid.empty() || grid.front() != 0.0)
        throw std::invalid_argument("z path grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("z path grid is not strictly increasing");
    ZPath path;
    path.times.assign(grid.begin(), grid.end());
    path.states.reserve(grid.size());
    path.states.emplace_back(std::move(modes));
    for (std::size_t i = 1; i < grid.size(); ++i)
        path.states.push_back(ou_exact_step(path.states.back(),
                                            grid[i] - grid[i - 1], nu, spec,
                                            rng));
    return path;
}

double expected_z_norm2(ModeSet const& modes, NoiseSpec const& spec,
                        double nu, double beta, double t)
{
    double sum = 0;
    for (std::size_t i = 0; i < modes.size(); ++i)
    {
        double k2 = modes.k2(i);
        // four real basis directions per representative pair
        sum += 4 * std::pow(k2, beta)
               * ou_step_variance(spec.sigma(k2), nu * k2, t);
    }
    return sum;
}

double covariance_norm2(SpectralField const& phi, NoiseSpec const& spec)
{
    auto q = apply_sqrt_covariance(phi, spec);
    return pairing(q, q);
}

SpectralField apply_sqrt_covariance(SpectralField u, NoiseSpec const& spec)
{
    auto const& ms = u.modes();
    for (std::size_t i = 0; i < ms.size(); ++i)
    {
        double s = spec.sigma(ms.k2(i));
        for (auto& c : u[i])
            c *= s;
    }
    return u;
}

SpectralField apply_inverse_sqrt_covariance(SpectralField u,
                                            NoiseSpec const& spec)
{
    if (!(spec.c0 > 0))
        throw std::domain_error("covariance is not invertible (c0 = 0)");
    auto const& ms = u.modes();
    for (std::size_t i = 0; i < ms.size(); ++i)
    {
        double s = spec.sigma(ms.k2(i));
        for (auto& c : u[i])
            c /= s;
    }
    return u;
}

//---------------------------------------------------------------------------//

std::vector<double> sample_sup_norms(ModeSetPtr modes, NoiseSpec const& spec,
                                     double nu, double beta, double eps,
                                     TailOptions const& opts)
{
    if (!(eps > 0))
        throw std::invalid_argument("tail horizon must be positive");
    if (opts.substeps == 0)
        throw std::invalid_argument("tail sub-grid needs at least one step");
    std::vector<double> sups(opts.samples);
    double h = eps / static_cast<double>(opts.substeps);
    parallel_for(opts.samples, [&](std::size_t i) {
        Rng rng = make_stream(opts.seed, opts.stream_base + i);
        SpectralField z(modes);
        double best = 0;
        for (std::size_t s = 0; s < opts.substeps; ++s)
        {
            z = ou_exact_step(std::move(z), h, nu, spec, rng);
            best = std::max(best, sobolev_norm(z, beta));
        }
        sups[i] = best;
    });
    return sups;
}

namespace
{
struct TailFit
{
    LinearFit fit;
    bool valid = false;
    std::size_t points = 0;
};

// Weighted fit of log p̂ against K²/ε from sorted suprema
TailFit fit_tail(std::span<double const> sorted, double eps,
                 std::span<double const> K_values, TailOptions const& opts,
                 std::vector<TailPoint>* points)
{
    std::size_t n = sorted.size();
    std::vector<double> xs, ys, ws;
    for (double K : K_values)
    {
        TailPoint p;
        p.K = K;
        p.n_samples = n;
        p.n_exceed = static_cast<std::size_t>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), K));
        p.p_hat = n ? double(p.n_exceed) / double(n) : 0.0;
        std::tie(p.ci_lo, p.ci_hi) = wilson_interval(p.n_exceed, n);
        if (points)
            points->push_back(p);

        // Saturated points carry no tail information
        if (p.n_exceed >= opts.min_exceed && p.n_exceed < n
            && p.p_hat <= opts.fit_max_p)
        {
            xs.push_back(K * K / eps);
            ys.push_back(std::log(p.p_hat));
            // delta-method variance of log p̂
            ws.push_back(double(n) * p.p_hat / (1 - p.p_hat));
        }
    }
    TailFit f;
    f.points = xs.size();
    if (xs.size() >= 2)
    {
        f.fit = linear_fit(xs, ys, ws);
        f.valid = true;
    }
    return f;
}
}  // namespace

TailResult tail_from_samples(std::span<double const> sups, double eps,
                             std::span<double const> K_values,
                             TailOptions const& opts)
{
    for (double K : K_values)
        if (!(K >= 0.5))
            throw std::invalid_argument("tail threshold K must be >= 1/2, got "
                                        + std::to_string(K));
    TailResult res;
    res.eps = eps;
    std::vector<double> sorted(sups.begin(), sups.end());
    std::sort(sorted.begin(), sorted.end());
    auto f = fit_tail(sorted, eps, K_values, opts, &res.points);
    res.fit = f.fit;
    res.fit_valid = f.valid;
    res.fit_points = f.points;

    if (opts.bootstrap > 1 && f.valid)
    {
        Rng rng = make_stream(opts.seed, streams::trials + opts.stream_base);
        std::uniform_int_distribution<std::size_t> pick(0, sorted.size() - 1);
        std::vector<double> slopes, resample(sorted.size());
        for (std::size_t b = 0; b < opts.bootstrap; ++b)
        {
            for (auto& s : resample)
                s = sorted[pick(rng)];
            std::sort(resample.begin(), resample.end());
            auto g = fit_tail(resample, eps, K_values, opts, nullptr);
            if (g.valid)
                slopes.push_back(g.fit.slope);
        }
        if (slopes.size() > 1)
        {
            auto m = mean_estimate(slopes);
            // se of the mean times sqrt(n) is the sample deviation
            res.slope_boot_se = m.se * std::sqrt(double(slopes.size()));
        }
    }
    return res;
}

TailResult sup_norm_tail_mc(ModeSetPtr modes, NoiseSpec const& spec,
                            double nu, double beta, double eps,
                            std::span<double const> K_values,
                            TailOptions const& opts)
{
    for (double K : K_values)
        if (!(K >= 0.5))
            throw std::invalid_argument("tail threshold K must be >= 1/2, got "
                                        + std::to_string(K));
    auto sups = sample_sup_norms(modes, spec, nu, beta, eps, opts);
    auto res = tail_from_samples(sups, eps, K_values, opts);
    res.beta = beta;
    res.hypothesis_ok = beta < spec.regularity_limit();
    return res;
}
}  // namespace tsns
