#include "tsns/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "tsns/cutoff.hpp"
#include "tsns/rng.hpp"

namespace tsns
{
bool trilinear_admissible(double a, double b, double c)
{
    double floor = std::max(-c, 0.0);
    if (a < floor || b < floor)
        return false;
    double s = 2 * (a + b + c);
    bool edge = a == 1.5 || b == 1.5 || c == 1.5;
    return edge ? s > 3 : s >= 3;
}

namespace
{
// Smooth bump of width ~1/K centred at x0: u_k = P_k e · exp(-|k|²/2K²) e^{-ik·x0}
SpectralField bump_field(ModeSetPtr const& ms, Vec3 const& x0, double K,
                         Rng& rng)
{
    std::normal_distribution<double> normal;
    Vec3c e{normal(rng), normal(rng), normal(rng)};
    SpectralField u(ms);
    for (std::size_t i = 0; i < ms->size(); ++i)
    {
        WaveVector const& k = (*ms)[i];
        double phase = -(k.x * x0[0] + k.y * x0[1] + k.z * x0[2]);
        cplx f = std::exp(-0.5 * ms->k2(i) / (K * K)) * std::polar(1.0, phase);
        u[i] = leray_project(k, e);
        for (auto& c : u[i])
            c *= f;
    }
    return u;
}

// Trial fields: either three co-located bumps of independent widths, or
// random-phase fields with slopes in [-1, 3] and random high-pass bands.
std::array<SpectralField, 3> trial_fields(ModeSetPtr const& ms, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < 0.5)
    {
        double const two_pi = 6.283185307179586;
        Vec3 x0{two_pi * unit(rng), two_pi * unit(rng), two_pi * unit(rng)};
        auto width = [&] {
            return std::exp(std::log(0.5)
                            + unit(rng) * std::log(2.0 * ms->cutoff()));
        };
        // a gradient of an even bump vanishes at its centre, so each bump
        // is displaced by about one width
        auto near = [&](double K) {
            std::normal_distribution<double> normal;
            return Vec3{x0[0] + normal(rng) / K, x0[1] + normal(rng) / K,
                        x0[2] + normal(rng) / K};
        };
        double ku = width(), kv = width(), kw = width();
        return {bump_field(ms, near(ku), ku, rng),
                bump_field(ms, near(kv), kv, rng),
                bump_field(ms, near(kw), kw, rng)};
    }
    std::uniform_real_distribution<double> slope(-1.0, 3.0);
    std::uniform_int_distribution<int> band(0, ms->cutoff());
    auto draw = [&] {
        double s = slope(rng);
        int lo = band(rng);
        auto u = random_field(ms, s, 1.0, rng);
        for (std::size_t i = 0; i < ms->size(); ++i)
            if ((*ms)[i].max_abs() < lo)
                u[i] = Vec3c{};
        return u;
    };
    auto u = draw();
    auto v = draw();
    auto w = draw();
    return {std::move(u), std::move(v), std::move(w)};
}
}  // namespace

InequalityReport bnostro_check(double a, double b, double c,
                               std::size_t trials, int N, std::uint64_t seed)
{
    auto ms = ModeSet::cube(N);
    InequalityReport rep;
    rep.name = "trilinear";
    rep.params = {a, b, c};
    rep.cutoff = N;
    rep.admissible = trilinear_admissible(a, b, c);
    for (std::size_t t = 0; t < trials; ++t)
    {
        Rng rng = make_stream(seed, streams::trials + t);
        auto [u, v, w] = trial_fields(ms, rng);
        double den = sobolev_norm(u, a) * sobolev_norm(v, b)
                     * sobolev_norm(w, c + 1);
        ++rep.trials;
        if (den == 0)
        {
            ++rep.skipped;
        }
        else
        {
            double r = std::abs(pairing(bilinear(u, v), w)) / den;
            rep.constant = std::max(rep.constant, r);
        }
        rep.running_max.push_back(rep.constant);
    }
    return rep;
}

DeltaResult corollary_delta(double a, double b)
{
    if (a < 0 || b < 0)
        throw std::invalid_argument("corollary_delta needs a, b >= 0");
    double lo = std::min(a, b);
    double hi = std::max(a, b);
    if (hi == 1.5 || hi == 0)
        return {lo - 1, true};
    return {lo - std::max(1.5 - hi, 0.0) - 1, false};
}

SeriesResult series1(double alpha, double k0)
{
    if (!(k0 >= 1))
        throw std::invalid_argument("series1 needs k0 >= 1");
    int n = static_cast<int>(std::floor(k0));
    double k02 = k0 * k0;
    double sum = 0;
    for (int x = -n; x <= n; ++x)
        for (int y = -n; y <= n; ++y)
            for (int z = -n; z <= n; ++z)
            {
                int k2 = x * x + y * y + z * z;
                if (k2 == 0 || double(k2) > k02)
                    continue;
                sum += std::pow(double(k2), 0.5 * alpha);
            }
    SeriesResult r;
    r.sum = sum;
    r.shape = alpha == -3 ? std::log(1 + k0)
                          : std::pow(k0, std::max(alpha + 3, 0.0));
    r.ratio = sum / r.shape;
    return r;
}

double series2(double alpha, double beta, double gamma, WaveVector l,
               int cutoff)
{
    double l2 = l.norm2();
    if (!(l2 > 1))
        throw std::invalid_argument("series2 needs |l| > 1");
    double sum = 0;
    for (int x = -cutoff; x <= cutoff; ++x)
        for (int y = -cutoff; y <= cutoff; ++y)
            for (int z = -cutoff; z <= cutoff; ++z)
            {
                WaveVector m{x, y, z};
                if (m.is_zero())
                    continue;
                double m2 = m.norm2();
                double lm2 = (l + m).norm2();
                if (!(lm2 > 4 * m2))
                    continue;
                sum += std::pow(l2, -alpha) * std::pow(m2, -beta)
                       * std::pow(lm2, -gamma);
            }
    return sum;
}

bool series2_hypotheses(double alpha, double beta, double gamma)
{
    if (beta < 1.5)
        return 2 * (alpha + beta + gamma) >= 3;
    if (beta == 1.5)
        return alpha + gamma > 0;
    return alpha + gamma >= 0;
}

bool series2_constraint_holds(WaveVector l)
{
    double l2 = l.norm2();
    int n = static_cast<int>(std::ceil(std::sqrt(l2))) + 1;
    for (int x = -n; x <= n; ++x)
        for (int y = -n; y <= n; ++y)
            for (int z = -n; z <= n; ++z)
            {
                WaveVector m{x, y, z};
                double lm2 = (l + m).norm2();
                if (!(lm2 > 4 * double(m.norm2())))
                    continue;
                // squared form of (2/3)|l| <= |l+m| <= 2|l|
                if (9 * lm2 < 4 * l2 || lm2 > 4 * l2)
                    return false;
            }
    return true;
}

//---------------------------------------------------------------------------//

double weight_function(double t, double x, double delta, double eta)
{
    if (t <= delta)
        return std::pow(t, x);
    return std::pow(delta, x) * std::exp(-eta * (t - delta));
}

namespace
{
void check_weight_params(double x, double y, double delta, double eta)
{
    if (!(x >= 0 && x < 1 && y >= 0 && y < 1))
        throw std::invalid_argument("weight exponents must lie in [0,1)");
    if (!(delta > 0 && eta > 0))
        throw std::invalid_argument("weight parameters delta, eta must be > 0");
}
}  // namespace

double weight_convolution(double t, double x, double y, double delta,
                          double eta)
{
    check_weight_params(x, y, delta, eta);
    if (!(t >= 0))
        throw std::invalid_argument("weight convolution needs t >= 0");
    if (t == 0)
        return 0;
    boost::math::quadrature::tanh_sinh<double> quad;
    double const tol = 1e-10;

    // Near an endpoint the second argument is the signed distance to it,
    // which keeps (t - s) and s accurate where the integrand is singular.
    double c = std::min(t, delta);
    auto head = [&](double s, double sc) {
        double left = sc < 0 ? -sc : s;
        double right = sc > 0 ? sc + (t - c) : t - s;
        return std::pow(right, -y) * std::pow(left, -x);
    };
    double integral = quad.integrate(head, 0.0, c, tol);
    if (t > delta)
    {
        auto tail = [&](double s, double sc) {
            double right = sc > 0 ? sc : t - s;
            return std::pow(right, -y) * std::pow(delta, -x)
                   * std::exp(eta * (s - delta));
        };
        integral += quad.integrate(tail, delta, t, tol);
    }
    return weight_function(t, x, delta, eta) * integral;
}

double weight_bound(double x, double y, double delta, double eta)
{
    check_weight_params(x, y, delta, eta);
    return boost::math::beta(1 - x, 1 - y) * std::pow(delta, 1 - y)
           + std::pow(eta, y - 1) * boost::math::tgamma(1 - y);
}

WeightCheck weight_bound_check(double x, double y, double delta, double eta,
                               std::span<double const> t_grid, double tol)
{
    WeightCheck out;
    out.bound = weight_bound(x, y, delta, eta);
    double b = boost::math::beta(1 - x, 1 - y);
    out.weight_excess = -HUGE_VAL;
    for (double t : t_grid)
    {
        double v = weight_convolution(t, x, y, delta, eta);
        if (v > out.max_value)
        {
            out.max_value = v;
            out.t_at_max = t;
        }
        if (t <= delta)
            out.small_t_error = std::max(
                out.small_t_error, std::abs(v - std::pow(t, 1 - y) * b));
        out.weight_excess = std::max(
            out.weight_excess,
            weight_function(t, x, delta, eta) - std::pow(delta, x));
    }
    out.passed = out.max_value <= out.bound + tol && out.weight_excess <= 0;
    return out;
}

//---------------------------------------------------------------------------//

double chiprop_ratio(std::size_t points, double x_max)
{
    if (points < 2 || !(x_max > 0))
        throw std::invalid_argument("chiprop grid needs >= 2 points on (0, x_max]");
    std::vector<double> xs(points), cs(points);
    for (std::size_t i = 0; i < points; ++i)
    {
        xs[i] = x_max * double(i) / double(points - 1);
        cs[i] = chi(xs[i]);
    }
    double best = 0;
    for (std::size_t i = 0; i < points; ++i)
        for (std::size_t j = i + 1; j < points; ++j)
            best = std::max(best, std::abs(cs[i] - cs[j]) * (1 + xs[i])
                                      * (1 + xs[j]) / (xs[j] - xs[i]));
    return best;
}

double chiprop_bound()
{
    return 9 * chi_prime_sup();
}
}  // namespace tsns
