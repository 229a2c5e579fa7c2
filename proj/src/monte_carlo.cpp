#include "tsns/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "tsns/parallel.hpp"

namespace tsns
{
namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t grid_index(double t, double dt)
{
    double r = t / dt;
    auto n = static_cast<std::size_t>(std::llround(r));
    if (!(t >= 0) || std::abs(r - double(n)) > 1e-9 * std::max(1.0, r))
    {
        std::ostringstream os;
        os << "time " << t << " is not a multiple of dt = " << dt;
        throw std::invalid_argument(os.str());
    }
    return n;
}

SimConfig with_horizon(SimConfig cfg, double T)
{
    cfg.T = T;
    cfg.validate();
    return cfg;
}

/*!
 * Step v from x along zp, calling visit(n, eval) at grid points 0..steps.
 * The tangent w, when given, is advanced alongside.
 */
template<class Visit>
void walk(SpectralField const& x, PathwiseDynamics const& dyn,
          ExponentialStepper const& st, ZPath const& zp, std::size_t steps,
          SpectralField* w, Visit&& visit)
{
    std::size_t stride = st.integrator() == Integrator::exponential_midpoint
                             ? 2
                             : 1;
    SpectralField v = x - zp.states[0];
    for (std::size_t n = 0;; ++n)
    {
        SpectralField const& z = zp.states[n * stride];
        NonlinearEval e = dyn.evaluate(v + z);
        if (!visit(n, e) || n == steps)
            return;
        SpectralField const* zh = stride > 1 ? &zp.states[n * stride + 1]
                                             : nullptr;
        st.step(v, z, zh, w, &e);
    }
}

MeanEstimate estimate(std::vector<double> const& v)
{
    return mean_estimate(v);
}
}  // namespace

ZPath McSetup::replica_path(ModeSetPtr const& ms, std::size_t i, double T) const
{
    Rng rng = make_stream(seed, streams::replicas + i);
    return sample_z_path_for(with_horizon(sim, T), ms, noise, rng);
}

//---------------------------------------------------------------------------//

std::vector<SemigroupEstimate>
transition_estimate(std::span<TestFunctional const> phis,
                    SpectralField const& x, double t, McSetup const& setup)
{
    auto cfg = with_horizon(setup.sim, t);
    auto const& ms = x.mode_set_ptr();
    std::vector<std::vector<double>> vals(phis.size(),
                                          std::vector<double>(setup.samples));
    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, t);
        auto u = final_state(x, cfg, setup.cutoff, zp);
        for (std::size_t f = 0; f < phis.size(); ++f)
            vals[f][i] = phis[f](u);
    });
    double xn = sobolev_norm(x, setup.cutoff ? setup.cutoff->alpha : 0.0);
    std::vector<SemigroupEstimate> out;
    for (std::size_t f = 0; f < phis.size(); ++f)
    {
        auto m = estimate(vals[f]);
        out.push_back({phis[f].id(), t, xn, m.mean, m.se, m.n});
    }
    return out;
}

//---------------------------------------------------------------------------//

FellerReport feller_modulus(std::span<TestFunctional const> phis,
                            SpectralField const& x, SpectralField const& h,
                            std::size_t halvings, std::span<double const> ts,
                            double alpha, McSetup const& setup)
{
    if (ts.empty() || halvings == 0)
        throw std::invalid_argument("feller_modulus needs times and halvings");
    double T = *std::max_element(ts.begin(), ts.end());
    auto cfg = with_horizon(setup.sim, T);
    std::vector<std::size_t> idx;
    for (double t : ts)
        idx.push_back(grid_index(t, cfg.dt));
    double h0 = sobolev_norm(h, alpha);
    if (!(h0 >= 0) || h0 >= 1)
        throw std::invalid_argument("feller_modulus needs ‖h‖_α < 1");

    auto const& ms = x.mode_set_ptr();
    PathwiseDynamics dyn(cfg.nu, setup.cutoff, cfg.nonlinear);
    ExponentialStepper st(dyn, ms, cfg.dt, cfg.integrator);
    std::size_t const nf = phis.size(), nt = ts.size();
    // vals[j][f][ti][i]; j = 0 is the base point, j >= 1 is x + h_{j-1}
    std::vector<std::vector<std::vector<std::vector<double>>>> vals(
        halvings + 2,
        std::vector<std::vector<std::vector<double>>>(
            nf, std::vector<std::vector<double>>(
                    nt, std::vector<double>(setup.samples))));

    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, T);
        for (std::size_t j = 0; j <= halvings + 1; ++j)
        {
            SpectralField start = x;
            if (j > 0)
                start.axpy(std::ldexp(1.0, -int(j - 1)), h);
            walk(start, dyn, st, zp, cfg.steps(), nullptr,
                 [&](std::size_t n, NonlinearEval const& e) {
                     for (std::size_t ti = 0; ti < nt; ++ti)
                         if (idx[ti] == n)
                             for (std::size_t f = 0; f < nf; ++f)
                                 vals[j][f][ti][i] = phis[f](e.u);
                     return true;
                 });
        }
    });

    FellerReport rep;
    rep.alpha = alpha;
    rep.bounded = true;
    std::vector<double> diff(setup.samples);
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t ti = 0; ti < nt; ++ti)
        {
            double r0 = 0, se0 = 0;
            for (std::size_t j = 1; j <= halvings + 1; ++j)
            {
                for (std::size_t i = 0; i < setup.samples; ++i)
                    diff[i] = vals[j][f][ti][i] - vals[0][f][ti][i];
                auto m = mean_estimate(diff);
                FellerRow row;
                row.functional = phis[f].id();
                row.t = ts[ti];
                row.h_norm = h0 * std::ldexp(1.0, -int(j - 1));
                row.delta = m.mean;
                row.delta_se = m.se;
                if (row.h_norm > 0)
                {
                    row.modulus = row.h_norm
                                  * std::log(std::numbers::e / row.h_norm);
                    row.ratio = std::abs(m.mean) / row.modulus;
                    row.ratio_se = m.se / row.modulus;
                }
                if (j == 1)
                {
                    r0 = row.ratio;
                    se0 = row.ratio_se;
                }
                else if (row.ratio
                         > r0 + 3 * std::hypot(row.ratio_se, se0))
                {
                    rep.bounded = false;
                }
                rep.rows.push_back(row);
            }
        }
    return rep;
}

//---------------------------------------------------------------------------//

std::vector<BelEstimate> bel_gradient(std::span<TestFunctional const> phis,
                                      SpectralField const& x,
                                      SpectralField const& h, double t,
                                      double fd_eps, McSetup const& setup)
{
    if (!(setup.noise.c0 > 0))
        throw std::invalid_argument(
            "gradient weight needs invertible noise (c0 > 0)");
    if (setup.sim.integrator != Integrator::exponential_euler)
        throw std::invalid_argument(
            "gradient weight is defined for exponential Euler steps");
    if (!(fd_eps > 0))
        throw std::invalid_argument("finite-difference step must be positive");
    auto cfg = with_horizon(setup.sim, t);
    auto const& ms = x.mode_set_ptr();
    std::size_t const steps = cfg.steps();
    PathwiseDynamics dyn(cfg.nu, setup.cutoff, cfg.nonlinear);
    ExponentialStepper st(dyn, ms, cfg.dt, cfg.integrator);

    // inverse innovation variance per representative
    std::vector<double> cinv(ms->size());
    for (std::size_t k = 0; k < ms->size(); ++k)
    {
        double k2 = ms->k2(k);
        cinv[k] = 1.0 / ou_step_variance(setup.noise.sigma(k2), cfg.nu * k2,
                                         cfg.dt);
    }
    auto weighted_pairing = [&](SpectralField const& a, SpectralField const& b) {
        double s = 0;
        for (std::size_t k = 0; k < a.size(); ++k)
        {
            cplx d = 0;
            for (int j = 0; j < 3; ++j)
                d += a[k][j] * std::conj(b[k][j]);
            s += 2 * d.real() * cinv[k];
        }
        return s;
    };

    std::size_t const nf = phis.size();
    std::vector<std::vector<double>> bel(nf, std::vector<double>(setup.samples));
    auto fd = bel, diff = bel, path = bel;
    SpectralField const zero(ms);

    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, t);
        SpectralField w = h;
        SpectralField v = x - zp.states[0];
        double weight = 0;
        for (std::size_t n = 0; n < steps; ++n)
        {
            SpectralField const& z = zp.states[n];
            SpectralField xi = zp.states[n + 1] - st.propagate(z, zero);
            st.step(v, z, nullptr, &w);
            weight += weighted_pairing(w, xi);
        }
        weight /= double(steps);
        SpectralField u = v + zp.states[steps];
        auto up = final_state(x + fd_eps * h, cfg, setup.cutoff, zp);
        auto um = final_state(x - fd_eps * h, cfg, setup.cutoff, zp);
        for (std::size_t f = 0; f < nf; ++f)
        {
            bel[f][i] = phis[f](u) * weight;
            fd[f][i] = (phis[f](up) - phis[f](um)) / (2 * fd_eps);
            diff[f][i] = bel[f][i] - fd[f][i];
            path[f][i] = phis[f].derivative(u, w);
        }
    });

    std::vector<BelEstimate> out;
    for (std::size_t f = 0; f < nf; ++f)
        out.push_back({phis[f].id(), estimate(bel[f]), estimate(fd[f]),
                       estimate(diff[f]), estimate(path[f])});
    return out;
}

//---------------------------------------------------------------------------//

MartingaleCheck martingale_check(SpectralField const& phi,
                                 SpectralField const& x, double t,
                                 McSetup const& setup)
{
    auto cfg = with_horizon(setup.sim, t);
    auto const& ms = x.mode_set_ptr();
    PathwiseDynamics dyn(cfg.nu, setup.cutoff, cfg.nonlinear);
    ExponentialStepper st(dyn, ms, cfg.dt, cfg.integrator);
    SpectralField const aphi = apply_power(phi, 1.0);
    std::vector<double> m(setup.samples);

    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, t);
        double drift = 0;
        double start = 0;
        double end = 0;
        walk(x, dyn, st, zp, cfg.steps(), nullptr,
             [&](std::size_t n, NonlinearEval const& e) {
                 if (n == 0)
                     start = pairing(e.u, phi);
                 if (n == cfg.steps())
                 {
                     end = pairing(e.u, phi);
                     return false;
                 }
                 drift += cfg.dt * (cfg.nu * pairing(e.u, aphi)
                                    - pairing(e.value, phi));
                 return true;
             });
        m[i] = end - start + drift;
    });

    MartingaleCheck out;
    out.mean = mean_estimate(m);
    double mu = out.mean.mean;
    double s2 = 0, s4 = 0;
    for (double v : m)
    {
        double d = (v - mu) * (v - mu);
        s2 += d;
        s4 += d * d;
    }
    double n = double(m.size());
    out.variance = s2 / (n - 1);
    double m4 = s4 / n;
    out.variance_se = std::sqrt(std::max(m4 - out.variance * out.variance, 0.0) / n);
    out.expected_variance = t * covariance_norm2(phi, setup.noise);
    return out;
}

//---------------------------------------------------------------------------//

std::vector<TangentProbe> tangent_probe(SpectralField const& x,
                                        SpectralField const& h,
                                        std::span<double const> ts,
                                        double alpha, McSetup const& setup)
{
    if (ts.empty())
        throw std::invalid_argument("tangent_probe needs times");
    double T = *std::max_element(ts.begin(), ts.end());
    auto cfg = with_horizon(setup.sim, T);
    auto const& ms = x.mode_set_ptr();
    PathwiseDynamics dyn(cfg.nu, setup.cutoff, cfg.nonlinear);
    ExponentialStepper st(dyn, ms, cfg.dt, cfg.integrator);
    double gamma = 2 * setup.noise.alpha0 + 0.5;
    std::vector<std::size_t> idx;
    for (double t : ts)
        idx.push_back(grid_index(t, cfg.dt));
    std::vector<std::vector<double>> energy(ts.size(),
                                            std::vector<double>(setup.samples));
    auto low = energy;

    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, T);
        SpectralField w = h;
        double integral = 0, prev = 0, sup = 0;
        walk(x, dyn, st, zp, cfg.steps(), &w,
             [&](std::size_t n, NonlinearEval const&) {
                 double en = sobolev_inner(w, w, alpha + 1);
                 if (n > 0)
                     integral += 0.5 * cfg.dt * (prev + en);
                 prev = en;
                 sup = std::max(sup, sobolev_norm(w, gamma));
                 for (std::size_t k = 0; k < idx.size(); ++k)
                     if (idx[k] == n)
                     {
                         energy[k][i] = integral;
                         low[k][i] = sup;
                     }
                 return true;
             });
    });

    std::vector<TangentProbe> out;
    for (std::size_t k = 0; k < ts.size(); ++k)
        out.push_back({ts[k], estimate(energy[k]), estimate(low[k])});
    return out;
}

//---------------------------------------------------------------------------//

double blowup_exponent(double alpha, double eps_variant)
{
    if (!(alpha > 0.5))
        throw std::invalid_argument("blow-up exponent needs alpha > 1/2");
    if (alpha == 1.5)
    {
        if (!(eps_variant > 0 && eps_variant < 1))
            throw std::invalid_argument(
                "alpha = 3/2 needs the epsilon variant with 0 < eps < 1");
        return 2 / (1 - eps_variant);
    }
    return 4 / std::min(2 * alpha - 1, 2.0);
}

BlowupReport blowup_mc(BlowupOptions const& opts, McSetup const& setup)
{
    if (opts.R_values.empty())
        throw std::invalid_argument("blow-up study needs at least one R");
    if (opts.x_fraction > 1.0 / 3 + 1e-12 || opts.x_fraction < 0)
        throw std::invalid_argument("initial condition must satisfy ‖x‖_α <= R/3");
    BlowupReport rep;
    rep.alpha = opts.alpha;
    rep.gamma = blowup_exponent(opts.alpha, opts.eps_variant);
    for (double R : opts.R_values)
        CutoffSpec{opts.alpha, R}.validate(setup.noise);

    auto const& cfg = setup.sim;
    cfg.validate();
    double const T_max = cfg.T;
    std::size_t const steps = cfg.steps();
    for (double T : opts.T_values)
        if (T > T_max + 1e-12)
            throw std::invalid_argument("sweep time beyond the simulated horizon");

    auto ms = setup.modes();
    Rng xr = make_stream(setup.seed, streams::initial_condition);
    SpectralField xhat = scaled_to_norm(random_field(ms, opts.x_decay, 1.0, xr),
                                        opts.alpha, 1.0);
    std::size_t const nR = opts.R_values.size();
    std::vector<std::vector<double>> tau(nR, std::vector<double>(setup.samples));
    auto exit = tau;

    parallel_for(setup.samples, [&](std::size_t i) {
        auto zp = setup.replica_path(ms, i, T_max);
        std::size_t stride = cfg.z_refinement();
        std::vector<double> znorm(steps + 1), times(steps + 1);
        for (std::size_t n = 0; n <= steps; ++n)
        {
            znorm[n] = sobolev_norm(zp.states[n * stride], opts.alpha);
            times[n] = zp.times[n * stride];
        }
        for (std::size_t r = 0; r < nR; ++r)
        {
            double R = opts.R_values[r];
            exit[r][i] = kInf;
            for (std::size_t n = 0; n <= steps; ++n)
                if (znorm[n] > R / 3)
                {
                    exit[r][i] = times[n];
                    break;
                }
            PathwiseDynamics dyn(cfg.nu, CutoffSpec{opts.alpha, R},
                                 cfg.nonlinear);
            ExponentialStepper st(dyn, ms, cfg.dt, cfg.integrator);
            double prev = 0;
            double found = kInf;
            walk(opts.x_fraction * R * xhat, dyn, st, zp, steps, nullptr,
                 [&](std::size_t n, NonlinearEval const& e) {
                     if (e.norm >= R)
                     {
                         found = n == 0 ? times[0]
                                        : times[n - 1]
                                              + (R - prev) / (e.norm - prev)
                                                    * (times[n] - times[n - 1]);
                         return false;
                     }
                     prev = e.norm;
                     return true;
                 });
            tau[r][i] = found;
        }
    });

    for (std::size_t r = 0; r < nR; ++r)
    {
        BlowupRadius br;
        br.R = opts.R_values[r];
        br.replicas = setup.samples;
        br.tau = tau[r];
        br.z_exit = exit[r];
        double t_star = kInf;
        for (std::size_t i = 0; i < setup.samples; ++i)
            if (tau[r][i] < exit[r][i])
                t_star = std::min(t_star, tau[r][i]);
        br.censored = !std::isfinite(t_star);
        if (br.censored)
            t_star = T_max;
        br.c_prime = t_star * std::pow(br.R, rep.gamma);
        // recount at T = c′R^{-γ} = t_star, without the round trip
        double const Tc = t_star;
        for (std::size_t i = 0; i < setup.samples; ++i)
        {
            bool z_ok = exit[r][i] > Tc;
            br.z_event += z_ok;
            br.violations += z_ok && tau[r][i] < Tc;
        }
        rep.radii.push_back(std::move(br));

        for (double T : opts.T_values)
        {
            BlowupCell c;
            c.R = opts.R_values[r];
            c.T = T;
            c.abscissa = c.R * c.R / T;
            c.n = setup.samples;
            c.hits = static_cast<std::size_t>(std::count_if(
                tau[r].begin(), tau[r].end(), [T](double s) { return s <= T; }));
            for (std::size_t i = 0; i < setup.samples; ++i)
                if (exit[r][i] > T)
                {
                    ++c.z_event;
                    c.violations += tau[r][i] < T;
                }
            c.p_hat = double(c.hits) / double(c.n);
            std::tie(c.ci_lo, c.ci_hi) = wilson_interval(c.hits, c.n);
            rep.cells.push_back(c);
        }
    }

    std::vector<double> xs, ys, ws;
    for (auto const& c : rep.cells)
        if (c.hits >= opts.min_hits && c.hits < c.n && c.p_hat <= opts.fit_max_p)
        {
            xs.push_back(c.abscissa);
            ys.push_back(std::log(c.p_hat));
            ws.push_back(double(c.n) * c.p_hat / (1 - c.p_hat));
        }
    rep.fit_points = xs.size();
    if (xs.size() >= 2)
    {
        rep.fit = linear_fit(xs, ys, ws);
        rep.fit_valid = true;
    }
    return rep;
}
}  // namespace tsns
