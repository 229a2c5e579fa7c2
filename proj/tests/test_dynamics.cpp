#include <doctest.h>

#include <cmath>

#include "tsns/dynamics.hpp"

using namespace tsns;

namespace
{
ZPath silent_path(ModeSetPtr ms, SimConfig const& cfg)
{
    Rng rng = make_stream(0, 0);
    return sample_z_path_for(cfg, ms, {0.25, 0.0}, rng);
}

ZPath noisy_path(ModeSetPtr ms, SimConfig const& cfg, NoiseSpec const& noise,
                 std::uint64_t seed)
{
    Rng rng = make_stream(seed, streams::replicas);
    return sample_z_path_for(cfg, ms, noise, rng);
}

SpectralField initial(ModeSetPtr ms, double alpha, double norm,
                      std::uint64_t seed = 1)
{
    Rng rng = make_stream(seed, streams::initial_condition);
    return scaled_to_norm(random_field(ms, 1.5, 1.0, rng), alpha, norm);
}
}  // namespace

TEST_CASE("cut-off profile")
{
    CHECK(chi(0.0) == 1.0);
    CHECK(chi(0.5) == 1.0);
    CHECK(chi(1.0) == 1.0);
    CHECK(chi(1.5) == doctest::Approx(0.5));
    CHECK(chi(2.0) == 0.0);
    CHECK(chi(3.0) == 0.0);
    CHECK(chi_prime(3.0) == 0.0);
    CHECK(chi_prime(0.5) == 0.0);
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i)
    {
        double x = 3.0 * i / 1000;
        CHECK(chi(x) <= prev);
        CHECK(chi(x) + chi(3 - x) == doctest::Approx(1.0));
        prev = chi(x);
        CHECK(chi_prime(x) <= 0);
    }
    for (double x : {1.1, 1.3, 1.5, 1.77, 1.95})
    {
        double h = 1e-6;
        double fd = (chi(x + h) - chi(x - h)) / (2 * h);
        CHECK(chi_prime(x) == doctest::Approx(fd).epsilon(1e-6));
    }
    double R = 5;
    CHECK(chi_R(0.9 * R, R) == 1.0);
    CHECK(chi_R(2 * R, R) == 0.0);
    CHECK(chi_R_prime(1.5 * R, R) == doctest::Approx(chi_prime(1.5) / R));
    CHECK_THROWS_AS(chi_R(1.0, 0.5), std::invalid_argument);
    CHECK(chi_prime_sup() == doctest::Approx(-chi_prime(1.5)).epsilon(1e-6));
}

TEST_CASE("cut-off window")
{
    NoiseSpec noise{0.25, 1.0};
    CHECK((CutoffSpec{1.2, 5}.problems(noise).empty()));
    CHECK((CutoffSpec{0.4, 5}.problems(noise).size() == 1));
    CHECK((CutoffSpec{1.5, 5}.problems(noise).size() == 1));
    CHECK((CutoffSpec{1.2, 0.5}.problems(noise).size() == 1));
    CHECK_THROWS_AS((CutoffSpec{0.5, 5}.validate(noise)), std::invalid_argument);
    CHECK_NOTHROW((CutoffSpec{2.0, 5}.validate({0.75, 1.0})));
}

TEST_CASE("sim config validation")
{
    SimConfig cfg;
    CHECK(cfg.problems().empty());
    cfg.dt = 0.3;
    cfg.T = 1.0;
    CHECK(cfg.problems().size() == 1);
    cfg.dt = 2.0;
    CHECK(!cfg.problems().empty());
    cfg = SimConfig{};
    cfg.N = 0;
    cfg.nu = -1;
    CHECK(cfg.problems().size() == 2);
    CHECK(parse_integrator("midpoint") == Integrator::exponential_midpoint);
    CHECK(to_string(Integrator::exponential_euler) == "exponential-euler");
    CHECK_THROWS(parse_integrator("rk4"));
}

TEST_CASE("pathwise right-hand side")
{
    auto ms = ModeSet::cube(2);
    SpectralField zero(ms);
    PathwiseDynamics cut(1.0, CutoffSpec{1.2, 1.0}, true);
    CHECK(cut.rhs_v(zero, zero).is_zero());

    auto v = initial(ms, 1.2, 2.5);
    auto r = cut.rhs_v(v, zero);
    auto stokes = apply_power(v, 1.0);
    stokes *= -1.0;
    CHECK(r == stokes);

    PathwiseDynamics free(1.0, std::nullopt, true);
    auto small = initial(ms, 1.2, 0.5);
    auto expect = stokes;
    auto fr = free.rhs_v(small, zero);
    auto b = bilinear(small, small);
    auto diff = fr + apply_power(small, 1.0) + b;
    CHECK(sobolev_norm(diff, 0) < 1e-13);

    // one exponential step approaches the vector field as dt -> 0
    SimConfig cfg;
    cfg.nu = 1.0;
    double prev = HUGE_VAL;
    for (double dt : {1e-2, 1e-3, 1e-4})
    {
        ExponentialStepper st(free, ms, dt, Integrator::exponential_euler);
        SpectralField w = small;
        st.step(w, zero, nullptr);
        auto fd = w - small;
        fd *= 1.0 / dt;
        double err = sobolev_norm(fd - fr, 0);
        CHECK(err < prev / 5);
        prev = err;
    }
}

TEST_CASE("simulation: trivial and dissipative runs")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.5;
    cfg.record_norms = {0.0, 1.0};
    auto zp = silent_path(ms, cfg);

    auto rec0 = simulate(SpectralField(ms), cfg, std::nullopt, zp);
    CHECK(rec0.times.size() == 51);
    for (double n : rec0.series(1.0).u)
        CHECK(n == 0.0);
    CHECK(rec0.final_u->is_zero());

    cfg.nu = 2.0;
    auto x = initial(ms, 1.0, 0.3);
    auto rec = simulate(x, cfg, std::nullopt, zp);
    auto const& n1 = rec.series(1.0).u;
    for (std::size_t i = 1; i < n1.size(); ++i)
        CHECK(n1[i] < n1[i - 1]);
    // z = 0, no cut-off: no work term and kinetic energy decays
    for (std::size_t i = 0; i < rec.work.size(); ++i)
        CHECK(std::abs(rec.work[i]) < 1e-14);
    for (std::size_t i = 1; i < rec.kinetic.size(); ++i)
        CHECK(rec.kinetic[i] <= rec.kinetic[i - 1]);
    for (std::size_t i = 1; i < rec.dissipation.size(); ++i)
        CHECK(rec.dissipation[i] >= rec.dissipation[i - 1]);
    CHECK(rec.max_divergence_residual < 1e-12);
    CHECK_THROWS_AS(rec.series(0.7), std::invalid_argument);
    CHECK(!rec.aborted);
}

TEST_CASE("energy ledger for the Stokes flow is pure quadrature error")
{
    auto ms = ModeSet::cube(2);
    auto x = initial(ms, 0.0, 1.0);
    double prev = HUGE_VAL;
    for (double dt : {0.02, 0.01, 0.005})
    {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.T = 0.4;
        cfg.nonlinear = false;
        auto rec = simulate(x, cfg, std::nullopt, silent_path(ms, cfg));
        // linear part is propagated exactly
        auto exact = apply_semigroup(x, cfg.nu, cfg.T);
        CHECK(rec.kinetic.back()
              == doctest::Approx(0.5 * pairing(exact, exact)).epsilon(1e-12));
        double res = std::abs(energy_ledger(rec, 0.0, 0.4));
        CHECK(res < prev / 3.5);  // trapezoid rule: second order
        prev = res;
    }
}

TEST_CASE("energy ledger errors and sign conventions")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.1;
    auto rec = simulate(initial(ms, 1.0, 1.0), cfg, std::nullopt,
                        silent_path(ms, cfg));
    CHECK_THROWS_AS(energy_ledger(rec, 0.0, 0.015), std::invalid_argument);
    CHECK_THROWS_AS(energy_ledger(rec, 0.05, 0.05), std::invalid_argument);
    CHECK_NOTHROW(energy_ledger(rec, 0.02, 0.05));
}

TEST_CASE("energy ledger converges under step halving on a cut-off run")
{
    auto ms = ModeSet::cube(3);
    NoiseSpec noise{0.25, 1.0};
    CutoffSpec cut{1.2, 5.0};
    SimConfig fine;
    fine.dt = 0.0025 / 4;
    fine.T = 0.2;
    auto zp = noisy_path(ms, fine, noise, 3);
    auto x = initial(ms, 1.2, 4.0);
    std::vector<double> res;
    for (std::size_t stride : {4, 2, 1})
    {
        SimConfig cfg = fine;
        cfg.dt = fine.dt * double(stride);
        auto rec = simulate(x, cfg, cut, zp.subsample(stride));
        res.push_back(std::abs(energy_ledger(rec, 0.0, cfg.T)));
    }
    CHECK(res[1] < res[0]);
    CHECK(res[2] < res[1]);
}

TEST_CASE("stopping time detection")
{
    TrajectoryRecord rec;
    rec.times = {0.0, 1.0, 1.1, 1.2};
    double R = 4.0, d = 0.5;
    rec.norms.push_back({1.2, {1.0, R - d, R + d, R + 2 * d}, {}, {}});
    auto tau = detect_stopping(rec, 1.2, R);
    REQUIRE(tau);
    CHECK(*tau == doctest::Approx(1.05));
    CHECK(!detect_stopping(rec, 1.2, 10.0));
    CHECK_THROWS_AS(detect_stopping(rec, 2.0, R), std::invalid_argument);
    // exactly on a sample
    rec.norms[0].u = {1.0, R, R + 1, R + 2};
    CHECK(*detect_stopping(rec, 1.2, R) == 1.0);

    // monotone in R on a stored trajectory
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.T = 0.5;
    auto run = simulate(initial(ms, 1.2, 1.0), cfg, std::nullopt,
                        noisy_path(ms, cfg, {0.25, 8.0}, 4));
    cfg.record_norms = {1.2};
    double last = 0;
    for (double r = 1.0; r < 6; r += 0.25)
    {
        auto t = detect_stopping(run.times, run.series(1.0).u, r);
        double v = t ? *t : HUGE_VAL;
        CHECK(v >= last);
        last = v;
    }
}

TEST_CASE("cut-off and free systems agree before the stopping time")
{
    auto ms = ModeSet::cube(2);
    NoiseSpec noise{0.25, 6.0};
    CutoffSpec cut{1.2, 3.0};
    SimConfig cfg;
    cfg.dt = 0.005;
    cfg.T = 1.0;
    int crossed = 0;
    for (std::uint64_t s = 0; s < 6; ++s)
    {
        auto x = initial(ms, cut.alpha, cut.R / 3, s);
        auto rep = couple_and_compare(x, cfg, cut, noisy_path(ms, cfg, noise, s));
        CHECK(rep.pre_tau_sup <= 10 * rep.local_tolerance);
        if (rep.tau)
            ++crossed;
    }
    CHECK(crossed > 0);

    // far-away radius: never stopped and identical throughout
    CutoffSpec wide{1.2, 1e4};
    auto x = initial(ms, 1.2, 1.0);
    auto rep = couple_and_compare(x, cfg, wide, noisy_path(ms, cfg, noise, 9));
    CHECK(!rep.tau);
    CHECK(rep.pre_tau_sup == 0.0);
    CHECK(rep.post_tau_sup == 0.0);

    CHECK_THROWS_AS(couple_and_compare(initial(ms, 1.2, 4.0), cfg, cut,
                                       noisy_path(ms, cfg, noise, 1)),
                    std::invalid_argument);
}

TEST_CASE("tangent flow")
{
    auto ms = ModeSet::cube(2);
    NoiseSpec noise{0.25, 2.0};
    CutoffSpec cut{1.2, 3.0};
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.3;
    auto zp = noisy_path(ms, cfg, noise, 5);
    auto x = initial(ms, 1.2, 2.0);
    Rng rng = make_stream(5, streams::direction);
    auto h = scaled_to_norm(random_field(ms, 1.5, 1.0, rng), 1.2, 1.0);

    auto t0 = tangent_integrate(x, SpectralField(ms), cfg, cut, zp);
    CHECK(t0.final_tangent.is_zero());

    auto t1 = tangent_integrate(x, h, cfg, cut, zp);
    auto t3 = tangent_integrate(x, 3.0 * h, cfg, cut, zp);
    CHECK(sobolev_norm(t3.final_tangent - 3.0 * t1.final_tangent, 1.2)
          <= 1e-12 * sobolev_norm(t3.final_tangent, 1.2));
    for (std::size_t i = 1; i < t1.energy_integral.size(); ++i)
        CHECK(t1.energy_integral[i] >= t1.energy_integral[i - 1]);

    for (auto integ : {Integrator::exponential_euler, Integrator::exponential_midpoint})
    {
        SimConfig c = cfg;
        c.integrator = integ;
        auto path = noisy_path(ms, c, noise, 6);
        auto tan = tangent_integrate(x, h, c, cut, path);
        auto base = final_state(x, c, cut, path);
        std::vector<double> err;
        for (double eps : {1e-3, 1e-4, 1e-5})
        {
            auto fd = final_state(x + eps * h, c, cut, path) - base;
            fd *= 1.0 / eps;
            err.push_back(sobolev_norm(tan.final_tangent - fd, 1.2));
        }
        CHECK(err[0] / err[1] > 8);
        CHECK(err[0] / err[1] < 12);
        CHECK(err[1] / err[2] > 8);
        CHECK(err[1] / err[2] < 12);
    }
}

TEST_CASE("initial-condition continuity along a fixed path")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.5;
    CutoffSpec cut{1.2, 4.0};
    auto zp = noisy_path(ms, cfg, {0.25, 2.0}, 7);
    auto x = initial(ms, 1.2, 1.0);
    Rng rng = make_stream(7, streams::direction);
    auto h = scaled_to_norm(random_field(ms, 1.0, 1.0, rng), 1.2, 0.5);
    auto base = final_state(x, cfg, cut, zp);
    double prev = HUGE_VAL;
    for (int j = 0; j < 6; ++j)
    {
        double d = sobolev_norm(final_state(x + h, cfg, cut, zp) - base, 1.6);
        CHECK(d < prev);
        prev = d;
        h *= 0.5;
    }
}

TEST_CASE("integrators converge to each other under refinement")
{
    auto ms = ModeSet::cube(2);
    NoiseSpec noise{0.25, 2.0};
    CutoffSpec cut{1.2, 4.0};
    SimConfig fine;
    fine.dt = 0.001;
    fine.T = 0.4;
    fine.integrator = Integrator::exponential_midpoint;
    auto zp = noisy_path(ms, fine, noise, 8);
    auto x = initial(ms, 1.2, 2.0);
    double prev = HUGE_VAL;
    for (std::size_t stride : {16, 8, 4})
    {
        SimConfig e = fine;
        e.dt = 0.0005 * double(stride);
        e.integrator = Integrator::exponential_euler;
        SimConfig m = e;
        m.integrator = Integrator::exponential_midpoint;
        auto ue = final_state(x, e, cut, zp.subsample(stride));
        auto um = final_state(x, m, cut, zp.subsample(stride / 2));
        double d = sobolev_norm(ue - um, 1.2);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("mild-solution bound has a finite empirical constant")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 1.0;
    double alpha = 1.2, beta = 1.4;
    cfg.record_norms = {alpha, beta};
    CutoffSpec cut{alpha, 4.0};
    double worst = 0;
    for (std::uint64_t s = 0; s < 4; ++s)
    {
        auto x = initial(ms, alpha, 1.0, s);
        auto rec = simulate(x, cfg, cut, noisy_path(ms, cfg, {0.25, 2.0}, s));
        auto const& sb = rec.series(beta);
        double lhs = 0, zsup = 0;
        for (std::size_t i = 0; i < rec.times.size(); ++i)
        {
            double w = std::pow(std::min(rec.times[i], 1.0), (beta - alpha) / 2);
            lhs = std::max(lhs, w * sb.v[i]);
            zsup = std::max(zsup, sb.z[i]);
        }
        worst = std::max(worst, lhs / (sobolev_norm(x, alpha) + zsup));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst > 0);
}

TEST_CASE("runaway runs are flagged, not thrown")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.T = 20;
    cfg.nu = 0.01;
    auto x = initial(ms, 1.0, 1e3);
    auto rec = simulate(x, cfg, std::nullopt, silent_path(ms, cfg));
    CHECK(rec.aborted);
    CHECK(!rec.abort_reason.empty());
    CHECK(rec.times.size() < 201);
}

TEST_CASE("z path alignment is checked")
{
    auto ms = ModeSet::cube(2);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 0.1;
    SimConfig other = cfg;
    other.dt = 0.03;
    other.T = 0.09;
    auto x = initial(ms, 1.0, 1.0);
    CHECK_THROWS_AS(simulate(x, cfg, std::nullopt, silent_path(ms, other)),
                    std::invalid_argument);
    SimConfig mid = cfg;
    mid.integrator = Integrator::exponential_midpoint;
    CHECK_THROWS_AS(simulate(x, mid, std::nullopt, silent_path(ms, cfg)),
                    std::invalid_argument);
    CHECK_NOTHROW(simulate(x, mid, std::nullopt, silent_path(ms, mid)));
    CHECK_THROWS_AS(simulate(SpectralField(ModeSet::cube(3)), cfg, std::nullopt,
                             silent_path(ms, cfg)),
                    std::invalid_argument);
}
