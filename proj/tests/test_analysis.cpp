#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "tsns/cutoff.hpp"
#include "tsns/inequalities.hpp"
#include "tsns/monte_carlo.hpp"

using namespace tsns;

namespace
{
// Field a·t₁ on the single pair ±k, t₁ the first tangent basis vector
SpectralField single_mode(ModeSetPtr ms, WaveVector k, double a)
{
    SpectralField u(ms);
    auto slot = ms->find(k);
    REQUIRE(slot);
    auto const& t1 = ms->tangent_basis(slot->index)[0];
    for (int j = 0; j < 3; ++j)
        u[slot->index][j] = a * t1[j];
    return u;
}

McSetup linear_setup(std::size_t samples)
{
    McSetup s;
    s.sim.N = 2;
    s.sim.dt = 0.05;
    s.sim.T = 0.5;
    s.sim.nonlinear = false;
    s.noise = {0.25, 1.0};
    s.samples = samples;
    s.seed = 11;
    return s;
}

McSetup cutoff_setup(std::size_t samples)
{
    McSetup s;
    s.sim.N = 2;
    s.sim.dt = 0.02;
    s.sim.T = 0.5;
    s.noise = {0.25, 1.0};
    s.cutoff = CutoffSpec{1.2, 5};
    s.samples = samples;
    s.seed = 5;
    return s;
}
}  // namespace

TEST_CASE("test functionals")
{
    auto ms = ModeSet::cube(2);
    auto u = single_mode(ms, {1, 0, 0}, 0.7);
    CHECK(TestFunctional::parse("const:2.5")(u) == 2.5);
    CHECK(TestFunctional::parse("coord:1,0,0")(u) == doctest::Approx(0.7));
    CHECK(TestFunctional::parse("coord:1,0,0:2")(u) == doctest::Approx(1.4));
    CHECK(TestFunctional::parse("tanh-coord:1,0,0")(u)
          == doctest::Approx(std::tanh(0.7)));
    CHECK(TestFunctional::parse("tanh-energy:1")(u)
          == doctest::Approx(std::tanh(sobolev_norm(u, 1) * sobolev_norm(u, 1))));
    CHECK(TestFunctional::parse("clipped-norm:1:10")(u)
          == doctest::Approx(sobolev_norm(u, 1) / 10));
    CHECK(TestFunctional::parse("clipped-norm:1:0.1")(u) == 1.0);
    CHECK_FALSE(TestFunctional::parse("coord:1,0,0").bounded());
    CHECK(TestFunctional::parse("tanh-pairing:3").bounded());
    CHECK_THROWS(TestFunctional::parse("nope:1"));
    CHECK_THROWS(TestFunctional::parse("coord:0,0,0"));

    // directional derivatives against central differences
    Rng rng = make_stream(2, 0);
    auto x = random_field(ms, 1.5, 0.5, rng);
    auto h = random_field(ms, 1.5, 0.5, rng);
    for (char const* spec : {"tanh-coord:1,1,0:2", "tanh-energy:1.2:0.3",
                             "tanh-pairing:4:0.5", "clipped-norm:0.5:100"})
    {
        auto phi = TestFunctional::parse(spec);
        double e = 1e-6;
        double fd = (phi(x + e * h) - phi(x - e * h)) / (2 * e);
        CHECK(phi.derivative(x, h) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("transition estimate: constant functional and standard error")
{
    auto setup = cutoff_setup(400);
    auto ms = setup.modes();
    Rng rng = make_stream(1, streams::initial_condition);
    auto x = scaled_to_norm(random_field(ms, 1.5, 1, rng), 1.2, 1.0);
    std::vector<TestFunctional> phis{TestFunctional::parse("const:1"),
                                     TestFunctional::parse("tanh-coord:1,0,0")};
    auto est = transition_estimate(phis, x, 0.5, setup);
    CHECK(est[0].mean == 1.0);
    CHECK(est[0].se == 0.0);
    CHECK(est[0].n == 400);

    setup.samples = 1600;
    auto est4 = transition_estimate(phis, x, 0.5, setup);
    CHECK(est[1].se / est4[1].se == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("transition estimate: linear dynamics match the analytic mean")
{
    auto setup = linear_setup(4000);
    auto ms = setup.modes();
    for (WaveVector k : {WaveVector{1, 0, 0}, WaveVector{1, 1, 0}})
    {
        auto x = single_mode(ms, k, 0.8);
        std::string id = "coord:" + std::to_string(k.x) + ","
                         + std::to_string(k.y) + "," + std::to_string(k.z);
        std::vector<TestFunctional> phis{TestFunctional::parse(id)};
        auto est = transition_estimate(phis, x, 0.5, setup);
        double exact = std::exp(-k.norm2() * 0.5) * 0.8;
        CHECK(std::abs(est[0].mean - exact) <= 3 * est[0].se);
    }
}

TEST_CASE("gradient weight: linear case and constants")
{
    auto setup = linear_setup(4000);
    auto ms = setup.modes();
    auto x = single_mode(ms, {1, 0, 0}, 0.3);
    auto h = single_mode(ms, {1, 0, 0}, 1.0);
    std::vector<TestFunctional> phis{TestFunctional::parse("coord:1,0,0"),
                                     TestFunctional::parse("const:3")};
    auto est = bel_gradient(phis, x, h, 0.5, 1e-4, setup);
    double exact = std::exp(-0.5);
    CHECK(std::abs(est[0].bel.mean - exact) <= 3 * est[0].bel.se);
    CHECK(est[0].fd.mean == doctest::Approx(exact).epsilon(1e-8));
    CHECK(est[0].pathwise.mean == doctest::Approx(exact).epsilon(1e-12));
    CHECK(std::abs(est[1].bel.mean) <= 3 * est[1].bel.se);
    CHECK(est[1].fd.mean == 0.0);

    auto bad = setup;
    bad.noise.c0 = 0;
    CHECK_THROWS_AS(bel_gradient(phis, x, h, 0.5, 1e-4, bad),
                    std::invalid_argument);
    bad = setup;
    bad.sim.integrator = Integrator::exponential_midpoint;
    CHECK_THROWS_AS(bel_gradient(phis, x, h, 0.5, 1e-4, bad),
                    std::invalid_argument);
}

TEST_CASE("gradient weight agrees with central differences under the cut-off")
{
    auto setup = cutoff_setup(3000);
    auto ms = setup.modes();
    Rng rng = make_stream(3, streams::initial_condition);
    auto x = scaled_to_norm(random_field(ms, 1.5, 1, rng), 1.2, 5.0 / 3);
    Rng hr = make_stream(3, streams::direction);
    auto h = scaled_to_norm(random_field(ms, 1.5, 1, hr), 1.2, 1.0);
    std::vector<TestFunctional> phis{TestFunctional::parse("tanh-coord:1,0,0"),
                                     TestFunctional::parse("tanh-energy:1:0.2")};
    auto est = bel_gradient(phis, x, h, 0.5, 1e-4, setup);
    for (auto const& e : est)
    {
        CAPTURE(e.functional);
        CHECK(std::abs(e.difference.mean) <= 3 * e.difference.se);
        CHECK(e.fd.mean == doctest::Approx(e.pathwise.mean).epsilon(1e-5));
    }
}

TEST_CASE("Feller modulus")
{
    auto setup = cutoff_setup(200);
    auto ms = setup.modes();
    Rng rng = make_stream(3, streams::initial_condition);
    auto x = scaled_to_norm(random_field(ms, 1.5, 1, rng), 1.2, 1.0);
    std::vector<TestFunctional> phis{TestFunctional::parse("tanh-coord:1,0,0")};
    std::vector<double> ts{0.24, 0.5};

    SpectralField zero(ms);
    auto rep0 = feller_modulus(phis, x, zero, 2, ts, 1.2, setup);
    for (auto const& r : rep0.rows)
    {
        CHECK(r.delta == 0.0);
        CHECK(r.delta_se == 0.0);
    }

    Rng hr = make_stream(3, streams::direction);
    auto h = scaled_to_norm(random_field(ms, 1.5, 1, hr), 1.2, 0.5);
    auto rep = feller_modulus(phis, x, h, 3, ts, 1.2, setup);
    REQUIRE(rep.rows.size() == 8);
    CHECK(rep.rows[1].h_norm == doctest::Approx(0.25));
    CHECK(rep.rows[0].modulus
          == doctest::Approx(0.5 * std::log(2 * std::numbers::e)));
    for (auto const& r : rep.rows)
        CHECK(std::isfinite(r.ratio));

    CHECK_THROWS_AS(feller_modulus(phis, x, h, 2, std::vector<double>{0.251},
                                   1.2, setup),
                    std::invalid_argument);
    CHECK_THROWS_AS(feller_modulus(phis, x, 2.5 * h, 2, ts, 1.2, setup),
                    std::invalid_argument);
}

TEST_CASE("martingale diagnostic")
{
    auto setup = cutoff_setup(3000);
    setup.sim.dt = 0.005;
    auto ms = setup.modes();
    Rng rng = make_stream(4, streams::initial_condition);
    auto x = scaled_to_norm(random_field(ms, 1.5, 1, rng), 1.2, 1.0);
    auto phi = single_mode(ms, {1, 0, 0}, 1.0);
    auto m = martingale_check(phi, x, 0.5, setup);
    CHECK(std::abs(m.mean.mean) <= 3 * m.mean.se);
    CHECK(std::abs(m.variance - m.expected_variance) <= 3 * m.variance_se);
    // single pair at |k| = 1: two tangential components, each variance c0²
    CHECK(m.expected_variance == doctest::Approx(0.5 * 2));
}

TEST_CASE("tangent probe")
{
    auto setup = cutoff_setup(50);
    auto ms = setup.modes();
    Rng rng = make_stream(4, streams::initial_condition);
    auto x = scaled_to_norm(random_field(ms, 1.5, 1, rng), 1.2, 1.0);
    Rng hr = make_stream(4, streams::direction);
    auto h = scaled_to_norm(random_field(ms, 1.5, 1, hr), 1.2, 1.0);
    std::vector<double> ts{0.1, 0.2, 0.5};
    auto probe = tangent_probe(x, h, ts, 1.2, setup);
    REQUIRE(probe.size() == 3);
    for (std::size_t i = 0; i < probe.size(); ++i)
    {
        CHECK(std::isfinite(probe[i].energy.mean));
        CHECK(probe[i].low_norm.mean >= sobolev_norm(h, 1.0) - 1e-12);
        if (i > 0)
        {
            CHECK(probe[i].energy.mean > probe[i - 1].energy.mean);
            CHECK(probe[i].low_norm.mean >= probe[i - 1].low_norm.mean);
        }
    }
}

TEST_CASE("blow-up exponent and noiseless inclusion")
{
    CHECK(blowup_exponent(1.2) == doctest::Approx(4 / 1.4));
    CHECK(blowup_exponent(2.0) == doctest::Approx(2.0));
    CHECK(blowup_exponent(1.5, 0.5) == doctest::Approx(4.0));
    CHECK_THROWS(blowup_exponent(1.5));
    CHECK_THROWS(blowup_exponent(0.5));

    McSetup setup;
    setup.sim.N = 2;
    setup.sim.dt = 0.01;
    setup.sim.T = 0.2;
    setup.noise = {0.25, 0.0};
    setup.samples = 8;
    BlowupOptions opts;
    opts.R_values = {5};
    opts.T_values = {0.1, 0.2};
    auto rep = blowup_mc(opts, setup);
    REQUIRE(rep.radii.size() == 1);
    auto const& r = rep.radii[0];
    CHECK(r.z_event == 8);
    CHECK(r.violations == 0);
    for (double s : r.z_exit)
        CHECK(std::isinf(s));
    REQUIRE(rep.cells.size() == 2);
    CHECK(rep.cells[0].abscissa == doctest::Approx(250));
    for (auto const& c : rep.cells)
        CHECK(c.ci_lo <= c.p_hat);

    opts.x_fraction = 0.4;
    CHECK_THROWS_AS(blowup_mc(opts, setup), std::invalid_argument);
}

TEST_CASE("bilinear estimate checker")
{
    CHECK(trilinear_admissible(1, 1, -0.5));
    CHECK_FALSE(trilinear_admissible(0, 0, 0));
    CHECK_FALSE(trilinear_admissible(1.5, 0, 0));
    CHECK(trilinear_admissible(2, 2, -1));

    auto rep = bnostro_check(1, 1, -0.5, 40, 3, 9);
    CHECK(rep.admissible);
    CHECK(rep.cutoff == 3);
    CHECK(rep.trials == 40);
    CHECK(rep.running_max.size() == 40);
    CHECK(std::is_sorted(rep.running_max.begin(), rep.running_max.end()));
    CHECK(rep.constant == rep.running_max.back());
    CHECK(rep.constant > 0);

    // a longer run with the same seed only extends the running maximum
    auto more = bnostro_check(1, 1, -0.5, 80, 3, 9);
    CHECK(std::equal(rep.running_max.begin(), rep.running_max.end(),
                     more.running_max.begin()));
    CHECK(more.constant >= rep.constant);
}

TEST_CASE("smoothing exponent")
{
    CHECK(corollary_delta(2, 2).value == doctest::Approx(1.0));
    CHECK_FALSE(corollary_delta(2, 2).strict_bound);
    CHECK(corollary_delta(1, 1).value == doctest::Approx(-0.5));
    auto d = corollary_delta(1.5, 1.5);
    CHECK(d.strict_bound);
    CHECK(d.value == doctest::Approx(0.5));
    CHECK(corollary_delta(0, 0).strict_bound);
    CHECK_THROWS_AS(corollary_delta(-1, 1), std::invalid_argument);
}

TEST_CASE("lattice power sums")
{
    CHECK(series1(0, 1).sum == 6.0);
    // |k|^{-3} against log(1+k0)
    double max_ratio = 0;
    for (int k0 = 1; k0 <= 64; k0 *= 2)
        max_ratio = std::max(max_ratio, series1(-3, k0).ratio);
    CHECK(max_ratio < 100);
    CHECK(series1(-3, 64).ratio < 1.5 * series1(-3, 32).ratio);

    double prev = 0, prev_inc = std::numeric_limits<double>::infinity();
    for (int k0 = 4; k0 <= 32; k0 *= 2)
    {
        double s = series1(-4, k0).sum;
        CHECK(s > prev);
        if (prev > 0)
        {
            CHECK(s - prev < prev_inc);
            prev_inc = s - prev;
        }
        prev = s;
    }

    double a = series2(1, 1, 0, {2, 0, 0}, 16);
    double b = series2(1, 1, 0, {2, 0, 0}, 32);
    CHECK(std::isfinite(a));
    CHECK(b == doctest::Approx(a).epsilon(0.05));
    CHECK(series2_hypotheses(1, 1, 0));
    CHECK_THROWS_AS(series2(1, 1, 0, {1, 0, 0}, 4), std::invalid_argument);
    for (WaveVector l : {WaveVector{2, 0, 0}, WaveVector{3, 4, 0},
                         WaveVector{5, 5, 5}, WaveVector{-7, 2, 9}})
        CHECK(series2_constraint_holds(l));
}

TEST_CASE("weight function bound")
{
    double bound = weight_bound(0.5, 0.5, 1, 1);
    CHECK(bound == doctest::Approx(std::numbers::pi + std::sqrt(std::numbers::pi)));
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i)
        grid.push_back(0.1 * i);
    auto chk = weight_bound_check(0.5, 0.5, 1, 1, grid);
    CHECK(chk.passed);
    CHECK(chk.max_value <= chk.bound);
    CHECK(chk.small_t_error < 1e-8);
    CHECK(chk.weight_excess <= 0);
    CHECK(weight_convolution(0.25, 0.3, 0.6, 0.5, 2.0)
          == doctest::Approx(std::pow(0.25, 0.4) * std::beta(0.7, 0.4))
                 .epsilon(1e-9));
    CHECK_THROWS(weight_bound_check(1.0, 0.5, 1, 1, grid));
    CHECK_THROWS(weight_bound_check(0.5, 0.5, 0, 1, grid));
}

TEST_CASE("cut-off Lipschitz ratio")
{
    double r = chiprop_ratio(1000, 4.0);
    CHECK(std::isfinite(r));
    CHECK(r > 0);
    CHECK(r <= chiprop_bound());
}
