#include "tsns/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tsns
{
std::string to_string(Integrator integ)
{
    switch (integ)
    {
        case Integrator::exponential_euler:
            return "exponential-euler";
        case Integrator::exponential_midpoint:
            return "exponential-midpoint";
    }
    return "?";
}

Integrator parse_integrator(std::string const& name)
{
    if (name == "exponential-euler" || name == "euler")
        return Integrator::exponential_euler;
    if (name == "exponential-midpoint" || name == "midpoint")
        return Integrator::exponential_midpoint;
    throw std::invalid_argument("unknown integrator '" + name + "'");
}

//---------------------------------------------------------------------------//

std::vector<std::string> SimConfig::problems() const
{
    std::vector<std::string> out;
    auto bad = [&out](std::string msg) { out.push_back(std::move(msg)); };
    if (!(nu > 0) || !std::isfinite(nu))
        bad("nu must be positive");
    if (!(dt > 0) || !std::isfinite(dt))
        bad("dt must be positive");
    if (!(T > 0) || !std::isfinite(T))
        bad("T must be positive");
    if (dt > 0 && T > 0)
    {
        if (!(dt < T))
            bad("dt must be smaller than T");
        double ratio = T / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            bad("T must be an integer multiple of dt");
    }
    if (N < 1)
        bad("N must be at least 1");
    for (double a : record_norms)
        if (!std::isfinite(a))
            bad("record_norms entries must be finite");
    return out;
}

void SimConfig::validate() const
{
    auto p = problems();
    if (!p.empty())
        throw std::invalid_argument(p.front());
}

std::size_t SimConfig::steps() const
{
    return static_cast<std::size_t>(std::llround(T / dt));
}

std::size_t SimConfig::z_refinement() const
{
    return integrator == Integrator::exponential_midpoint ? 2 : 1;
}

ZPath sample_z_path_for(SimConfig const& cfg, ModeSetPtr modes,
                        NoiseSpec const& noise, Rng& rng)
{
    std::size_t r = cfg.z_refinement();
    auto grid = uniform_grid(cfg.dt / double(r), cfg.steps() * r);
    return sample_z_path(std::move(modes), grid, cfg.nu, noise, rng);
}

//---------------------------------------------------------------------------//

PathwiseDynamics::PathwiseDynamics(double nu, std::optional<CutoffSpec> cutoff,
                                   bool nonlinear)
    : nu_(nu), cutoff_(cutoff), nonlinear_(nonlinear)
{
    if (!(nu > 0))
        throw std::invalid_argument("viscosity must be positive");
    if (cutoff_ && !(cutoff_->R >= 1))
        throw std::invalid_argument("cut-off radius R must be >= 1");
}

NonlinearEval PathwiseDynamics::evaluate(SpectralField u) const
{
    auto ms = u.mode_set_ptr();
    NonlinearEval e{std::move(u), 0.0, 1.0, 0.0, SpectralField(ms),
                    SpectralField(ms)};
    if (cutoff_)
    {
        e.norm = sobolev_norm(e.u, cutoff_->alpha);
        e.weight = chi_R(e.norm, cutoff_->R);
        e.dweight = chi_R_prime(e.norm, cutoff_->R);
    }
    if (nonlinear_ && e.weight != 0)
    {
        e.buu = bilinear(e.u, e.u);
        e.value = e.buu;
        e.value *= -e.weight;
    }
    return e;
}

SpectralField PathwiseDynamics::derivative(NonlinearEval const& at,
                                           SpectralField const& w) const
{
    SpectralField out(w.mode_set_ptr());
    if (!nonlinear_ || (at.weight == 0 && at.dweight == 0))
        return out;
    if (at.weight != 0)
    {
        out = bilinear(w, at.u);
        out += bilinear(at.u, w);
        out *= -at.weight;
    }
    if (cutoff_ && at.dweight != 0 && at.norm > 0)
    {
        double c = -at.dweight * sobolev_inner(at.u, w, cutoff_->alpha)
                   / at.norm;
        out.axpy(c, at.buu);
    }
    return out;
}

SpectralField PathwiseDynamics::rhs_v(SpectralField const& v,
                                      SpectralField const& z) const
{
    SpectralField out = apply_power(v, 1.0);
    out *= -nu_;
    out += evaluate(v + z).value;
    return out;
}

//---------------------------------------------------------------------------//

ExponentialStepper::Factors
ExponentialStepper::make_factors(ModeSet const& ms, double nu, double h)
{
    Factors f;
    f.decay.resize(ms.size());
    f.phi.resize(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i)
    {
        double lambda = nu * ms.k2(i);
        f.decay[i] = std::exp(-lambda * h);
        f.phi[i] = -std::expm1(-lambda * h) / lambda;
    }
    return f;
}

ExponentialStepper::ExponentialStepper(PathwiseDynamics const& dyn,
                                       ModeSetPtr modes, double dt,
                                       Integrator integ)
    : dyn_(dyn)
    , modes_(std::move(modes))
    , dt_(dt)
    , integ_(integ)
    , full_(make_factors(*modes_, dyn.nu(), dt))
    , half_(make_factors(*modes_, dyn.nu(), 0.5 * dt))
{
    if (!(dt > 0))
        throw std::invalid_argument("time step must be positive");
}

SpectralField ExponentialStepper::propagate(SpectralField const& v,
                                            SpectralField const& n,
                                            bool half) const
{
    Factors const& f = half ? half_ : full_;
    SpectralField out(v.mode_set_ptr());
    for (std::size_t i = 0; i < v.size(); ++i)
        for (int j = 0; j < 3; ++j)
            out[i][j] = f.decay[i] * v[i][j] + f.phi[i] * n[i][j];
    return out;
}

SpectralField ExponentialStepper::phi(SpectralField const& n) const
{
    SpectralField out(n);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (auto& c : out[i])
            c *= full_.phi[i];
    return out;
}

void ExponentialStepper::step(SpectralField& v, SpectralField const& z0,
                              SpectralField const* z_half, SpectralField* w,
                              NonlinearEval const* start,
                              double* max_div) const
{
    std::optional<NonlinearEval> local;
    if (!start)
    {
        local.emplace(dyn_.evaluate(v + z0));
        start = &*local;
    }
    auto track = [max_div](SpectralField const& f) {
        if (max_div)
            *max_div = std::max(*max_div, divergence_residual(f));
    };

    if (integ_ == Integrator::exponential_euler)
    {
        if (w)
            *w = propagate(*w, dyn_.derivative(*start, *w));
        v = propagate(v, start->value);
        return;
    }

    if (!z_half)
        throw std::invalid_argument("midpoint step needs z at the half step");
    SpectralField vh = propagate(v, start->value, true);
    NonlinearEval mid = dyn_.evaluate(vh + *z_half);
    track(vh);
    track(mid.u);
    track(mid.buu);
    if (w)
    {
        SpectralField wh = propagate(*w, dyn_.derivative(*start, *w), true);
        *w = propagate(*w, dyn_.derivative(mid, wh));
    }
    v = propagate(v, mid.value);
}

//---------------------------------------------------------------------------//

namespace
{
struct ZAlign
{
    std::size_t stride = 1;
};

ZAlign align(ZPath const& zp, SimConfig const& cfg, ModeSet const& ms)
{
    cfg.validate();
    std::size_t steps = cfg.steps();
    if (zp.size() < 2)
        throw std::invalid_argument("z path must cover the simulation horizon");
    double dz = zp.uniform_step();
    double ratio = cfg.dt / dz;
    auto r = static_cast<std::size_t>(std::llround(ratio));
    if (r == 0 || std::abs(ratio - double(r)) > 1e-6 * ratio)
        throw std::invalid_argument("z path grid does not refine the time step");
    if (r % cfg.z_refinement() != 0)
        throw std::invalid_argument(
            "midpoint integration needs z at half steps");
    if (zp.size() < steps * r + 1)
        throw std::invalid_argument("z path is shorter than the horizon");
    if (!(zp.states.front().modes() == ms))
        throw std::invalid_argument("z path lives on a different mode set");
    return {r};
}

std::vector<double> with_alpha(std::vector<double> alphas,
                               std::optional<CutoffSpec> const& cutoff)
{
    if (cutoff
        && std::find(alphas.begin(), alphas.end(), cutoff->alpha)
               == alphas.end())
        alphas.push_back(cutoff->alpha);
    return alphas;
}

bool exploded(SpectralField const& v)
{
    double n = sobolev_norm(v, 0.0);
    return !std::isfinite(n) || n > 1e100;
}

double trapezoid_step(double a, double b, double h)
{
    return 0.5 * h * (a + b);
}
}  // namespace

NormSeries const& TrajectoryRecord::series(double alpha) const
{
    for (auto const& s : norms)
        if (s.alpha == alpha)
            return s;
    std::ostringstream os;
    os << "norm index " << alpha << " was not recorded";
    throw std::invalid_argument(os.str());
}

TrajectoryRecord simulate(SpectralField const& x, SimConfig const& cfg,
                          std::optional<CutoffSpec> const& cutoff,
                          ZPath const& z_path)
{
    auto const [stride] = align(z_path, cfg, x.modes());
    std::size_t const steps = cfg.steps();
    PathwiseDynamics dyn(cfg.nu, cutoff, cfg.nonlinear);
    ExponentialStepper stepper(dyn, x.mode_set_ptr(), cfg.dt, cfg.integrator);

    TrajectoryRecord rec;
    rec.nu = cfg.nu;
    rec.seed = cfg.seed;
    for (double a : with_alpha(cfg.record_norms, cutoff))
        rec.norms.push_back({a, {}, {}, {}});

    double div = 0;
    double prev_diss = 0;
    double prev_work = 0;
    SpectralField v = x - z_path.states[0];
    for (std::size_t n = 0;; ++n)
    {
        SpectralField const& z = z_path.states[n * stride];
        NonlinearEval e = dyn.evaluate(v + z);
        double t = z_path.times[n * stride];

        rec.times.push_back(t);
        for (auto& s : rec.norms)
        {
            s.u.push_back(sobolev_norm(e.u, s.alpha));
            s.v.push_back(sobolev_norm(v, s.alpha));
            s.z.push_back(sobolev_norm(z, s.alpha));
        }
        double kin = 0.5 * pairing(v, v);
        double diss = cfg.nu * sobolev_inner(v, v, 1.0);
        // ⟨z,B(u,v)⟩ = ⟨z,B(u,u)⟩ since ⟨z,B(u,z)⟩ = 0
        double work = cfg.nonlinear ? e.weight * pairing(z, e.buu) : 0.0;
        rec.kinetic.push_back(kin);
        rec.chi.push_back(e.weight);
        if (n == 0)
        {
            rec.dissipation.push_back(0);
            rec.work.push_back(0);
        }
        else
        {
            double h = t - rec.times[n - 1];
            rec.dissipation.push_back(rec.dissipation.back()
                                      + trapezoid_step(prev_diss, diss, h));
            rec.work.push_back(rec.work.back()
                               + trapezoid_step(prev_work, work, h));
        }
        prev_diss = diss;
        prev_work = work;
        for (SpectralField const* f :
             std::initializer_list<SpectralField const*>{&v, &z, &e.u, &e.buu})
            div = std::max(div, divergence_residual(*f));
        if (cfg.snapshot_every && n % cfg.snapshot_every == 0)
            rec.snapshots.push_back({t, e.u});

        if (n == steps)
        {
            rec.final_u = e.u;
            rec.final_v = v;
            break;
        }
        SpectralField const* zh = stride > 1
                                      ? &z_path.states[n * stride + stride / 2]
                                      : nullptr;
        stepper.step(v, z, zh, nullptr, &e, &div);
        if (exploded(v))
        {
            rec.aborted = true;
            std::ostringstream os;
            os << "norm explosion after step " << n + 1 << " (t = "
               << z_path.times[(n + 1) * stride] << ")";
            rec.abort_reason = os.str();
            break;
        }
    }
    rec.max_divergence_residual = div;
    if (cutoff)
        rec.tau = detect_stopping(rec, cutoff->alpha, cutoff->R);
    return rec;
}

std::optional<double> detect_stopping(std::span<double const> times,
                                      std::span<double const> norms, double R)
{
    for (std::size_t i = 0; i < norms.size(); ++i)
    {
        if (norms[i] < R)
            continue;
        if (i == 0)
            return times[0];
        double a = norms[i - 1];
        double b = norms[i];
        double f = (R - a) / (b - a);
        return times[i - 1] + f * (times[i] - times[i - 1]);
    }
    return std::nullopt;
}

std::optional<double> detect_stopping(TrajectoryRecord const& rec,
                                      double alpha, double R)
{
    return detect_stopping(rec.times, rec.series(alpha).u, R);
}

double energy_ledger(TrajectoryRecord const& rec, double s, double t)
{
    auto index_of = [&rec](double when) {
        auto it = std::lower_bound(rec.times.begin(), rec.times.end(),
                                   when - 1e-9 * std::max(1.0, std::abs(when)));
        if (it == rec.times.end()
            || std::abs(*it - when) > 1e-9 * std::max(1.0, std::abs(when)))
        {
            std::ostringstream os;
            os << "time " << when << " is not on the record grid";
            throw std::invalid_argument(os.str());
        }
        return static_cast<std::size_t>(it - rec.times.begin());
    };
    if (!(s < t))
        throw std::invalid_argument("energy ledger needs s < t");
    std::size_t i = index_of(s);
    std::size_t j = index_of(t);
    return rec.kinetic[j] + (rec.dissipation[j] - rec.dissipation[i])
           - (rec.work[j] - rec.work[i]) - rec.kinetic[i];
}

//---------------------------------------------------------------------------//

CouplingReport couple_and_compare(SpectralField const& x, SimConfig const& cfg,
                                  CutoffSpec const& cutoff,
                                  ZPath const& z_path)
{
    auto const [stride] = align(z_path, cfg, x.modes());
    std::size_t const steps = cfg.steps();
    if (sobolev_norm(x, cutoff.alpha) > cutoff.R)
        throw std::invalid_argument("initial condition already beyond R");

    PathwiseDynamics cut(cfg.nu, cutoff, cfg.nonlinear);
    PathwiseDynamics free(cfg.nu, std::nullopt, cfg.nonlinear);
    ExponentialStepper scut(cut, x.mode_set_ptr(), cfg.dt, cfg.integrator);
    ExponentialStepper sfree(free, x.mode_set_ptr(), cfg.dt, cfg.integrator);

    CouplingReport rep;
    std::vector<double> cut_norms;
    SpectralField vc = x - z_path.states[0];
    SpectralField vf = vc;
    std::optional<SpectralField> prev_n;
    for (std::size_t n = 0;; ++n)
    {
        SpectralField const& z = z_path.states[n * stride];
        NonlinearEval ec = cut.evaluate(vc + z);
        NonlinearEval ef = free.evaluate(vf + z);
        rep.times.push_back(z_path.times[n * stride]);
        cut_norms.push_back(ec.norm);
        rep.discrepancy.push_back(sobolev_norm(ec.u - ef.u, cutoff.alpha));
        if (prev_n)
        {
            SpectralField d = ec.value - *prev_n;
            rep.local_tolerance = std::max(
                rep.local_tolerance, 0.5 * sobolev_norm(scut.phi(d),
                                                        cutoff.alpha));
        }
        prev_n = ec.value;
        if (n == steps)
            break;
        SpectralField const* zh = stride > 1
                                      ? &z_path.states[n * stride + stride / 2]
                                      : nullptr;
        scut.step(vc, z, zh, nullptr, &ec);
        sfree.step(vf, z, zh, nullptr, &ef);
        if (exploded(vc) || exploded(vf))
        {
            rep.aborted = true;
            break;
        }
    }
    rep.tau = detect_stopping(rep.times, cut_norms, cutoff.R);
    for (std::size_t i = 0; i < rep.times.size(); ++i)
    {
        double d = rep.discrepancy[i];
        if (!std::isfinite(d))
            d = HUGE_VAL;
        if (!rep.tau || rep.times[i] <= *rep.tau)
            rep.pre_tau_sup = std::max(rep.pre_tau_sup, d);
        else
            rep.post_tau_sup = std::max(rep.post_tau_sup, d);
    }
    return rep;
}

//---------------------------------------------------------------------------//

TangentPath tangent_integrate(SpectralField const& x, SpectralField const& h,
                              SimConfig const& cfg,
                              std::optional<CutoffSpec> const& cutoff,
                              ZPath const& z_path,
                              std::optional<double> alpha)
{
    auto const [stride] = align(z_path, cfg, x.modes());
    if (!(h.modes() == x.modes()))
        throw std::invalid_argument("direction lives on a different mode set");
    std::size_t const steps = cfg.steps();
    PathwiseDynamics dyn(cfg.nu, cutoff, cfg.nonlinear);
    ExponentialStepper stepper(dyn, x.mode_set_ptr(), cfg.dt, cfg.integrator);

    TangentPath out{{}, alpha.value_or(cutoff ? cutoff->alpha : 1.0), {}, {},
                    SpectralField(x.mode_set_ptr()),
                    SpectralField(x.mode_set_ptr())};
    SpectralField v = x - z_path.states[0];
    SpectralField w = h;
    double prev = 0;
    for (std::size_t n = 0;; ++n)
    {
        SpectralField const& z = z_path.states[n * stride];
        double t = z_path.times[n * stride];
        double en = sobolev_inner(w, w, out.alpha + 1);
        out.times.push_back(t);
        out.tangent_norm.push_back(sobolev_norm(w, out.alpha));
        out.energy_integral.push_back(
            n == 0 ? 0.0
                   : out.energy_integral.back()
                         + trapezoid_step(prev, en, t - out.times[n - 1]));
        prev = en;
        if (n == steps)
        {
            out.final_u = v + z;
            break;
        }
        SpectralField const* zh = stride > 1
                                      ? &z_path.states[n * stride + stride / 2]
                                      : nullptr;
        stepper.step(v, z, zh, &w);
    }
    out.final_tangent = std::move(w);
    return out;
}

SpectralField final_state(SpectralField const& x, SimConfig const& cfg,
                          std::optional<CutoffSpec> const& cutoff,
                          ZPath const& z_path)
{
    auto const [stride] = align(z_path, cfg, x.modes());
    std::size_t const steps = cfg.steps();
    PathwiseDynamics dyn(cfg.nu, cutoff, cfg.nonlinear);
    ExponentialStepper stepper(dyn, x.mode_set_ptr(), cfg.dt, cfg.integrator);
    SpectralField v = x - z_path.states[0];
    for (std::size_t n = 0; n < steps; ++n)
    {
        SpectralField const* zh = stride > 1
                                      ? &z_path.states[n * stride + stride / 2]
                                      : nullptr;
        stepper.step(v, z_path.states[n * stride], zh);
    }
    return v + z_path.states[steps * stride];
}
}  // namespace tsns
