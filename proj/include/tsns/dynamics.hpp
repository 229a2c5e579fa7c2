#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsns/cutoff.hpp"
#include "tsns/noise.hpp"
#include "tsns/spectral.hpp"

namespace tsns
{
enum class Integrator
{
    exponential_euler,
    exponential_midpoint,
};

std::string to_string(Integrator integ);
Integrator parse_integrator(std::string const& name);

//---------------------------------------------------------------------------//
struct SimConfig
{
    double nu = 1.0;
    double dt = 1e-3;
    double T = 1.0;
    int N = 4;
    Integrator integrator = Integrator::exponential_euler;
    std::uint64_t seed = 0;
    //! false drops B entirely (linear Stokes/OU dynamics)
    bool nonlinear = true;
    std::vector<double> record_norms = {0.0, 1.0};
    //! store u every this many steps (0: never)
    std::size_t snapshot_every = 0;

    std::vector<std::string> problems() const;
    void validate() const;
    std::size_t steps() const;
    //! z-grid points per simulation step the integrator needs
    std::size_t z_refinement() const;
};

//! z path on the grid a run with this config consumes
ZPath sample_z_path_for(SimConfig const& cfg, ModeSetPtr modes,
                        NoiseSpec const& noise, Rng& rng);

//---------------------------------------------------------------------------//
//! N(u) = -χ_R(‖u‖_α) B(u,u) evaluated at one state
struct NonlinearEval
{
    SpectralField u;
    double norm = 0;     //!< ‖u‖_α (cut-off index), 0 without cut-off
    double weight = 1;   //!< χ_R(‖u‖_α)
    double dweight = 0;  //!< χ_R'(‖u‖_α)
    SpectralField buu;   //!< B(u,u), zero when B is disabled
    SpectralField value; //!< N(u)
};

class PathwiseDynamics
{
  public:
    PathwiseDynamics(double nu, std::optional<CutoffSpec> cutoff,
                     bool nonlinear);

    double nu() const { return nu_; }
    std::optional<CutoffSpec> const& cutoff() const { return cutoff_; }
    bool nonlinear() const { return nonlinear_; }

    NonlinearEval evaluate(SpectralField u) const;
    /*!
     * DN(u)[w] = -χ_R'(‖u‖_α)⟨u,w⟩_α/‖u‖_α B(u,u) - χ_R(‖u‖_α)(B(w,u)+B(u,w)).
     * The first term is taken as 0 at u = 0.
     */
    SpectralField derivative(NonlinearEval const& at,
                             SpectralField const& w) const;
    //! -νAv + N(v+z)
    SpectralField rhs_v(SpectralField const& v, SpectralField const& z) const;

  private:
    double nu_;
    std::optional<CutoffSpec> cutoff_;
    bool nonlinear_;
};

/*!
 * Exponential integrators for v' = -νAv + N(v+z(t)).
 *
 * Euler:    v⁺ = E(h)v + Φ(h)N(v+z₀)
 * Midpoint: v½ = E(h/2)v + Φ(h/2)N(v+z₀),  v⁺ = E(h)v + Φ(h)N(v½+z½)
 * with E(h) = e^{-νAh} and Φ(h) = (1-E(h))/(νA). A tangent field is advanced
 * by the derivative of the same discrete map.
 */
class ExponentialStepper
{
  public:
    ExponentialStepper(PathwiseDynamics const& dyn, ModeSetPtr modes,
                       double dt, Integrator integ);

    double dt() const { return dt_; }
    Integrator integrator() const { return integ_; }
    PathwiseDynamics const& dynamics() const { return dyn_; }

    //! E(h)v + Φ(h)n for h = dt (half = false) or dt/2
    SpectralField propagate(SpectralField const& v, SpectralField const& n,
                            bool half = false) const;
    //! Φ(dt)n
    SpectralField phi(SpectralField const& n) const;

    /*!
     * Advance v (and w, if given) over one step.
     *
     * z_half is required for the midpoint rule. `start` may carry the
     * evaluation at v+z0 if the caller already has it. `max_div`, if given,
     * is raised to the divergence residual of every intermediate stage.
     */
    void step(SpectralField& v, SpectralField const& z0,
              SpectralField const* z_half, SpectralField* w = nullptr,
              NonlinearEval const* start = nullptr,
              double* max_div = nullptr) const;

  private:
    struct Factors
    {
        std::vector<double> decay;
        std::vector<double> phi;
    };
    static Factors make_factors(ModeSet const& ms, double nu, double h);

    PathwiseDynamics const& dyn_;
    ModeSetPtr modes_;
    double dt_;
    Integrator integ_;
    Factors full_;
    Factors half_;
};

//---------------------------------------------------------------------------//
struct NormSeries
{
    double alpha = 0;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> z;
};

struct Snapshot
{
    double t;
    SpectralField u;
};

struct TrajectoryRecord
{
    std::vector<double> times;
    std::vector<NormSeries> norms;
    //! ½‖v‖_H² at each grid time
    std::vector<double> kinetic;
    //! ν∫₀ᵗ‖v‖_V² (trapezoid, cumulative)
    std::vector<double> dissipation;
    //! ∫₀ᵗ χ_R⟨z, B(v+z, v)⟩ (trapezoid, cumulative)
    std::vector<double> work;
    //! χ_R(‖u‖_α) at each grid time (1 without cut-off)
    std::vector<double> chi;
    std::vector<Snapshot> snapshots;
    std::optional<SpectralField> final_u;
    std::optional<SpectralField> final_v;

    std::optional<double> tau;  //!< cut-off stopping time, empty = never
    bool aborted = false;
    std::string abort_reason;
    double max_divergence_residual = 0;
    double nu = 0;
    std::uint64_t seed = 0;

    //! Norm series for α, or throws std::invalid_argument
    NormSeries const& series(double alpha) const;
};

/*!
 * Integrate u = v + z from x along a stored z path.
 *
 * The z path grid must be uniform with spacing dt / z_refinement (or an
 * integer refinement of it) and cover [0, T].
 */
TrajectoryRecord simulate(SpectralField const& x, SimConfig const& cfg,
                          std::optional<CutoffSpec> const& cutoff,
                          ZPath const& z_path);

//! First crossing of ‖u‖_α >= R, linearly interpolated; empty if none
std::optional<double> detect_stopping(TrajectoryRecord const& rec,
                                      double alpha, double R);
std::optional<double> detect_stopping(std::span<double const> times,
                                      std::span<double const> norms, double R);

//! ½‖v_t‖² + ν∫‖v‖_V² - ∫χ_R⟨z,B(u,v)⟩ - ½‖v_s‖² between grid times s < t
double energy_ledger(TrajectoryRecord const& rec, double s, double t);

//---------------------------------------------------------------------------//
struct CouplingReport
{
    std::optional<double> tau;
    double pre_tau_sup = 0;   //!< sup over grid t <= τ of ‖u_cut - u_free‖_α
    double post_tau_sup = 0;  //!< same over t > τ (0 when τ is never)
    //! max_n ‖Φ(dt)(N_{n+1} - N_n)/2‖_α along the cut-off run
    double local_tolerance = 0;
    bool aborted = false;
    std::vector<double> times;
    std::vector<double> discrepancy;
};

CouplingReport couple_and_compare(SpectralField const& x, SimConfig const& cfg,
                                  CutoffSpec const& cutoff,
                                  ZPath const& z_path);

//---------------------------------------------------------------------------//
struct TangentPath
{
    std::vector<double> times;
    double alpha = 0;
    std::vector<double> tangent_norm;   //!< ‖ũ(t)‖_α
    std::vector<double> energy_integral; //!< ∫₀ᵗ‖ũ‖²_{α+1} (trapezoid)
    SpectralField final_tangent;
    SpectralField final_u;
};

/*!
 * ũ(t) = D_h u_x(t) along the base trajectory from x. Norms are reported at
 * index alpha (the cut-off index when a cut-off is given).
 */
TangentPath tangent_integrate(SpectralField const& x, SpectralField const& h,
                              SimConfig const& cfg,
                              std::optional<CutoffSpec> const& cutoff,
                              ZPath const& z_path,
                              std::optional<double> alpha = std::nullopt);

//! Final state only; cheaper than simulate
SpectralField final_state(SpectralField const& x, SimConfig const& cfg,
                          std::optional<CutoffSpec> const& cutoff,
                          ZPath const& z_path);
}  // namespace tsns
