#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsns/dynamics.hpp"
#include "tsns/functionals.hpp"
#include "tsns/stats.hpp"

namespace tsns
{
/*!
 * Shared Monte Carlo setup. Replica i is driven by the z path drawn from
 * stream (seed, streams::replicas + i) on the grid the integrator needs,
 * so every estimator below uses common random numbers across initial
 * conditions and functionals.
 */
struct McSetup
{
    SimConfig sim;
    NoiseSpec noise;
    std::optional<CutoffSpec> cutoff;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;

    ModeSetPtr modes() const { return ModeSet::cube(sim.N); }
    ZPath replica_path(ModeSetPtr const& ms, std::size_t i, double T) const;
};

//---------------------------------------------------------------------------//
struct SemigroupEstimate
{
    std::string functional;
    double t = 0;
    double x_norm = 0;  //!< ‖x‖ at the cut-off index (or H norm)
    double mean = 0;
    double se = 0;
    std::size_t n = 0;
};

//! E φ(u_x(t)) for each functional, one trajectory per replica
std::vector<SemigroupEstimate>
transition_estimate(std::span<TestFunctional const> phis,
                    SpectralField const& x, double t, McSetup const& setup);

//---------------------------------------------------------------------------//
struct FellerRow
{
    std::string functional;
    double t = 0;
    double h_norm = 0;
    double modulus = 0;  //!< ‖h‖ log(e/‖h‖)
    double delta = 0;    //!< P̂φ(x+h) - P̂φ(x), CRN
    double delta_se = 0;
    double ratio = 0;  //!< |delta| / modulus
    double ratio_se = 0;
};

struct FellerReport
{
    double alpha = 0;
    std::vector<FellerRow> rows;  //!< grouped by functional, then t, then h
    //! r_j <= r_0 + 3·sqrt(se_j² + se_0²) for every (functional, t)
    bool bounded = false;
};

/*!
 * Log-Lipschitz modulus of x ↦ P_tφ(x) along h_j = h·2^{-j}, j <= halvings.
 * All t values are read from the same trajectories and must be grid times.
 */
FellerReport feller_modulus(std::span<TestFunctional const> phis,
                            SpectralField const& x, SpectralField const& h,
                            std::size_t halvings, std::span<double const> ts,
                            double alpha, McSetup const& setup);

//---------------------------------------------------------------------------//
struct BelEstimate
{
    std::string functional;
    MeanEstimate bel;
    MeanEstimate fd;
    //! per-replica BEL - FD on shared replicas
    MeanEstimate difference;
    //! E Dφ(u_t)[ũ_t] along the same replicas (pathwise derivative)
    MeanEstimate pathwise;
};

/*!
 * D_h P_tφ(x) from the discrete Bismut-Elworthy-Li weight
 *
 *   w = (1/n) Σ_m ⟨C⁻¹ ũ_{m+1}, ξ_m⟩,   ξ_m = z_{m+1} - e^{-νAΔt} z_m,
 *
 * where C is the covariance of one exact OU innovation. The estimate is
 * φ(u_t)·w. For exponential Euler this is an exact integration by parts for
 * the discrete chain and tends to the Itô form (1/t)∫⟨Q^{-1/2}ũ, dW⟩.
 * Central differences with step fd_eps use the same replicas.
 */
std::vector<BelEstimate> bel_gradient(std::span<TestFunctional const> phis,
                                      SpectralField const& x,
                                      SpectralField const& h, double t,
                                      double fd_eps, McSetup const& setup);

//---------------------------------------------------------------------------//
struct MartingaleCheck
{
    MeanEstimate mean;        //!< of M_t^φ
    double variance = 0;
    double variance_se = 0;
    double expected_variance = 0;  //!< t‖Q^{1/2}φ‖²
};

//! M_t = ⟨u_t-u_0,φ⟩ + ∫ν⟨u,Aφ⟩ - ∫⟨N(u),φ⟩ with left-point sums
MartingaleCheck martingale_check(SpectralField const& phi,
                                 SpectralField const& x, double t,
                                 McSetup const& setup);

//---------------------------------------------------------------------------//
struct TangentProbe
{
    double t = 0;
    MeanEstimate energy;     //!< ∫₀ᵗ‖ũ‖²_{α+1}
    MeanEstimate low_norm;   //!< sup_{s<=t}‖ũ(s)‖_γ, γ = 2α0 + 1/2
};

std::vector<TangentProbe> tangent_probe(SpectralField const& x,
                                        SpectralField const& h,
                                        std::span<double const> ts,
                                        double alpha, McSetup const& setup);

//---------------------------------------------------------------------------//
struct BlowupCell
{
    double R = 0;
    double T = 0;
    double abscissa = 0;  //!< R²/T
    std::size_t n = 0;
    std::size_t hits = 0;  //!< replicas with τ <= T
    std::size_t z_event = 0;     //!< replicas with sup_{[0,T]}‖z‖_α <= R/3
    std::size_t violations = 0;  //!< z_event replicas with τ < T
    double p_hat = 0;
    double ci_lo = 0;
    double ci_hi = 0;
};

struct BlowupRadius
{
    double R = 0;
    //! largest c with τ >= c R^{-γ} on every replica whose z stays below R/3
    double c_prime = 0;
    //! no replica constrained c′; it is only a lower bound (T_max R^γ)
    bool censored = false;
    std::size_t violations = 0;     //!< recount at T = c′R^{-γ}
    std::size_t z_event = 0;        //!< replicas with sup‖z‖_α <= R/3 on [0,T]
    std::size_t replicas = 0;
    std::vector<double> tau;        //!< +inf when never stopped
    std::vector<double> z_exit;     //!< first grid time with ‖z‖_α > R/3
};

struct BlowupReport
{
    double alpha = 0;
    double gamma = 0;  //!< 4/((2α-1)∧2), or 2/(1-ε) at α = 3/2
    std::vector<BlowupRadius> radii;
    std::vector<BlowupCell> cells;
    //! log p̂ against R²/T over cells with >= min_hits hits and p̂ <= fit_max_p
    LinearFit fit;
    bool fit_valid = false;
    std::size_t fit_points = 0;
};

struct BlowupOptions
{
    double alpha = 1.2;
    std::vector<double> R_values;
    std::vector<double> T_values;  //!< sweep for P[τ <= T]; grid times
    double x_fraction = 1.0 / 3;   //!< ‖x‖_α = x_fraction·R
    double x_decay = 1.5;          //!< spectral slope of x̂
    double eps_variant = 0;        //!< required when α = 3/2
    std::size_t min_hits = 10;
    //! cells above this p̂ are bulk, not tail, and stay out of the fit
    double fit_max_p = 0.5;
};

/*!
 * Stopping times of the cut-off system from x = x_fraction·R·x̂ (x̂ drawn
 * from stream (seed, streams::initial_condition)) up to setup.sim.T.
 * Replicas share z paths across radii.
 */
BlowupReport blowup_mc(BlowupOptions const& opts, McSetup const& setup);

double blowup_exponent(double alpha, double eps_variant = 0);
}  // namespace tsns
