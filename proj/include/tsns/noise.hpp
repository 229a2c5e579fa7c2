#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsns/rng.hpp"
#include "tsns/spectral.hpp"
#include "tsns/stats.hpp"

namespace tsns
{
//---------------------------------------------------------------------------//
/*!
 * Diagonal covariance with σ_k = c0·|k|^{-(3/2+2α0)}.
 *
 * Each lattice point carries two independent polarizations, so the noise
 * acts on the real eigenbasis {√2 a cos(k·x), √2 a sin(k·x)} with a ⊥ k.
 */
struct NoiseSpec
{
    double alpha0 = 0.25;
    double c0 = 1.0;

    double exponent() const { return 1.5 + 2 * alpha0; }
    //! σ for a mode with squared wavenumber k2
    double sigma(double k2) const;
    //! Largest admissible Sobolev index for z (open bound)
    double regularity_limit() const { return 1 + 2 * alpha0; }
    void validate() const;
};

double sigma_of(WaveVector const& k, NoiseSpec const& spec);

//! σ²(1-e^{-2λΔt})/(2λ): variance of one complex tangential component
double ou_step_variance(double sigma, double lambda, double dt);

/*!
 * Exact Ornstein-Uhlenbeck transition of dz + νAz dt = Q^{1/2}dW over Δt.
 *
 * Per representative mode, each tangential component gets mean
 * e^{-ν|k|²Δt} z_k and a complex Gaussian innovation whose real and
 * imaginary parts each carry half of ou_step_variance. Draw order is four
 * normals per mode in mode-set order.
 */
SpectralField ou_exact_step(SpectralField z, double dt, double nu,
                            NoiseSpec const& spec, Rng& rng);

//---------------------------------------------------------------------------//
//! Sampled Stokes/OU path on a time grid, z(t_0 = 0) = 0
struct ZPath
{
    std::vector<double> times;
    std::vector<SpectralField> states;

    std::size_t size() const { return times.size(); }
    //! Uniform spacing, or throws if the grid is not uniform
    double uniform_step() const;
    //! Every stride-th point, starting at 0
    ZPath subsample(std::size_t stride) const;
};

std::vector<double> uniform_grid(double dt, std::size_t steps);

ZPath sample_z_path(ModeSetPtr modes, std::span<double const> grid,
                    double nu, NoiseSpec const& spec, Rng& rng);

//! Σ over the real eigenbasis of σ²|k|^{2β}(1-e^{-2ν|k|²t})/(2ν|k|²)
double expected_z_norm2(ModeSet const& modes, NoiseSpec const& spec,
                        double nu, double beta, double t);

//! ‖Q^{1/2}φ‖_H²
double covariance_norm2(SpectralField const& phi, NoiseSpec const& spec);

//! Q^{-1/2}u (per-mode division by σ_k); throws when c0 == 0
SpectralField apply_inverse_sqrt_covariance(SpectralField u,
                                            NoiseSpec const& spec);
SpectralField apply_sqrt_covariance(SpectralField u, NoiseSpec const& spec);

//---------------------------------------------------------------------------//
// Sup-norm tails of z on short intervals

struct TailPoint
{
    double K = 0;
    std::size_t n_samples = 0;
    std::size_t n_exceed = 0;
    double p_hat = 0;
    double ci_lo = 0;
    double ci_hi = 0;
};

struct TailResult
{
    double beta = 0;
    double eps = 0;
    bool hypothesis_ok = true;  //!< β < 1 + 2α0
    std::vector<TailPoint> points;
    //! log p̂ against K²/ε over points with >= min_exceed exceedances and
    //! p̂ <= fit_max_p
    LinearFit fit;
    bool fit_valid = false;
    std::size_t fit_points = 0;
    //! bootstrap standard error of the slope (0 when not requested)
    double slope_boot_se = 0;
};

struct TailOptions
{
    std::size_t samples = 10000;
    std::size_t substeps = 16;
    std::size_t min_exceed = 10;
    //! points above this p̂ are bulk, not tail, and stay out of the fit
    double fit_max_p = 0.5;
    std::uint64_t seed = 0;
    std::uint64_t stream_base = streams::replicas;
    //! resamples for the slope's bootstrap error; the points of one curve
    //! share samples, so the regression error understates the spread
    std::size_t bootstrap = 0;
};

/*!
 * Monte Carlo estimate of P[sup_{s<=ε} ‖z(s)‖_β >= K].
 *
 * The supremum is the maximum over a uniform sub-grid of [0, ε]. Sample i
 * uses stream (seed, stream_base + i).
 */
TailResult sup_norm_tail_mc(ModeSetPtr modes, NoiseSpec const& spec,
                            double nu, double beta, double eps,
                            std::span<double const> K_values,
                            TailOptions const& opts);

//! Tail table and fit from given suprema (bootstrap drawn from
//! stream (seed, streams::trials + stream_base))
TailResult tail_from_samples(std::span<double const> sups, double eps,
                             std::span<double const> K_values,
                             TailOptions const& opts);

//! The per-sample suprema the tail estimate is built from
std::vector<double> sample_sup_norms(ModeSetPtr modes, NoiseSpec const& spec,
                                     double nu, double beta, double eps,
                                     TailOptions const& opts);
}  // namespace tsns
