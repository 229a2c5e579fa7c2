#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tsns/spectral.hpp"

namespace tsns
{
//---------------------------------------------------------------------------//
struct InequalityReport
{
    std::string name;
    std::vector<double> params;
    double constant = 0;  //!< max observed ratio
    std::size_t trials = 0;
    std::size_t skipped = 0;
    int cutoff = 0;
    bool admissible = false;
    //! max ratio after each trial (non-decreasing by construction)
    std::vector<double> running_max;
};

//! 2(a+b+c) >= 3, a,b >= max(-c,0); strict if any of a,b,c is 3/2
bool trilinear_admissible(double a, double b, double c);

/*!
 * Empirical max of ⟨B(u,v),w⟩ / (‖u‖_a‖v‖_b‖w‖_{c+1}) over random fields
 * on the cube of cutoff N. Trial i draws u, v, w from stream (seed, i):
 * half the trials are co-located smooth bumps of random widths (the
 * concentrating family), the rest random-phase fields of random slope.
 * The same seed yields the same fields for every (a, b, c).
 */
InequalityReport bnostro_check(double a, double b, double c,
                               std::size_t trials, int N, std::uint64_t seed);

//---------------------------------------------------------------------------//
struct DeltaResult
{
    double value = 0;
    //! true when only δ < value is available (a∨b = 3/2 or a∨b = 0)
    bool strict_bound = false;
};

//! Smoothing gained by B: δ = a∧b - (3/2 - a∨b)_+ - 1
DeltaResult corollary_delta(double a, double b);

//---------------------------------------------------------------------------//
struct SeriesResult
{
    double sum = 0;
    double shape = 0;  //!< k0^{(α+3)∨0}, or log(1+k0) when α = -3
    double ratio = 0;  //!< sum / shape
};

//! Σ_{k ∈ Z³, 0<|k|<=k0} |k|^α
SeriesResult series1(double alpha, double k0);

//! Σ over m ≠ 0 with |l+m| > 2|m| of |l|^{-2α}|m|^{-2β}|l+m|^{-2γ}, |m|_∞ <= cutoff
double series2(double alpha, double beta, double gamma, WaveVector l,
               int cutoff);
bool series2_hypotheses(double alpha, double beta, double gamma);
//! (2/3)|l| <= |l+m| <= 2|l| on the whole constraint set
bool series2_constraint_holds(WaveVector l);

//---------------------------------------------------------------------------//
//! a(t) = t^x on [0,δ], δ^x e^{-η(t-δ)} beyond
double weight_function(double t, double x, double delta, double eta);
//! a(t)∫₀ᵗ(t-s)^{-y}a(s)^{-1}ds by double-exponential quadrature
double weight_convolution(double t, double x, double y, double delta,
                          double eta);
//! B(1-x,1-y)δ^{1-y} + η^{y-1}Γ(1-y)
double weight_bound(double x, double y, double delta, double eta);

struct WeightCheck
{
    double bound = 0;
    double max_value = 0;
    double t_at_max = 0;
    //! max over t <= δ of |A(t) - t^{1-y}B(1-x,1-y)|
    double small_t_error = 0;
    //! max over the grid of a(t) - δ^x (should be <= 0)
    double weight_excess = 0;
    bool passed = false;
};

WeightCheck weight_bound_check(double x, double y, double delta, double eta,
                               std::span<double const> t_grid,
                               double tol = 1e-6);

//---------------------------------------------------------------------------//
//! sup over grid pairs of |χ(x)-χ(y)|(1+x)(1+y)/|x-y| on [0, x_max]
double chiprop_ratio(std::size_t points, double x_max);
//! Analytic bound 9·sup|χ'| for the quantity above
double chiprop_bound();
}  // namespace tsns
