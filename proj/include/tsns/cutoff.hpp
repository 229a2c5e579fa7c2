#pragma once

#include <string>
#include <vector>

#include "tsns/noise.hpp"

namespace tsns
{
//---------------------------------------------------------------------------//
/*!
 * Smooth step χ: exactly 1 on [0,1], exactly 0 on [2,∞).
 *
 * χ(x) = ψ(2-x)/(ψ(2-x)+ψ(x-1)) with ψ(s) = e^{-1/s} for s > 0, else 0.
 */
double chi(double x);
double chi_prime(double x);

//! χ(x/R); R < 1 is rejected
double chi_R(double x, double R);
//! d/dx χ(x/R)
double chi_R_prime(double x, double R);

//! sup |χ'| (attained numerically on a fine grid, cached)
double chi_prime_sup();

//---------------------------------------------------------------------------//
//! Cut-off χ_R(‖u‖_α) applied to the nonlinearity
struct CutoffSpec
{
    double alpha = 1.2;
    double R = 5.0;

    //! Diagnostics for the admissible window 1/2 < α < 1+2α0 and R >= 1
    std::vector<std::string> problems(NoiseSpec const& noise) const;
    void validate(NoiseSpec const& noise) const;
};
}  // namespace tsns
