#include "tsns/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tsns
{
namespace
{
double psi(double s)
{
    return s > 0 ? std::exp(-1.0 / s) : 0.0;
}

double psi_prime(double s)
{
    return s > 0 ? std::exp(-1.0 / s) / (s * s) : 0.0;
}

void check_R(double R)
{
    if (!(R >= 1))
        throw std::invalid_argument("cut-off radius R must be >= 1");
}
}  // namespace

double chi(double x)
{
    if (x <= 1)
        return 1.0;
    if (x >= 2)
        return 0.0;
    double a = psi(2 - x);
    double b = psi(x - 1);
    return a / (a + b);
}

double chi_prime(double x)
{
    if (x <= 1 || x >= 2)
        return 0.0;
    double a = psi(2 - x);
    double b = psi(x - 1);
    double d = a + b;
    return -(psi_prime(2 - x) * b + a * psi_prime(x - 1)) / (d * d);
}

double chi_R(double x, double R)
{
    check_R(R);
    return chi(x / R);
}

double chi_R_prime(double x, double R)
{
    check_R(R);
    return chi_prime(x / R) / R;
}

double chi_prime_sup()
{
    static double const sup = [] {
        double best = 0;
        int const n = 100000;
        for (int i = 1; i < n; ++i)
            best = std::max(best, std::abs(chi_prime(1.0 + double(i) / n)));
        return best;
    }();
    return sup;
}

std::vector<std::string> CutoffSpec::problems(NoiseSpec const& noise) const
{
    std::vector<std::string> out;
    double hi = noise.regularity_limit();
    if (!(alpha > 0.5 && alpha < hi))
    {
        std::ostringstream os;
        os << "alpha = " << alpha << " outside the admissible window (1/2, "
           << hi << ") for alpha0 = " << noise.alpha0;
        out.push_back(os.str());
    }
    if (!(R >= 1))
    {
        std::ostringstream os;
        os << "R = " << R << " must be >= 1";
        out.push_back(os.str());
    }
    return out;
}

void CutoffSpec::validate(NoiseSpec const& noise) const
{
    auto p = problems(noise);
    if (!p.empty())
        throw std::invalid_argument(p.front());
}
}  // namespace tsns
