#include "tsns/registry.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "tsns/config.hpp"

namespace tsns
{
namespace
{
std::vector<ResultEntry> const& entries()
{
    static std::vector<ResultEntry> const all = {
        {"noise-decay",
         "sigma_k = c0 |k|^-(3/2 + 2 alpha0)",
         "per-mode amplitudes and one-step OU variances against the closed form",
         {"simulate", "tails"}},
        {"noise-assumption",
         "Q diagonal in the Stokes eigenbasis; 1/2 < alpha < 1 + 2 alpha0",
         "config validation rejects indices outside the window",
         {"simulate", "blowup", "feller", "bel"}},
        {"sns-equation",
         "du + (nu A u + B(u,u)) dt = Q^(1/2) dW",
         "Galerkin integration of u = v + z",
         {"simulate"}},
        {"wiener-expansion",
         "W(t) = sum_k sigma_k beta_k(t) e_k",
         "independent complex Gaussians per mode and polarization",
         {"simulate"}},
        {"stokes-ou",
         "dz + nu A z dt = Q^(1/2) dW, z(0) = 0",
         "exact OU transitions; variance checked against the mode sum",
         {"simulate", "tails"}},
        {"v-equation",
         "d/dt v + nu A v + B(v+z, v+z) = 0",
         "pathwise exponential integrator driven by a stored z path",
         {"simulate", "couple"}},
        {"energy-functional",
         "E_t(v,z) = 1/2 |v_t|^2 + nu int |v|_V^2 - int <z, B(v+z, v)>",
         "kinetic, dissipation and work columns of trajectory.csv",
         {"simulate"}},
        {"cutoff-system",
         "du + (nu A u + chi_R(|u|_alpha) B(u,u)) dt = Q^(1/2) dW",
         "cut-off runs with chi recorded along the path",
         {"simulate", "couple", "blowup", "feller", "bel"}},
        {"cutoff-v-equation",
         "d/dt v + nu A v + chi_R(|v+z|_alpha) B(v+z, v+z) = 0",
         "the v-ODE the integrators solve",
         {"simulate", "couple"}},
        {"energy-identity",
         "1/2|v_t|^2 + nu int_s^t |v|_V^2 = 1/2|v_s|^2 + int_s^t chi_R <z, B(v+z, v)>",
         "ledger residual shrinks under step halving",
         {"simulate"}},
        {"mild-bound",
         "sup min(t,1)^((beta-alpha)/2) |v_t|_beta <= C(|x|_alpha + sup |z|_beta)",
         "empirical constant reported as mild_constant",
         {"simulate"}},
        {"mild-form",
         "v_t = e^(-nu A t) x - int_0^t e^(-nu A (t-s)) chi_R B(v+z, v+z) ds",
         "exact linear propagation in the exponential integrators",
         {"simulate"}},
        {"stopping-time",
         "tau = inf{t >= 0 : |u(t)|_alpha >= R}",
         "first crossing on the grid, linearly interpolated",
         {"simulate", "couple", "blowup"}},
        {"weak-strong",
         "cut-off and free solutions coincide up to tau",
         "common z path; sup_{t <= tau} |u_cut - u_free|_alpha within tolerance",
         {"couple"}},
        {"cutoff-lipschitz",
         "|chi(x) - chi(y)|(1+x)(1+y) <= c|x - y|",
         "grid supremum of the ratio against 9 sup|chi'|",
         {"inequalities"}},
        {"semigroup-smoothing",
         "|A^gamma e^(-nu A t)| <= (gamma/(e nu t))^gamma",
         "mode-wise supremum on the N = 8 cube",
         {"inequalities"}},
        {"z-tails",
         "P[sup_{s <= eps} |z_s|_beta >= K] <= c0 exp(-a0 K^2/eps), beta < 1 + 2 alpha0",
         "log-tail slope against K^2/eps, stable when eps is halved",
         {"tails"}},
        {"blowup-probability",
         "P[tau < T] <= c exp(-a R^2/T) from |x|_alpha <= R/3; "
         "tau >= c' R^-gamma while sup |z|_alpha <= R/3, "
         "gamma = 4/min(2 alpha - 1, 2) or 2/(1-eps) at alpha = 3/2",
         "Monte Carlo sweep over (R, T) with Wilson intervals and a tail fit",
         {"blowup"}},
        {"weight-convolution",
         "a(t) int_0^t (t-s)^-y a(s)^-1 ds <= B(1-x,1-y) delta^(1-y) + eta^(y-1) Gamma(1-y)",
         "quadrature at random (x, y, delta, eta)",
         {"inequalities"}},
        {"lattice-sum",
         "sum_{0<|k|<=k0} |k|^alpha <= c k0^max(alpha+3, 0), or c log(1+k0) at alpha = -3",
         "exact enumeration against the shape function",
         {"inequalities"}},
        {"constrained-lattice-sum",
         "sum_{|l+m| > 2|m|} |l|^-2alpha |m|^-2beta |l+m|^-2gamma <= c",
         "sweep over l and the truncation",
         {"inequalities"}},
        {"trilinear-estimate",
         "|<B(u,v), w>| <= c |u|_a |v|_b |w|_(c+1), 2(a+b+c) >= 3",
         "random and concentrating fields across N in {2,4,6,8}",
         {"inequalities"}},
        {"trilinear-smoothing",
         "|B(u,v)|_delta <= c |u|_a |v|_b, delta = min(a,b) - (3/2 - max(a,b))_+ - 1",
         "delta table for representative pairs",
         {"inequalities"}},
        {"gradient-formula",
         "D_h P_t phi(x) = (1/t) E[phi(u_t) int_0^t <Q^(-1/2) D_h u_s, dW_s>]",
         "discrete weight against central differences on common replicas",
         {"bel"}},
        {"tangent-equation",
         "d/dt w + nu A w + D[chi_R B](u)[w] = 0, w(0) = h",
         "derivative of the discrete step map, checked by finite differences",
         {"bel"}},
        {"tangent-high-bound",
         "int_0^t |w|_(alpha+1)^2 <= C |h|_alpha^2 exp(C R^2 t)",
         "ensemble mean of the energy integral is finite and grows in t",
         {"bel"}},
        {"tangent-low-bound",
         "sup_{s <= t} |w_s|_gamma finite with gamma = 2 alpha0 + 1/2",
         "ensemble mean reported per probe time",
         {"bel"}},
        {"log-lipschitz",
         "|P_t phi(x+h) - P_t phi(x)| <= (c/min(t,1))(1+|x|^gamma) |h| log(e/|h|)",
         "ratio over h-halvings with common random numbers",
         {"feller"}},
        {"initial-continuity",
         "u_{x+h}(t) -> u_x(t) as |h|_alpha -> 0 along a fixed z path",
         "differences shrink over h-halvings",
         {"feller"}},
        {"martingale-diagnostic",
         "M_t = <u_t - x, phi> + int (nu <u, A phi> + <chi_R B(u,u), phi>) ds, Var M_t = t |Q^(1/2) phi|^2",
         "sample mean and variance of M_t",
         {"simulate"}},
    };
    return all;
}

std::string render(ResultEntry const& e)
{
    std::ostringstream os;
    os << e.id << "\n  " << e.statement << "\n  probe: " << e.probe
       << "\n  kinds:";
    for (auto const& k : e.kinds)
        os << ' ' << k;
    os << '\n';
    return os.str();
}
}  // namespace

std::span<ResultEntry const> list_experiments()
{
    return entries();
}

std::string describe(std::string_view name)
{
    if (parse_kind(name))
    {
        std::ostringstream os;
        os << name << " exercises:\n";
        for (auto const& e : entries())
            if (std::find(e.kinds.begin(), e.kinds.end(), name) != e.kinds.end())
                os << render(e);
        return os.str();
    }
    for (auto const& e : entries())
        if (e.id == name)
            return render(e);
    throw std::invalid_argument("unknown experiment or result '"
                                + std::string(name) + "'");
}
}  // namespace tsns
