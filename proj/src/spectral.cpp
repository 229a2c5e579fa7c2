#include "tsns/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsns
{
namespace
{
Vec3 cross(Vec3 const& a, Vec3 const& b)
{
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

Vec3 normalized(Vec3 v)
{
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& c : v)
        c /= n;
    return v;
}

std::array<Vec3, 2> make_tangent_basis(WaveVector const& k)
{
    Vec3 kv{double(k.x), double(k.y), double(k.z)};
    // Cross with the axis least aligned with k
    std::size_t axis = 0;
    for (std::size_t i = 1; i < 3; ++i)
    {
        if (std::abs(kv[i]) < std::abs(kv[axis]))
            axis = i;
    }
    Vec3 e{0, 0, 0};
    e[axis] = 1;
    Vec3 a1 = normalized(cross(kv, e));
    Vec3 a2 = normalized(cross(kv, a1));
    return {a1, a2};
}

void require_same_modes(SpectralField const& u, SpectralField const& v)
{
    if (u.mode_set_ptr() != v.mode_set_ptr() && !(u.modes() == v.modes()))
        throw std::invalid_argument("fields live on different mode sets");
}

// Full-lattice weight of a stored representative
constexpr double kPairWeight = 2.0;
}  // namespace

//---------------------------------------------------------------------------//
double WaveVector::norm() const
{
    return std::sqrt(static_cast<double>(norm2()));
}

int WaveVector::max_abs() const
{
    return std::max({std::abs(x), std::abs(y), std::abs(z)});
}

bool WaveVector::is_representative() const
{
    if (x != 0)
        return x > 0;
    if (y != 0)
        return y > 0;
    return z > 0;
}

//---------------------------------------------------------------------------//
ModeSet::ModeSet(int cutoff, std::vector<WaveVector> modes)
    : cutoff_(cutoff), modes_(std::move(modes))
{
    if (cutoff_ < 1)
        throw std::invalid_argument("mode cutoff must be at least 1");
    for (auto& k : modes_)
    {
        if (k.is_zero())
            throw std::invalid_argument("zero wavevector in mode set");
        if (k.max_abs() > cutoff_)
            throw std::invalid_argument("wavevector exceeds mode cutoff");
        if (!k.is_representative())
            k = -k;
    }
    std::sort(modes_.begin(), modes_.end());
    if (std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end())
        throw std::invalid_argument("Hermitian pair listed twice");

    int side = 2 * cutoff_ + 1;
    lookup_.assign(static_cast<std::size_t>(side) * side * side, 0);
    k2_.reserve(modes_.size());
    basis_.reserve(modes_.size());
    auto cell = [&](WaveVector const& k) -> int& {
        return lookup_[(static_cast<std::size_t>(k.x + cutoff_) * side
                        + (k.y + cutoff_))
                           * side
                       + (k.z + cutoff_)];
    };
    for (std::size_t i = 0; i < modes_.size(); ++i)
    {
        auto const& k = modes_[i];
        k2_.push_back(k.norm2());
        basis_.push_back(make_tangent_basis(k));
        cell(k) = static_cast<int>(i) + 1;
        cell(-k) = -(static_cast<int>(i) + 1);
    }
    is_cube_ = (modes_.size() * 2 + 1
                == static_cast<std::size_t>(side) * side * side);
}

ModeSetPtr ModeSet::cube(int cutoff)
{
    if (cutoff < 1)
        throw std::invalid_argument("mode cutoff must be at least 1");
    std::vector<WaveVector> modes;
    for (int x = 0; x <= cutoff; ++x)
        for (int y = -cutoff; y <= cutoff; ++y)
            for (int z = -cutoff; z <= cutoff; ++z)
            {
                WaveVector k{x, y, z};
                if (!k.is_zero() && k.is_representative())
                    modes.push_back(k);
            }
    return ModeSetPtr(new ModeSet(cutoff, std::move(modes)));
}

ModeSetPtr ModeSet::from_modes(int cutoff, std::vector<WaveVector> modes)
{
    return ModeSetPtr(new ModeSet(cutoff, std::move(modes)));
}

std::optional<ModeSet::Slot> ModeSet::find(WaveVector k) const
{
    if (k.is_zero() || k.max_abs() > cutoff_)
        return std::nullopt;
    int side = 2 * cutoff_ + 1;
    int v = lookup_[(static_cast<std::size_t>(k.x + cutoff_) * side
                     + (k.y + cutoff_))
                        * side
                    + (k.z + cutoff_)];
    if (v == 0)
        return std::nullopt;
    if (v > 0)
        return Slot{static_cast<std::size_t>(v - 1), false};
    return Slot{static_cast<std::size_t>(-v - 1), true};
}

bool ModeSet::operator==(ModeSet const& other) const
{
    return cutoff_ == other.cutoff_ && modes_ == other.modes_;
}

//---------------------------------------------------------------------------//
SpectralField::SpectralField(ModeSetPtr modes)
    : modes_(std::move(modes)), coeffs_(modes_->size(), Vec3c{})
{
}

void SpectralField::set_zero()
{
    std::fill(coeffs_.begin(), coeffs_.end(), Vec3c{});
}

bool SpectralField::is_zero() const
{
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](Vec3c const& c) {
        return c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0;
    });
}

SpectralField& SpectralField::operator+=(SpectralField const& other)
{
    require_same_modes(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (int j = 0; j < 3; ++j)
            coeffs_[i][j] += other.coeffs_[i][j];
    return *this;
}

SpectralField& SpectralField::operator-=(SpectralField const& other)
{
    require_same_modes(*this, other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (int j = 0; j < 3; ++j)
            coeffs_[i][j] -= other.coeffs_[i][j];
    return *this;
}

SpectralField& SpectralField::operator*=(double s)
{
    for (auto& c : coeffs_)
        for (auto& x : c)
            x *= s;
    return *this;
}

void SpectralField::axpy(double a, SpectralField const& x)
{
    require_same_modes(*this, x);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        for (int j = 0; j < 3; ++j)
            coeffs_[i][j] += a * x.coeffs_[i][j];
}

bool SpectralField::operator==(SpectralField const& other) const
{
    return *modes_ == *other.modes_ && coeffs_ == other.coeffs_;
}

//---------------------------------------------------------------------------//
Vec3c leray_project(WaveVector const& k, Vec3c const& v)
{
    if (k.is_zero())
        throw std::domain_error("Leray projection at the zero wavevector");
    double kk[3] = {double(k.x), double(k.y), double(k.z)};
    cplx kdotv = kk[0] * v[0] + kk[1] * v[1] + kk[2] * v[2];
    cplx c = kdotv / static_cast<double>(k.norm2());
    return {v[0] - c * kk[0], v[1] - c * kk[1], v[2] - c * kk[2]};
}

double sobolev_inner(SpectralField const& u, SpectralField const& v,
                     double alpha)
{
    require_same_modes(u, v);
    auto const& ms = u.modes();
    double sum = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        double w = alpha == 0 ? 1.0 : std::pow(ms.k2(i), alpha);
        double dot = 0;
        for (int j = 0; j < 3; ++j)
            dot += (u[i][j] * std::conj(v[i][j])).real();
        sum += w * dot;
    }
    return kPairWeight * sum;
}

double sobolev_norm(SpectralField const& u, double alpha)
{
    auto const& ms = u.modes();
    double sum = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        double w = alpha == 0 ? 1.0 : std::pow(ms.k2(i), alpha);
        sum += w
               * (std::norm(u[i][0]) + std::norm(u[i][1])
                  + std::norm(u[i][2]));
    }
    return std::sqrt(kPairWeight * sum);
}

double pairing(SpectralField const& u, SpectralField const& v)
{
    return sobolev_inner(u, v, 0.0);
}

double divergence_residual(SpectralField const& u)
{
    double h = sobolev_norm(u, 0.0);
    if (h == 0)
        return 0;
    double worst = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        auto const& k = u.modes()[i];
        cplx d = double(k.x) * u[i][0] + double(k.y) * u[i][1]
                 + double(k.z) * u[i][2];
        worst = std::max(worst, std::abs(d));
    }
    return worst / h;
}

SpectralField apply_semigroup(SpectralField u, double nu, double t)
{
    if (t < 0)
        throw std::domain_error("semigroup time must be nonnegative");
    if (t == 0)
        return u;
    auto const& ms = u.modes();
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        double f = std::exp(-nu * ms.k2(i) * t);
        for (auto& c : u[i])
            c *= f;
    }
    return u;
}

SpectralField apply_power(SpectralField u, double s)
{
    auto const& ms = u.modes();
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        double f = std::pow(ms.k2(i), s);
        for (auto& c : u[i])
            c *= f;
    }
    return u;
}

//---------------------------------------------------------------------------//
SpectralField bilinear_direct(SpectralField const& u, SpectralField const& v)
{
    require_same_modes(u, v);
    auto const& ms = u.modes();
    SpectralField out(u.mode_set_ptr());
    std::size_t n = ms.size();
    for (std::size_t ik = 0; ik < n; ++ik)
    {
        WaveVector const k = ms[ik];
        double const kk[3] = {double(k.x), double(k.y), double(k.z)};
        Vec3c acc{};
        for (std::size_t il = 0; il < n; ++il)
        {
            for (int sign : {1, -1})
            {
                WaveVector l = sign > 0 ? ms[il] : -ms[il];
                auto slot = ms.find(k - l);
                if (!slot)
                    continue;
                Vec3c const& ul_rep = u[il];
                cplx kdotu = kk[0] * ul_rep[0] + kk[1] * ul_rep[1]
                             + kk[2] * ul_rep[2];
                if (sign < 0)
                {
                    // u_{-l} = conj(u_l)
                    kdotu = kk[0] * std::conj(ul_rep[0])
                            + kk[1] * std::conj(ul_rep[1])
                            + kk[2] * std::conj(ul_rep[2]);
                }
                Vec3c const& vm = v[slot->index];
                for (int j = 0; j < 3; ++j)
                {
                    cplx vmj = slot->conjugate ? std::conj(vm[j]) : vm[j];
                    acc[j] += kdotu * vmj;
                }
            }
        }
        Vec3c p = leray_project(k, acc);
        for (int j = 0; j < 3; ++j)
            out[ik][j] = cplx(0, 1) * p[j];
    }
    return out;
}

SpectralField bilinear(SpectralField const& u, SpectralField const& v)
{
    // The dealiased transform costs O(M^3 log M) regardless of sparsity
    if (!u.modes().is_cube() || u.modes().cutoff() < 2)
        return bilinear_direct(u, v);
    return bilinear_fft(u, v);
}

//---------------------------------------------------------------------------//
SpectralField random_field(ModeSetPtr modes, double decay, double amplitude,
                           std::mt19937_64& rng)
{
    SpectralField u(modes);
    if (amplitude == 0)
        return u;
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        Vec3c c;
        for (auto& x : c)
        {
            double re = normal(rng);
            double im = normal(rng);
            x = cplx(re, im);
        }
        double s = amplitude * std::pow(modes->k2(i), -0.5 * decay);
        c = leray_project((*modes)[i], c);
        for (auto& x : c)
            x *= s;
        u[i] = c;
    }
    return u;
}

SpectralField scaled_to_norm(SpectralField u, double alpha, double target)
{
    double n = sobolev_norm(u, alpha);
    if (n == 0)
        return u;
    u *= target / n;
    return u;
}

}  // namespace tsns
