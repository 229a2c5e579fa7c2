#pragma once
// Independent reference computations over the full lattice. These expand a
// stored field into both members of every Hermitian pair and never touch the
// representative lookup used by the library.

#include <cmath>
#include <map>

#include "tsns/spectral.hpp"

namespace oracle
{
using tsns::cplx;
using tsns::Vec3c;
using tsns::WaveVector;

using Lattice = std::map<WaveVector, Vec3c>;

inline Lattice expand(tsns::SpectralField const& u)
{
    Lattice out;
    for (std::size_t i = 0; i < u.size(); ++i)
    {
        WaveVector k = u.modes()[i];
        Vec3c c = u[i];
        out[k] = c;
        Vec3c cc{std::conj(c[0]), std::conj(c[1]), std::conj(c[2])};
        out[-k] = cc;
    }
    return out;
}

inline double norm2(Lattice const& u, double alpha)
{
    double s = 0;
    for (auto const& [k, c] : u)
    {
        double w = std::pow(double(k.x * k.x + k.y * k.y + k.z * k.z), alpha);
        for (auto const& x : c)
            s += w * std::norm(x);
    }
    return s;
}

inline double pairing(Lattice const& u, Lattice const& v)
{
    cplx s = 0;
    for (auto const& [k, c] : u)
    {
        auto it = v.find(k);
        if (it == v.end())
            continue;
        for (int j = 0; j < 3; ++j)
            s += c[j] * std::conj(it->second[j]);
    }
    return s.real();
}

//! i P_k Σ_{l+m=k} (k·u_l) v_m restricted to the keys of `keep`
inline Lattice bilinear(Lattice const& u, Lattice const& v, Lattice const& keep)
{
    Lattice out;
    for (auto const& [k, unused] : keep)
    {
        (void)unused;
        Vec3c acc{};
        for (auto const& [l, ul] : u)
        {
            auto it = v.find(k - l);
            if (it == v.end())
                continue;
            cplx kd = double(k.x) * ul[0] + double(k.y) * ul[1]
                      + double(k.z) * ul[2];
            for (int j = 0; j < 3; ++j)
                acc[j] += kd * it->second[j];
        }
        double k2 = k.x * k.x + k.y * k.y + k.z * k.z;
        cplx kv = (double(k.x) * acc[0] + double(k.y) * acc[1]
                   + double(k.z) * acc[2])
                  / k2;
        Vec3c r{acc[0] - kv * double(k.x), acc[1] - kv * double(k.y),
                acc[2] - kv * double(k.z)};
        for (auto& x : r)
            x *= cplx(0, 1);
        out[k] = r;
    }
    return out;
}
}  // namespace oracle
