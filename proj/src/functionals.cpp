#include "tsns/functionals.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tsns/rng.hpp"

namespace tsns
{
namespace
{
std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;)
    {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double to_double(std::string const& s, std::string_view spec)
{
    std::size_t used = 0;
    double v = 0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (std::exception const&)
    {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v))
        throw std::invalid_argument("bad number '" + s + "' in functional '"
                                    + std::string(spec) + "'");
    return v;
}

WaveVector to_mode(std::string const& s, std::string_view spec)
{
    auto parts = split(s, ',');
    if (parts.size() != 3)
        throw std::invalid_argument("functional '" + std::string(spec)
                                    + "' needs a mode kx,ky,kz");
    WaveVector k{int(to_double(parts[0], spec)), int(to_double(parts[1], spec)),
                 int(to_double(parts[2], spec))};
    if (k.is_zero())
        throw std::invalid_argument("functional mode must be nonzero");
    return k;
}
}  // namespace

TestFunctional TestFunctional::parse(std::string_view spec)
{
    auto parts = split(spec, ':');
    auto const& name = parts[0];
    auto arity = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() - 1 < lo || parts.size() - 1 > hi)
            throw std::invalid_argument("functional '" + std::string(spec)
                                        + "' has the wrong number of fields");
    };
    TestFunctional f;
    f.id_ = std::string(spec);
    if (name == "const")
    {
        arity(1, 1);
        f.kind_ = Kind::constant;
        f.value_ = to_double(parts[1], spec);
    }
    else if (name == "coord" || name == "tanh-coord")
    {
        arity(1, 2);
        f.kind_ = name == "coord" ? Kind::coordinate : Kind::tanh_coordinate;
        f.mode_ = to_mode(parts[1], spec);
        if (parts.size() > 2)
            f.scale_ = to_double(parts[2], spec);
    }
    else if (name == "tanh-energy")
    {
        arity(1, 2);
        f.kind_ = Kind::tanh_energy;
        f.alpha_ = to_double(parts[1], spec);
        if (parts.size() > 2)
            f.scale_ = to_double(parts[2], spec);
    }
    else if (name == "tanh-pairing")
    {
        arity(1, 2);
        f.kind_ = Kind::tanh_pairing;
        f.seed_ = static_cast<std::uint64_t>(to_double(parts[1], spec));
        if (parts.size() > 2)
            f.scale_ = to_double(parts[2], spec);
    }
    else if (name == "clipped-norm")
    {
        arity(2, 2);
        f.kind_ = Kind::clipped_norm;
        f.alpha_ = to_double(parts[1], spec);
        f.cap_ = to_double(parts[2], spec);
        if (!(f.cap_ > 0))
            throw std::invalid_argument("clipped-norm cap must be positive");
    }
    else
    {
        throw std::invalid_argument("unknown test functional '"
                                    + std::string(spec) + "'");
    }
    return f;
}

double TestFunctional::coordinate(SpectralField const& u) const
{
    auto slot = u.modes().find(mode_);
    if (!slot)
        throw std::invalid_argument("functional mode is outside the mode set");
    // the tangent basis belongs to the stored representative
    auto const& a = u.modes().tangent_basis(slot->index)[0];
    Vec3c const& c = u[slot->index];
    cplx s = a[0] * c[0] + a[1] * c[1] + a[2] * c[2];
    return scale_ * s.real();
}

SpectralField TestFunctional::pairing_field(ModeSetPtr const& ms) const
{
    Rng rng = make_stream(seed_, 0);
    return random_field(ms, 1.5, 1.0, rng);
}

double TestFunctional::operator()(SpectralField const& u) const
{
    switch (kind_)
    {
        case Kind::constant:
            return value_;
        case Kind::coordinate:
            return coordinate(u);
        case Kind::tanh_coordinate:
            return std::tanh(coordinate(u));
        case Kind::tanh_energy:
            return std::tanh(scale_ * sobolev_inner(u, u, alpha_));
        case Kind::tanh_pairing:
            return std::tanh(scale_ * pairing(u, pairing_field(u.mode_set_ptr())));
        case Kind::clipped_norm:
            return std::min(sobolev_norm(u, alpha_), cap_) / cap_;
    }
    return 0;
}

double TestFunctional::derivative(SpectralField const& u,
                                  SpectralField const& h) const
{
    auto sech2 = [](double x) {
        double c = std::cosh(x);
        return 1.0 / (c * c);
    };
    switch (kind_)
    {
        case Kind::constant:
            return 0;
        case Kind::coordinate:
            return coordinate(h);
        case Kind::tanh_coordinate:
            return sech2(coordinate(u)) * coordinate(h);
        case Kind::tanh_energy:
            return sech2(scale_ * sobolev_inner(u, u, alpha_)) * 2 * scale_
                   * sobolev_inner(u, h, alpha_);
        case Kind::tanh_pairing:
        {
            auto psi = pairing_field(u.mode_set_ptr());
            return sech2(scale_ * pairing(u, psi)) * scale_ * pairing(h, psi);
        }
        case Kind::clipped_norm:
        {
            double n = sobolev_norm(u, alpha_);
            if (n >= cap_ || n == 0)
                return 0;
            return sobolev_inner(u, h, alpha_) / (n * cap_);
        }
    }
    return 0;
}
}  // namespace tsns
