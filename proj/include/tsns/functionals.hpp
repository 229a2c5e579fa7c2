#pragma once

#include <string>
#include <string_view>

#include "tsns/spectral.hpp"

namespace tsns
{
/*!
 * Test functionals φ on fields.
 *
 * Spec strings:
 *   const:c                     φ ≡ c
 *   coord:kx,ky,kz[:s]          s·Re(a₁·u_k), a₁ the first tangent basis vector
 *   tanh-coord:kx,ky,kz[:s]     tanh of the above
 *   tanh-energy:α[:s]           tanh(s‖u‖_α²)
 *   tanh-pairing:seed[:s]       tanh(s⟨u,ψ⟩) with ψ a fixed random field
 *   clipped-norm:α:cap          min(‖u‖_α, cap)/cap
 *
 * Everything except `coord` is bounded; `coord` is the identity squash used
 * for analytic checks of the linear dynamics.
 */
class TestFunctional
{
  public:
    enum class Kind
    {
        constant,
        coordinate,
        tanh_coordinate,
        tanh_energy,
        tanh_pairing,
        clipped_norm,
    };

    static TestFunctional parse(std::string_view spec);

    double operator()(SpectralField const& u) const;
    //! Directional derivative Dφ(u)[h]
    double derivative(SpectralField const& u, SpectralField const& h) const;

    Kind kind() const { return kind_; }
    std::string const& id() const { return id_; }
    bool bounded() const { return kind_ != Kind::coordinate; }

    //! Mode and component weight for coordinate kinds: φ = s·Re(a₁·u_k)
    WaveVector mode() const { return mode_; }
    double scale() const { return scale_; }

  private:
    SpectralField pairing_field(ModeSetPtr const& ms) const;
    double coordinate(SpectralField const& u) const;

    Kind kind_ = Kind::constant;
    std::string id_;
    double value_ = 0;
    double scale_ = 1;
    double alpha_ = 0;
    double cap_ = 1;
    std::uint64_t seed_ = 0;
    WaveVector mode_{};
};
}  // namespace tsns
