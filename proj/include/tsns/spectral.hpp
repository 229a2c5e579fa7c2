#pragma once

#include <array>
#include <complex>
#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace tsns
{
using cplx = std::complex<double>;
using Vec3c = std::array<cplx, 3>;
using Vec3 = std::array<double, 3>;

//---------------------------------------------------------------------------//
/*!
 * Integer wavenumber on the 2π-periodic torus.
 *
 * The Stokes operator acts on mode k as multiplication by |k|².
 */
struct WaveVector
{
    int x = 0;
    int y = 0;
    int z = 0;

    int norm2() const { return x * x + y * y + z * z; }
    double norm() const;
    int max_abs() const;
    bool is_zero() const { return x == 0 && y == 0 && z == 0; }
    //! True for the member of {k, -k} that is stored (lexicographically positive)
    bool is_representative() const;

    WaveVector operator-() const { return {-x, -y, -z}; }
    friend WaveVector operator+(WaveVector a, WaveVector b)
    {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend WaveVector operator-(WaveVector a, WaveVector b)
    {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    auto operator<=>(WaveVector const&) const = default;
};

//---------------------------------------------------------------------------//
/*!
 * Galerkin truncation: one representative per Hermitian pair {k, -k}.
 *
 * Modes are sorted lexicographically so iteration order is reproducible.
 * The default construction keeps every nonzero k with max|k_i| <= N; a
 * sparse subset can be supplied for experiments that never convolve.
 */
class ModeSet
{
  public:
    //! Location of a full-lattice wavevector in the representative list
    struct Slot
    {
        std::size_t index;
        bool conjugate;  //!< true when the lattice point is -representative
    };

    static std::shared_ptr<ModeSet const> cube(int cutoff);
    static std::shared_ptr<ModeSet const>
    from_modes(int cutoff, std::vector<WaveVector> modes);

    int cutoff() const { return cutoff_; }
    std::size_t size() const { return modes_.size(); }
    bool is_cube() const { return is_cube_; }

    WaveVector const& operator[](std::size_t i) const { return modes_[i]; }
    std::span<WaveVector const> modes() const { return modes_; }
    //! |k|² per representative
    double k2(std::size_t i) const { return k2_[i]; }
    std::span<double const> k2() const { return k2_; }
    //! Two real orthonormal vectors spanning the plane orthogonal to k
    std::array<Vec3, 2> const& tangent_basis(std::size_t i) const
    {
        return basis_[i];
    }

    std::optional<Slot> find(WaveVector k) const;

    bool operator==(ModeSet const& other) const;

  private:
    ModeSet(int cutoff, std::vector<WaveVector> modes);

    int cutoff_;
    bool is_cube_ = false;
    std::vector<WaveVector> modes_;
    std::vector<double> k2_;
    std::vector<std::array<Vec3, 2>> basis_;
    // Dense (2N+1)^3 table: 0 = absent, +(i+1) = rep i, -(i+1) = conj of i
    std::vector<int> lookup_;
};

using ModeSetPtr = std::shared_ptr<ModeSet const>;

//---------------------------------------------------------------------------//
/*!
 * Divergence-free real vector field stored by its Fourier coefficients.
 *
 * u(x) = Σ_{full lattice} u_k e^{ik·x}, with u_{-k} = conj(u_k) implied by
 * storing only representatives.
 */
class SpectralField
{
  public:
    explicit SpectralField(ModeSetPtr modes);

    ModeSet const& modes() const { return *modes_; }
    ModeSetPtr const& mode_set_ptr() const { return modes_; }
    std::size_t size() const { return coeffs_.size(); }

    Vec3c& operator[](std::size_t i) { return coeffs_[i]; }
    Vec3c const& operator[](std::size_t i) const { return coeffs_[i]; }
    std::span<Vec3c> coeffs() { return coeffs_; }
    std::span<Vec3c const> coeffs() const { return coeffs_; }

    void set_zero();
    bool is_zero() const;

    SpectralField& operator+=(SpectralField const& other);
    SpectralField& operator-=(SpectralField const& other);
    SpectralField& operator*=(double s);
    //! this += a * x
    void axpy(double a, SpectralField const& x);

    friend SpectralField operator+(SpectralField a, SpectralField const& b)
    {
        return a += b;
    }
    friend SpectralField operator-(SpectralField a, SpectralField const& b)
    {
        return a -= b;
    }
    friend SpectralField operator*(double s, SpectralField a)
    {
        return a *= s;
    }

    bool operator==(SpectralField const& other) const;

  private:
    ModeSetPtr modes_;
    std::vector<Vec3c> coeffs_;
};

//---------------------------------------------------------------------------//
// Per-mode algebra

Vec3c leray_project(WaveVector const& k, Vec3c const& v);

//---------------------------------------------------------------------------//
// Norms and pairings

//! ‖u‖_α = (Σ_{full lattice} |k|^{2α}|u_k|²)^{1/2}
double sobolev_norm(SpectralField const& u, double alpha);
//! V_α inner product Σ_{full} |k|^{2α} u_k·conj(v_k)  (real)
double sobolev_inner(SpectralField const& u, SpectralField const& v,
                     double alpha);
//! H inner product
double pairing(SpectralField const& u, SpectralField const& v);

//! max_k |k·u_k| / ‖u‖_H (zero for the zero field)
double divergence_residual(SpectralField const& u);

//---------------------------------------------------------------------------//
// Diagonal operators

//! e^{-νAt}
SpectralField apply_semigroup(SpectralField u, double nu, double t);
//! A^s (multiplication by |k|^{2s})
SpectralField apply_power(SpectralField u, double s);

//---------------------------------------------------------------------------//
// Navier-Stokes bilinear term B(u,v) = P[(u·∇)v]

SpectralField bilinear_direct(SpectralField const& u, SpectralField const& v);
SpectralField bilinear_fft(SpectralField const& u, SpectralField const& v);
//! Picks the faster of the two exact routes for the given mode set
SpectralField bilinear(SpectralField const& u, SpectralField const& v);

//! Physical grid size used by the dealiased transform for cutoff N
int fft_grid_size(int cutoff);

//---------------------------------------------------------------------------//
/*!
 * Gaussian field with |u_k| ~ amplitude·|k|^{-decay}, Leray-projected.
 */
SpectralField random_field(ModeSetPtr modes, double decay, double amplitude,
                           std::mt19937_64& rng);

//! Rescale so that ‖u‖_α equals target (zero field is left unchanged)
SpectralField scaled_to_norm(SpectralField u, double alpha, double target);

}  // namespace tsns
