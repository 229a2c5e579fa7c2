// Pseudo-spectral evaluation of B(u,v) with 2/3-rule padding.
//
// B(u,v)_k = i P_k Σ_i k_i (u_i v)^_k  (divergence form of (u·∇)v), which is
// term-by-term the same convolution as the direct route. With a grid of
// M > 3N points per direction, products of modes |k|_∞ <= N alias only onto
// wavenumbers beyond N, so retained coefficients are exact.

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "tsns/spectral.hpp"

namespace tsns
{
namespace
{
// FFTW's planner is not thread-safe; execution on distinct arrays is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

bool is_smooth(int n)
{
    for (int p : {2, 3, 5})
        while (n % p == 0)
            n /= p;
    return n == 1;
}

constexpr std::size_t kMaxGridPoints = std::size_t(1) << 27;

struct FftwDeleter
{
    void operator()(void* p) const { fftw_free(p); }
};

template<class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template<class T>
FftwBuffer<T> fftw_buffer(std::size_t n)
{
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p)
        throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

class Workspace
{
  public:
    explicit Workspace(int cutoff)
        : m_(fft_grid_size(cutoff))
        , nreal_(std::size_t(m_) * m_ * m_)
        , ncplx_(std::size_t(m_) * m_ * (m_ / 2 + 1))
        , cbuf_(fftw_buffer<fftw_complex>(ncplx_))
        , prod_(fftw_buffer<double>(nreal_))
    {
        for (auto& r : fields_)
            r = fftw_buffer<double>(nreal_);
        std::lock_guard<std::mutex> lock(planner_mutex());
        c2r_ = fftw_plan_dft_c2r_3d(m_, m_, m_, cbuf_.get(), prod_.get(),
                                    FFTW_ESTIMATE);
        r2c_ = fftw_plan_dft_r2c_3d(m_, m_, m_, prod_.get(), cbuf_.get(),
                                    FFTW_ESTIMATE);
        if (!c2r_ || !r2c_)
            throw std::runtime_error("FFTW planning failed");
    }

    ~Workspace()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(c2r_);
        fftw_destroy_plan(r2c_);
    }

    Workspace(Workspace const&) = delete;
    Workspace& operator=(Workspace const&) = delete;

    SpectralField apply(SpectralField const& u, SpectralField const& v)
    {
        bind(u.mode_set_ptr());
        to_physical(u, 0);
        bool same = (&u == &v);
        if (!same)
            to_physical(v, 3);
        int const vb = same ? 0 : 3;

        auto const& ms = u.modes();
        std::size_t n = ms.size();
        std::vector<Vec3c> acc(n, Vec3c{});
        double const inv = 1.0 / static_cast<double>(nreal_);
        for (int j = 0; j < 3; ++j)
        {
            for (int i = 0; i < 3; ++i)
            {
                double const* ui = fields_[i].get();
                double const* vj = fields_[vb + j].get();
                double* p = prod_.get();
                for (std::size_t q = 0; q < nreal_; ++q)
                    p[q] = ui[q] * vj[q];
                fftw_execute_dft_r2c(r2c_, p, cbuf_.get());
                for (std::size_t s = 0; s < n; ++s)
                {
                    auto const& loc = locs_[s];
                    auto const& c = cbuf_[loc.index];
                    cplx val(c[0] * inv, (loc.conjugate ? -c[1] : c[1]) * inv);
                    WaveVector const& k = ms[s];
                    double ki = i == 0 ? k.x : (i == 1 ? k.y : k.z);
                    acc[s][j] += ki * val;
                }
            }
        }
        SpectralField out(u.mode_set_ptr());
        for (std::size_t s = 0; s < n; ++s)
        {
            Vec3c p = leray_project(ms[s], acc[s]);
            for (int j = 0; j < 3; ++j)
                out[s][j] = cplx(0, 1) * p[j];
        }
        return out;
    }

  private:
    struct Loc
    {
        std::size_t index;
        bool conjugate;
        std::size_t mirror;  // -k location when kz == 0, else npos
    };

    std::size_t cindex(int kx, int ky, int kz) const
    {
        auto wrap = [this](int a) { return std::size_t((a % m_ + m_) % m_); };
        return (wrap(kx) * m_ + wrap(ky)) * std::size_t(m_ / 2 + 1)
               + std::size_t(kz);
    }

    void bind(ModeSetPtr const& ms)
    {
        if (bound_ && (bound_ == ms || *bound_ == *ms))
            return;
        bound_ = ms;
        locs_.clear();
        locs_.reserve(ms->size());
        for (auto const& k : ms->modes())
        {
            Loc loc{};
            loc.mirror = std::size_t(-1);
            if (k.z > 0)
            {
                loc.index = cindex(k.x, k.y, k.z);
                loc.conjugate = false;
            }
            else if (k.z < 0)
            {
                loc.index = cindex(-k.x, -k.y, -k.z);
                loc.conjugate = true;
            }
            else
            {
                loc.index = cindex(k.x, k.y, 0);
                loc.conjugate = false;
                loc.mirror = cindex(-k.x, -k.y, 0);
            }
            locs_.push_back(loc);
        }
    }

    void to_physical(SpectralField const& f, int first)
    {
        for (int j = 0; j < 3; ++j)
        {
            std::fill_n(&cbuf_[0][0], 2 * ncplx_, 0.0);
            for (std::size_t s = 0; s < f.size(); ++s)
            {
                auto const& loc = locs_[s];
                cplx c = f[s][j];
                if (loc.conjugate)
                    c = std::conj(c);
                cbuf_[loc.index][0] = c.real();
                cbuf_[loc.index][1] = c.imag();
                if (loc.mirror != std::size_t(-1))
                {
                    cbuf_[loc.mirror][0] = c.real();
                    cbuf_[loc.mirror][1] = -c.imag();
                }
            }
            fftw_execute_dft_c2r(c2r_, cbuf_.get(), fields_[first + j].get());
        }
    }

    int m_;
    std::size_t nreal_;
    std::size_t ncplx_;
    FftwBuffer<fftw_complex> cbuf_;
    FftwBuffer<double> prod_;
    std::array<FftwBuffer<double>, 6> fields_;
    fftw_plan c2r_ = nullptr;
    fftw_plan r2c_ = nullptr;
    ModeSetPtr bound_;
    std::vector<Loc> locs_;
};

Workspace& workspace_for(int cutoff)
{
    thread_local std::map<int, std::unique_ptr<Workspace>> cache;
    auto& slot = cache[cutoff];
    if (!slot)
        slot = std::make_unique<Workspace>(cutoff);
    return *slot;
}
}  // namespace

int fft_grid_size(int cutoff)
{
    if (cutoff < 1)
        throw std::invalid_argument("mode cutoff must be at least 1");
    int m = 3 * cutoff + 1;
    while (!is_smooth(m))
        ++m;
    if (std::size_t(m) * m * m > kMaxGridPoints)
        throw std::length_error("dealiased transform grid too large for cutoff "
                                + std::to_string(cutoff));
    return m;
}

SpectralField bilinear_fft(SpectralField const& u, SpectralField const& v)
{
    if (u.mode_set_ptr() != v.mode_set_ptr() && !(u.modes() == v.modes()))
        throw std::invalid_argument("fields live on different mode sets");
    return workspace_for(u.modes().cutoff()).apply(u, v);
}

}  // namespace tsns
