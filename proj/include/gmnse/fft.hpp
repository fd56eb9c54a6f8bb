#pragma once

#include <fftw3.h>

#include <cstring>
#include <memory>
#include <mutex>

#include "gmnse/field.hpp"
#include "gmnse/grid.hpp"

namespace gmnse {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Per-owner FFTW scratch: three physical component buffers, one product
/// buffer, one spectral staging buffer, and the plans that tie them together.
/// Plans use FFTW_ESTIMATE so the algorithm choice (and with it every bit of
/// roundoff) is reproducible run to run. Plan creation is serialized;
/// execution only touches this workspace, so distinct workspaces may run
/// concurrently.
///
/// Transform convention: forward r2c output is divided by n^3, so spectral
/// coefficients are the trigonometric-polynomial coefficients themselves and
/// the backward c2r needs no scaling.
class FftWorkspace {
  public:
    explicit FftWorkspace(std::shared_ptr<const Grid> g) : grid_(std::move(g)) {
        const Grid& gr = *grid_;
        for (int d = 0; d < 3; ++d)
            phys_[d] = static_cast<real*>(fftw_malloc(sizeof(real) * gr.nphys));
        prod_ = static_cast<real*>(fftw_malloc(sizeof(real) * gr.nphys));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * gr.nspec));
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        for (int d = 0; d < 3; ++d)
            c2r_[d] = fftw_plan_dft_c2r_3d(gr.n, gr.n, gr.n, spec_, phys_[d],
                                           FFTW_ESTIMATE);
        r2c_ = fftw_plan_dft_r2c_3d(gr.n, gr.n, gr.n, prod_, spec_, FFTW_ESTIMATE);
    }

    ~FftWorkspace() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        for (int d = 0; d < 3; ++d) fftw_destroy_plan(c2r_[d]);
        fftw_destroy_plan(r2c_);
        for (int d = 0; d < 3; ++d) fftw_free(phys_[d]);
        fftw_free(prod_);
        fftw_free(spec_);
    }

    FftWorkspace(const FftWorkspace&) = delete;
    FftWorkspace& operator=(const FftWorkspace&) = delete;

    const std::shared_ptr<const Grid>& grid() const { return grid_; }

    /// Inverse-transform all three components of u into the physical buffers.
    void to_physical(const SpectralField& u) {
        if (u.grid != grid_) throw GridMismatchError("FftWorkspace: grid mismatch");
        for (int d = 0; d < 3; ++d) {
            std::memcpy(spec_, u.comp[d].data(), sizeof(fftw_complex) * grid_->nspec);
            fftw_execute(c2r_[d]);  // destroys spec_, which is staging only
        }
    }

    const real* physical(int d) const { return phys_[d]; }
    real* product_buffer() { return prod_; }

    /// Forward-transform the product buffer; result (normalized) lands in the
    /// spectral staging buffer, valid until the next transform call.
    const complex* forward_product() {
        fftw_execute(r2c_);
        const real s = 1.0 / static_cast<real>(grid_->nphys);
        auto* c = reinterpret_cast<complex*>(spec_);
        for (std::size_t i = 0; i < grid_->nspec; ++i) c[i] *= s;
        return c;
    }

    /// Physical values of an arbitrary spectral scalar (copies out; clobbers
    /// the first physical buffer).
    std::vector<real> scalar_to_physical(const std::vector<complex>& in) {
        if (in.size() != grid_->nspec)
            throw GridMismatchError("scalar_to_physical: size mismatch");
        std::memcpy(spec_, in.data(), sizeof(fftw_complex) * grid_->nspec);
        fftw_execute(c2r_[0]);
        return std::vector<real>(phys_[0], phys_[0] + grid_->nphys);
    }

  private:
    std::shared_ptr<const Grid> grid_;
    real* phys_[3];
    real* prod_;
    fftw_complex* spec_;
    fftw_plan c2r_[3];
    fftw_plan r2c_;
};

}  // namespace gmnse
