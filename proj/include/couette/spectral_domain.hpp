#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/fft_plan.hpp"

namespace couette {

using cplx = std::complex<double>;

/// Discrete stand-in for the frequency plane (k, xi): a periodic box of
/// size lx x ly resolved by nx x ny modes. A large lx gives a fine dk, which
/// is how the whole-plane low-frequency behaviour is approached.
///
/// Storage follows FFT order: array index i in [0, nx) carries the signed
/// mode number i for i <= nx/2 and i - nx above, so the signed set is
/// {-nx/2+1, ..., nx/2}. The same holds for the xi direction.
struct FrequencyGrid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;

    double dk() const { return 2.0 * std::numbers::pi / lx; }
    double dxi() const { return 2.0 * std::numbers::pi / ly; }

    static int signed_mode(int index, int n) { return index <= n / 2 ? index : index - n; }
    int kmode(int i) const { return signed_mode(i, nx); }
    int ximode(int j) const { return signed_mode(j, ny); }
    double k(int i) const { return kmode(i) * dk(); }
    double xi(int j) const { return ximode(j) * dxi(); }

    double k_max() const { return (nx / 2) * dk(); }
    double xi_max() const { return (ny / 2) * dxi(); }

    double dx() const { return lx / nx; }
    double dy() const { return ly / ny; }

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t flat(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }

    /// Array index of the signed mode m (inverse of signed_mode).
    static int index_of(int m, int n) { return m >= 0 ? m : m + n; }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;
};

inline FrequencyGrid make_grid(int nx, int ny, double lx, double ly) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
        throw ValidationError("make_grid: mode counts must be even and >= 8, got " +
                              std::to_string(nx) + "x" + std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw ValidationError("make_grid: box lengths must be positive and finite");
    return FrequencyGrid{nx, ny, lx, ly};
}

/// Fourier coefficients of a (usually real) field on a FrequencyGrid.
/// Normalized as the unitary continuous transform,
///   coeff(k, xi) ~ (1/2pi) * integral u(x, y) exp(-i(kx + xi y)) dx dy,
/// so that sum |coeff|^2 dk dxi equals the physical L2 norm squared.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(const FrequencyGrid& grid) : grid_(grid), coeffs_(grid.size()) {}
    SpectralField(const FrequencyGrid& grid, std::vector<cplx> coeffs)
        : grid_(grid), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != grid_.size())
            throw ValidationError("SpectralField: coefficient count does not match grid");
    }

    const FrequencyGrid& grid() const { return grid_; }
    std::span<const cplx> coeffs() const { return coeffs_; }
    std::span<cplx> coeffs() { return coeffs_; }
    std::vector<cplx>& storage() { return coeffs_; }

    cplx& operator()(int i, int j) { return coeffs_[grid_.flat(i, j)]; }
    const cplx& operator()(int i, int j) const { return coeffs_[grid_.flat(i, j)]; }

    /// Coefficient at signed mode numbers (mk, mxi).
    cplx& at_mode(int mk, int mxi) {
        return (*this)(FrequencyGrid::index_of(mk, grid_.nx), FrequencyGrid::index_of(mxi, grid_.ny));
    }
    const cplx& at_mode(int mk, int mxi) const {
        return (*this)(FrequencyGrid::index_of(mk, grid_.nx), FrequencyGrid::index_of(mxi, grid_.ny));
    }

    SpectralField& operator+=(const SpectralField& other) {
        require_same_grid(other);
        for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] += other.coeffs_[n];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& other) {
        require_same_grid(other);
        for (std::size_t n = 0; n < coeffs_.size(); ++n) coeffs_[n] -= other.coeffs_[n];
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

    /// Apply a per-mode symbol: coeff(i, j) *= symbol(k, xi).
    template <class Symbol>
    SpectralField mapped(Symbol&& symbol) const {
        SpectralField out(grid_);
        for (int i = 0; i < grid_.nx; ++i) {
            const double k = grid_.k(i);
            for (int j = 0; j < grid_.ny; ++j)
                out(i, j) = (*this)(i, j) * symbol(k, grid_.xi(j));
        }
        return out;
    }

    bool all_finite() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](const cplx& c) {
            return std::isfinite(c.real()) && std::isfinite(c.imag());
        });
    }

    /// Discrete L2 norm, sqrt(sum |c|^2 dk dxi).
    double l2_norm() const {
        double s = 0.0;
        for (const auto& c : coeffs_) s += std::norm(c);
        return std::sqrt(s * grid_.dk() * grid_.dxi());
    }

    /// Largest |c(-k,-xi) - conj c(k,xi)| relative to max |c|. Modes are
    /// paired modulo the grid, so Nyquist rows pair with themselves.
    double hermitian_defect() const {
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i < grid_.nx; ++i) {
            const int mi = (grid_.nx - i) % grid_.nx;
            for (int j = 0; j < grid_.ny; ++j) {
                const int mj = (grid_.ny - j) % grid_.ny;
                worst = std::max(worst, std::abs((*this)(mi, mj) - std::conj((*this)(i, j))));
                scale = std::max(scale, std::abs((*this)(i, j)));
            }
        }
        return scale > 0.0 ? worst / scale : 0.0;
    }

    bool is_hermitian(double rel_tol = 1e-12) const { return hermitian_defect() <= rel_tol; }

private:
    void require_same_grid(const SpectralField& other) const {
        if (!(grid_ == other.grid_)) throw ValidationError("SpectralField: grid mismatch");
    }

    FrequencyGrid grid_{};
    std::vector<cplx> coeffs_;
};

/// Physical sample u[ix * ny + iy] at x = ix * lx / nx, y = iy * ly / ny.
inline SpectralField transform_forward(std::span<const double> physical, const FrequencyGrid& grid) {
    if (physical.size() != grid.size())
        throw ValidationError("transform_forward: array has " + std::to_string(physical.size()) +
                              " samples, grid needs " + std::to_string(grid.size()));
    std::vector<cplx> data(physical.begin(), physical.end());
    detail::fft2d_inplace(data, grid.nx, grid.ny, FFTW_FORWARD);
    const double scale = grid.lx * grid.ly / (2.0 * std::numbers::pi * static_cast<double>(grid.size()));
    for (auto& c : data) c *= scale;
    return SpectralField(grid, std::move(data));
}

/// Complex-valued inverse; for a Hermitian field the imaginary part is roundoff.
inline std::vector<cplx> transform_inverse_complex(const SpectralField& field) {
    const auto& grid = field.grid();
    std::vector<cplx> data(field.coeffs().begin(), field.coeffs().end());
    detail::fft2d_inplace(data, grid.nx, grid.ny, FFTW_BACKWARD);
    const double scale = 2.0 * std::numbers::pi / (grid.lx * grid.ly);
    for (auto& c : data) c *= scale;
    return data;
}

inline std::vector<double> transform_inverse(const SpectralField& field) {
    auto data = transform_inverse_complex(field);
    std::vector<double> out(data.size());
    std::transform(data.begin(), data.end(), out.begin(), [](const cplx& c) { return c.real(); });
    return out;
}

/// Physical-space L2 norm with the matching quadrature weight dx dy.
inline double physical_l2_norm(std::span<const double> u, const FrequencyGrid& grid) {
    double s = 0.0;
    for (double v : u) s += v * v;
    return std::sqrt(s * grid.dx() * grid.dy());
}

/// Symbol of the sheared Laplacian Delta_L = dz^2 + (dy - t dz)^2:
/// -(k^2 + (xi - k t)^2).
inline double laplacian_moving_symbol(double k, double xi, double t) {
    const double s = xi - k * t;
    return -(k * k + s * s);
}

inline SpectralField laplacian_moving(const SpectralField& field, double t) {
    return field.mapped([t](double k, double xi) { return cplx(laplacian_moving_symbol(k, xi, t)); });
}

struct VelocityField {
    SpectralField u1;
    SpectralField u2;
};

/// grad_perp (-Delta_L)^{-1} f with grad_perp = (dy, -dx) in sheared
/// coordinates: symbols i(xi - k t) / D and -i k / D, D = k^2 + (xi - k t)^2.
/// This is the convention under which the advection term appears with a
/// plus sign on the right-hand side of the sheared vorticity equation; it is
/// the negative of the perturbation velocity u = (-dy, dx)(-Delta)^{-1} omega.
/// The D = 0 mode (only k = xi = 0) is zeroed, never divided.
inline VelocityField biot_savart_velocity(const SpectralField& f, double t) {
    const auto& grid = f.grid();
    VelocityField v{SpectralField(grid), SpectralField(grid)};
    for (int i = 0; i < grid.nx; ++i) {
        const double k = grid.k(i);
        for (int j = 0; j < grid.ny; ++j) {
            const double s = grid.xi(j) - k * t;
            const double d = k * k + s * s;
            if (d == 0.0) continue;
            const cplx c = f(i, j);
            v.u1(i, j) = cplx(0.0, s / d) * c;
            v.u2(i, j) = cplx(0.0, -k / d) * c;
        }
    }
    return v;
}

/// Sheared-frame label xi corresponds to laboratory frequency xi - k t.
inline double lab_frequency(double k, double xi_moving, double t) { return xi_moving - k * t; }

}  // namespace couette
