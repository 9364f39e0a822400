#pragma once

// Periodic collocation grid on the rectangle (-X1,X1) x (-X2,X2) with the
// discrete Fourier machinery built on top of it: forward/inverse transforms,
// spectral differential operators, the inverse Laplacian on mean-zero fields,
// and the discrete inner products and norms.
//
// Conventions:
//   * Array storage is row-major, index (i,j) -> i*N2 + j, with node
//     positions x_i = -X1 + i*h1, y_j = -X2 + j*h2 for 0 <= i < N1.
//   * A spectral coefficient c_{kl} is referenced to position, i.e.
//     f_ij = sum_{k,l} c_kl exp(i*pi*(k*x_i/X1 + l*y_j/X2)), normalized so
//     that a forward transform of cos(pi*x/X1) puts 1/2 at modes (+-1, 0).
//   * Mode indices run over k in (-N1/2, N1/2], stored FFT-style: bin a
//     holds k = a for a <= N1/2 and k = a - N1 otherwise.

#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "nch/errors.hpp"

namespace nch {

class RealField;
class SpectralField;

class Grid {
public:
    // N1, N2 must be even and >= 4; X1, X2 > 0.
    Grid(double X1, double X2, int N1, int N2);
    ~Grid();

    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    double x1() const { return x1_; }
    double x2() const { return x2_; }
    int n1() const { return n1_; }
    int n2() const { return n2_; }
    double h1() const { return h1_; }
    double h2() const { return h2_; }
    double cell_area() const { return h1_ * h2_; }
    double domain_area() const { return 4.0 * x1_ * x2_; }
    std::size_t size() const { return static_cast<std::size_t>(n1_) * n2_; }

    double node_x(int i) const { return -x1_ + i * h1_; }
    double node_y(int j) const { return -x2_ + j * h2_; }

    // Signed mode number of FFT bin a (same rule for both directions).
    int mode_of_bin(int a, int n) const { return a <= n / 2 ? a : a - n; }
    int bin_of_mode(int k, int n) const { return ((k % n) + n) % n; }

    // Symbol of -Laplacian at bin (a,b): (k*pi/X1)^2 + (l*pi/X2)^2.
    double lambda_at_bin(int a, int b) const { return lambda_[idx(a, b)]; }
    double lambda_at_mode(int k, int l) const {
        return lambda_[idx(bin_of_mode(k, n1_), bin_of_mode(l, n2_))];
    }
    const std::vector<double>& lambda() const { return lambda_; }

    bool compatible(const Grid& other) const {
        return n1_ == other.n1_ && n2_ == other.n2_ &&
               x1_ == other.x1_ && x2_ == other.x2_;
    }

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n2_ + j;
    }

    // Unnormalized index-space transforms (exp(-2*pi*i*(ka/N1+lb/N2)) forward,
    // conjugate backward, no 1/N scaling). Thread-safe; in != out required.
    void fft_raw(const std::complex<double>* in, std::complex<double>* out) const;
    void ifft_raw(const std::complex<double>* in, std::complex<double>* out) const;

private:
    double x1_, x2_;
    int n1_, n2_;
    double h1_, h2_;
    std::vector<double> lambda_;
    fftw_plan fwd_plan_ = nullptr;
    fftw_plan bwd_plan_ = nullptr;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(double X1, double X2, int N1, int N2);

// Real-valued periodic grid function.
class RealField {
public:
    RealField() = default;
    explicit RealField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)),
          values_(grid_->size(), fill) {}

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    bool has_grid() const { return static_cast<bool>(grid_); }

    double& operator()(int i, int j) { return values_[grid_->idx(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_->idx(i, j)]; }

    // Periodic access: f_{i+pN1, j+qN2} = f_{ij}.
    double at_periodic(int i, int j) const {
        const int n1 = grid_->n1(), n2 = grid_->n2();
        return values_[grid_->idx(((i % n1) + n1) % n1, ((j % n2) + n2) % n2)];
    }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

// Complex Fourier coefficients in the position-referenced convention above.
class SpectralField {
public:
    SpectralField() = default;
    explicit SpectralField(GridPtr grid)
        : grid_(std::move(grid)), coeffs_(grid_->size()) {}

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    std::complex<double>& at_bin(int a, int b) { return coeffs_[grid_->idx(a, b)]; }
    std::complex<double> at_bin(int a, int b) const { return coeffs_[grid_->idx(a, b)]; }

    std::complex<double>& at_mode(int k, int l) {
        return coeffs_[grid_->idx(grid_->bin_of_mode(k, grid_->n1()),
                                  grid_->bin_of_mode(l, grid_->n2()))];
    }
    std::complex<double> at_mode(int k, int l) const {
        return coeffs_[grid_->idx(grid_->bin_of_mode(k, grid_->n1()),
                                  grid_->bin_of_mode(l, grid_->n2()))];
    }

    std::vector<std::complex<double>>& coeffs() { return coeffs_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

private:
    GridPtr grid_;
    std::vector<std::complex<double>> coeffs_;
};

// Transforms.
SpectralField fft_forward(const RealField& f);
RealField fft_inverse(const SpectralField& F);

// Spectral differential operators.
RealField laplacian(const RealField& f);
std::pair<RealField, RealField> gradient(const RealField& f);
RealField divergence(const RealField& fx, const RealField& fy);

// Inverse of -Laplacian restricted to mean-zero fields; the zero mode of the
// result is zero. Throws DomainError if |mean(f)| > 1e-12 * ||f||_inf.
RealField inverse_laplacian(const RealField& f);

// Discrete inner products and norms: <f,g> = h1*h2*sum f_ij g_ij.
double inner_l2(const RealField& f, const RealField& g);
double norm(const RealField& f, double p); // p in {2, 4, inf}
double norm_hm1(const RealField& f);       // ||(-Lap)^{-1/2} f||_2, mean-zero input
double mean(const RealField& f);

void require_compatible(const Grid& a, const Grid& b, const char* what);

} // namespace nch
