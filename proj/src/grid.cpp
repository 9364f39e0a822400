#include "nch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace nch {

namespace {

// The FFTW planner is not thread-safe; plan creation/destruction is
// serialized. Plan execution via fftw_execute_dft is safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(std::complex<double>* p) {
    return reinterpret_cast<fftw_complex*>(p);
}

// Phase factor relating position-referenced coefficients to raw index-DFT
// bins: c_kl = (-1)^{k+l} * F_kl / (N1*N2). Parity of the signed mode equals
// the parity of its bin because N is even.
double bin_sign(int a, int b) { return ((a + b) & 1) ? -1.0 : 1.0; }

} // namespace

Grid::Grid(double X1, double X2, int N1, int N2)
    : x1_(X1), x2_(X2), n1_(N1), n2_(N2) {
    if (!(X1 > 0.0) || !(X2 > 0.0))
        throw ConfigError("grid: domain half-widths must be positive");
    if (N1 < 4 || N2 < 4 || N1 % 2 != 0 || N2 % 2 != 0)
        throw ConfigError("grid: mode counts must be even and >= 4");

    h1_ = 2.0 * x1_ / n1_;
    h2_ = 2.0 * x2_ / n2_;

    lambda_.resize(size());
    const double c1 = std::numbers::pi / x1_;
    const double c2 = std::numbers::pi / x2_;
    for (int a = 0; a < n1_; ++a) {
        const double kx = c1 * mode_of_bin(a, n1_);
        for (int b = 0; b < n2_; ++b) {
            const double ly = c2 * mode_of_bin(b, n2_);
            lambda_[idx(a, b)] = kx * kx + ly * ly;
        }
    }

    // FFTW_UNALIGNED keeps execution independent of buffer addresses, so
    // plans can be reused on any caller-provided arrays and two runs of the
    // same binary produce identical bits.
    std::vector<std::complex<double>> a(size()), b(size());
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_plan_ = fftw_plan_dft_2d(n1_, n2_, as_fftw(a.data()), as_fftw(b.data()),
                                 FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_plan_ = fftw_plan_dft_2d(n1_, n2_, as_fftw(a.data()), as_fftw(b.data()),
                                 FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!fwd_plan_ || !bwd_plan_)
        throw NumericError("grid: FFT plan creation failed");
}

Grid::~Grid() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_plan_) fftw_destroy_plan(fwd_plan_);
    if (bwd_plan_) fftw_destroy_plan(bwd_plan_);
}

void Grid::fft_raw(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(fwd_plan_, as_fftw(const_cast<std::complex<double>*>(in)),
                     as_fftw(out));
}

void Grid::ifft_raw(const std::complex<double>* in, std::complex<double>* out) const {
    fftw_execute_dft(bwd_plan_, as_fftw(const_cast<std::complex<double>*>(in)),
                     as_fftw(out));
}

GridPtr make_grid(double X1, double X2, int N1, int N2) {
    return std::make_shared<const Grid>(X1, X2, N1, N2);
}

void require_compatible(const Grid& a, const Grid& b, const char* what) {
    if (!a.compatible(b))
        throw ShapeError(std::string(what) + ": fields live on different grids");
}

SpectralField fft_forward(const RealField& f) {
    const Grid& g = f.grid();
    std::vector<std::complex<double>> in(g.size());
    std::copy(f.values().begin(), f.values().end(), in.begin());

    SpectralField out(f.grid_ptr());
    g.fft_raw(in.data(), out.coeffs().data());

    const double scale = 1.0 / static_cast<double>(g.size());
    for (int a = 0; a < g.n1(); ++a)
        for (int b = 0; b < g.n2(); ++b)
            out.coeffs()[g.idx(a, b)] *= bin_sign(a, b) * scale;
    return out;
}

RealField fft_inverse(const SpectralField& F) {
    const Grid& g = F.grid();
    std::vector<std::complex<double>> in(g.size()), out(g.size());
    for (int a = 0; a < g.n1(); ++a)
        for (int b = 0; b < g.n2(); ++b)
            in[g.idx(a, b)] = bin_sign(a, b) * F.coeffs()[g.idx(a, b)];
    g.ifft_raw(in.data(), out.data());

    RealField f(F.grid_ptr());
    for (std::size_t m = 0; m < g.size(); ++m)
        f.values()[m] = out[m].real();
    return f;
}

namespace {

// Apply a real per-mode multiplier through one raw round trip. Phases cancel,
// so the multiplier table can be built in bin order directly.
RealField apply_symbol(const RealField& f, const std::vector<double>& symbol) {
    const Grid& g = f.grid();
    std::vector<std::complex<double>> hat(g.size()), back(g.size());
    std::copy(f.values().begin(), f.values().end(), hat.begin());

    std::vector<std::complex<double>> tmp(g.size());
    g.fft_raw(hat.data(), tmp.data());
    for (std::size_t m = 0; m < g.size(); ++m)
        tmp[m] *= symbol[m];
    g.ifft_raw(tmp.data(), back.data());

    RealField out(f.grid_ptr());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        out.values()[m] = back[m].real() * scale;
    return out;
}

// First-derivative multiplier along one direction; the Nyquist mode is zeroed
// so odd-order derivatives of real fields stay real.
RealField apply_first_derivative(const RealField& f, bool along_x) {
    const Grid& g = f.grid();
    std::vector<std::complex<double>> hat(g.size()), tmp(g.size()), back(g.size());
    std::copy(f.values().begin(), f.values().end(), hat.begin());
    g.fft_raw(hat.data(), tmp.data());

    const double c = std::numbers::pi / (along_x ? g.x1() : g.x2());
    for (int a = 0; a < g.n1(); ++a) {
        for (int b = 0; b < g.n2(); ++b) {
            const int m = along_x ? g.mode_of_bin(a, g.n1())
                                  : g.mode_of_bin(b, g.n2());
            const bool nyq = along_x ? (a == g.n1() / 2) : (b == g.n2() / 2);
            const std::complex<double> mult =
                nyq ? std::complex<double>(0.0, 0.0)
                    : std::complex<double>(0.0, c * m);
            tmp[g.idx(a, b)] *= mult;
        }
    }
    g.ifft_raw(tmp.data(), back.data());

    RealField out(f.grid_ptr());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        out.values()[m] = back[m].real() * scale;
    return out;
}

} // namespace

RealField laplacian(const RealField& f) {
    const Grid& g = f.grid();
    std::vector<double> symbol(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        symbol[m] = -g.lambda()[m];
    return apply_symbol(f, symbol);
}

std::pair<RealField, RealField> gradient(const RealField& f) {
    return {apply_first_derivative(f, true), apply_first_derivative(f, false)};
}

RealField divergence(const RealField& fx, const RealField& fy) {
    require_compatible(fx.grid(), fy.grid(), "divergence");
    RealField dx = apply_first_derivative(fx, true);
    RealField dy = apply_first_derivative(fy, false);
    for (std::size_t m = 0; m < dx.size(); ++m)
        dx.values()[m] += dy.values()[m];
    return dx;
}

RealField inverse_laplacian(const RealField& f) {
    const double mu = mean(f);
    const double linf = norm(f, std::numeric_limits<double>::infinity());
    if (std::abs(mu) > 1e-12 * std::max(linf, 1e-300))
        throw DomainError("inverse_laplacian: input mean " + std::to_string(mu) +
                          " is not zero relative to ||f||_inf = " + std::to_string(linf));

    const Grid& g = f.grid();
    std::vector<double> symbol(g.size());
    symbol[0] = 0.0;
    for (std::size_t m = 1; m < g.size(); ++m)
        symbol[m] = 1.0 / g.lambda()[m];
    return apply_symbol(f, symbol);
}

double inner_l2(const RealField& f, const RealField& g) {
    require_compatible(f.grid(), g.grid(), "inner_l2");
    double s = 0.0;
    for (std::size_t m = 0; m < f.size(); ++m)
        s += f.values()[m] * g.values()[m];
    return f.grid().cell_area() * s;
}

double norm(const RealField& f, double p) {
    if (std::isinf(p)) {
        double s = 0.0;
        for (double v : f.values())
            s = std::max(s, std::abs(v));
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double v : f.values())
            s += v * v;
        return std::sqrt(f.grid().cell_area() * s);
    }
    if (p == 4.0) {
        double s = 0.0;
        for (double v : f.values()) {
            const double v2 = v * v;
            s += v2 * v2;
        }
        return std::pow(f.grid().cell_area() * s, 0.25);
    }
    throw ConfigError("norm: p must be 2, 4, or inf");
}

double norm_hm1(const RealField& f) {
    const double mu = mean(f);
    const double linf = norm(f, std::numeric_limits<double>::infinity());
    if (std::abs(mu) > 1e-12 * std::max(linf, 1e-300))
        throw DomainError("norm_hm1: input mean " + std::to_string(mu) +
                          " is not zero relative to ||f||_inf = " + std::to_string(linf));

    // Parseval route: ||f||_{-1}^2 = |Omega| * sum_{(k,l)!=0} |c_kl|^2 / lambda_kl.
    const Grid& g = f.grid();
    std::vector<std::complex<double>> in(g.size()), hat(g.size());
    std::copy(f.values().begin(), f.values().end(), in.begin());
    g.fft_raw(in.data(), hat.data());

    const double scale = 1.0 / static_cast<double>(g.size());
    double s = 0.0;
    for (std::size_t m = 1; m < g.size(); ++m)
        s += std::norm(hat[m] * scale) / g.lambda()[m];
    return std::sqrt(g.domain_area() * s);
}

double mean(const RealField& f) {
    double s = 0.0;
    for (double v : f.values())
        s += v;
    return s / static_cast<double>(f.size());
}

} // namespace nch
