#include "nch/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nch {

namespace {

double bin_sign(int a, int b) { return ((a + b) & 1) ? -1.0 : 1.0; }

} // namespace

Kernel::Kernel(GridPtr grid, double delta, int image_range)
    : grid_(std::move(grid)), delta_(delta), image_range_(image_range),
      samples_(grid_) {
    if (!(delta_ > 0.0))
        throw ConfigError("kernel: delta must be positive");
    if (image_range_ < 0)
        throw ConfigError("kernel: image_range must be >= 0");

    const Grid& g = *grid_;
    if (delta_ > std::min(g.x1(), g.x2()))
        warnings_.push_back("kernel: delta=" + std::to_string(delta_) +
                            " exceeds the domain half-width; the kernel is not "
                            "effectively supported in the domain");

    // The periodized kernel inherits evenness from the Gaussian; computing
    // one quadrant and mirroring makes J(-x,-y) = J(x,y) hold bit-exactly.
    const double amp = 4.0 / (std::numbers::pi * delta_ * delta_ * delta_ * delta_);
    const double inv_d2 = 1.0 / (delta_ * delta_);
    for (int i = 0; i <= g.n1() / 2; ++i) {
        const double x = g.node_x(i);
        const int im = (g.n1() - i) % g.n1();
        for (int j = 0; j <= g.n2() / 2; ++j) {
            const double y = g.node_y(j);
            const int jm = (g.n2() - j) % g.n2();
            double s = 0.0;
            for (int p = -image_range_; p <= image_range_; ++p) {
                const double dx = x - 2.0 * g.x1() * p;
                for (int q = -image_range_; q <= image_range_; ++q) {
                    const double dy = y - 2.0 * g.x2() * q;
                    s += amp * std::exp(-(dx * dx + dy * dy) * inv_d2);
                }
            }
            samples_(i, j) = s;
            samples_(im, j) = s;
            samples_(i, jm) = s;
            samples_(im, jm) = s;
        }
    }

    double sum = 0.0;
    for (double v : samples_.values()) {
        if (!std::isfinite(v))
            throw NumericError("kernel: non-finite sample in periodization sum");
        sum += v;
    }
    j_star_one_ = g.cell_area() * sum;

    // Resolved kernels must integrate to 4/delta^2; a mismatch there means a
    // construction bug rather than quadrature error.
    const double expected = 4.0 / (delta_ * delta_);
    if (delta_ >= 8.0 * std::max(g.h1(), g.h2()) &&
        std::abs(j_star_one_ - expected) > 1e-6 * expected)
        throw NumericError("kernel: resolved kernel mass " + std::to_string(j_star_one_) +
                           " deviates from 4/delta^2 = " + std::to_string(expected));

    // conv_symbol = |Omega| * Jhat in the position-referenced convention;
    // by |W_kl| <= h1*h2*sum|J| = J*1 the symbol sigma = J*1 - W is
    // nonnegative up to FFT round-off for any nonnegative kernel.
    std::vector<std::complex<double>> in(g.size()), hat(g.size());
    std::copy(samples_.values().begin(), samples_.values().end(), in.begin());
    g.fft_raw(in.data(), hat.data());

    conv_symbol_.resize(g.size());
    sigma_.resize(g.size());
    const double ca = g.cell_area();
    for (int a = 0; a < g.n1(); ++a) {
        for (int b = 0; b < g.n2(); ++b) {
            const std::size_t m = g.idx(a, b);
            conv_symbol_[m] = ca * bin_sign(a, b) * hat[m].real();
            sigma_[m] = j_star_one_ - conv_symbol_[m];
        }
    }
    sigma_[0] = 0.0;
    conv_symbol_[0] = j_star_one_;
}

Kernel build_kernel(GridPtr grid, double delta, int image_range) {
    return Kernel(std::move(grid), delta, image_range);
}

namespace {

RealField apply_kernel_symbol(const Kernel& k, const RealField& phi,
                              const std::vector<double>& symbol) {
    require_compatible(k.grid(), phi.grid(), "kernel apply");
    const Grid& g = phi.grid();
    std::vector<std::complex<double>> in(g.size()), hat(g.size()), back(g.size());
    std::copy(phi.values().begin(), phi.values().end(), in.begin());
    g.fft_raw(in.data(), hat.data());
    for (std::size_t m = 0; m < g.size(); ++m)
        hat[m] *= symbol[m];
    g.ifft_raw(hat.data(), back.data());

    RealField out(phi.grid_ptr());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (std::size_t m = 0; m < g.size(); ++m)
        out.values()[m] = back[m].real() * scale;
    return out;
}

} // namespace

RealField convolve(const Kernel& k, const RealField& phi) {
    return apply_kernel_symbol(k, phi, k.conv_symbol());
}

RealField nonlocal_apply(const Kernel& k, const RealField& phi) {
    return apply_kernel_symbol(k, phi, k.sigma());
}

double gamma0(const Kernel& k, double epsilon) {
    if (!(epsilon > 0.0))
        throw ConfigError("gamma0: epsilon must be positive");
    return epsilon * epsilon * k.j_star_one() - 1.0;
}

KernelReport verify_conditions(const Kernel& k, double epsilon) {
    const Grid& g = k.grid();
    KernelReport r;
    r.j_star_one = k.j_star_one();
    r.gamma0 = gamma0(k, epsilon);
    r.gamma0_positive = r.gamma0 > 0.0;

    double min_sample = k.samples().values()[0];
    for (double v : k.samples().values())
        min_sample = std::min(min_sample, v);
    r.min_sample = min_sample;

    double moment = 0.0;
    for (int i = 0; i < g.n1(); ++i) {
        const double x = g.node_x(i);
        for (int j = 0; j < g.n2(); ++j) {
            const double y = g.node_y(j);
            moment += k.samples()(i, j) * (x * x + y * y);
        }
    }
    r.second_moment = 0.5 * g.cell_area() * moment;

    double min_sigma = 0.0;
    for (double s : k.sigma())
        min_sigma = std::min(min_sigma, s);
    r.max_symbol_negativity = -min_sigma;

    double evenness = 0.0;
    for (int i = 0; i < g.n1(); ++i)
        for (int j = 0; j < g.n2(); ++j)
            evenness = std::max(evenness, std::abs(k.samples().at_periodic(-i, -j) -
                                                   k.samples()(i, j)));
    r.evenness_residual = evenness;
    return r;
}

} // namespace nch
