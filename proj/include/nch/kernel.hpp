#pragma once

// Periodized Gaussian interaction kernel and the nonlocal operator
// L phi = (J*1) phi - J*phi it induces on the grid.
//
// The kernel J_delta(x) = 4/(pi*delta^4) * exp(-|x|^2/delta^2) is wrapped
// over the periodic lattice of domain translates by a truncated image sum.
// Its grid samples, the scalar J*1 = h1*h2*sum J, and the Fourier symbol
// sigma_kl = J*1 - |Omega|*Jhat_kl of L are all computed once at build time;
// afterwards every convolution costs one forward/backward transform pair.

#include <string>
#include <vector>

#include "nch/grid.hpp"

namespace nch {

struct KernelReport {
    double j_star_one = 0.0;            // h1*h2 * sum of samples
    double gamma0 = 0.0;                // eps^2 * (J*1) - 1
    bool gamma0_positive = false;
    double second_moment = 0.0;         // 0.5 * h1*h2 * sum J_ij * |x_ij|^2
    double min_sample = 0.0;
    double max_symbol_negativity = 0.0; // max(0, -min_kl sigma_kl)
    double evenness_residual = 0.0;     // max |J(-x) - J(x)| over nodes
};

class Kernel {
public:
    // delta > 0; image_range P >= 0 controls the periodization sum over
    // translates p,q in [-P, P].
    Kernel(GridPtr grid, double delta, int image_range = 1);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    double delta() const { return delta_; }
    int image_range() const { return image_range_; }

    // Periodized kernel samples at the grid nodes (peak at position 0).
    const RealField& samples() const { return samples_; }

    double j_star_one() const { return j_star_one_; }

    // Symbol of the nonlocal operator, indexed by FFT bin; sigma(0,0) == 0.
    double sigma_at_bin(int a, int b) const { return sigma_[grid_->idx(a, b)]; }
    const std::vector<double>& sigma() const { return sigma_; }

    // |Omega| * Jhat_kl, the real multiplier implementing J * phi; equals
    // j_star_one - sigma.
    const std::vector<double>& conv_symbol() const { return conv_symbol_; }

    // Warnings recorded at build time (e.g. delta wider than the domain).
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    GridPtr grid_;
    double delta_;
    int image_range_;
    RealField samples_;
    double j_star_one_;
    std::vector<double> sigma_;
    std::vector<double> conv_symbol_;
    std::vector<std::string> warnings_;
};

Kernel build_kernel(GridPtr grid, double delta, int image_range = 1);

// Periodic convolution (J * phi), evaluated spectrally.
RealField convolve(const Kernel& k, const RealField& phi);

// (J*1) phi - J*phi; annihilates constants, diagonal with symbol sigma.
RealField nonlocal_apply(const Kernel& k, const RealField& phi);

// eps^2 * (J*1) - 1. Positivity makes the leading diffusion coefficient of
// the model positive; a non-positive value is reported, not thrown.
double gamma0(const Kernel& k, double epsilon);

KernelReport verify_conditions(const Kernel& k, double epsilon);

} // namespace nch
