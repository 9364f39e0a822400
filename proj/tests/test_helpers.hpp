#pragma once

// Shared helpers for the test suites: seeded random fields, band-limited
// filtering through the public transform API, and a brute-force reference
// convolution.

#include <cmath>
#include <cstdint>

#include "nch/grid.hpp"
#include "nch/kernel.hpp"
#include "nch/rng.hpp"

namespace nch_test {

inline nch::RealField random_field(nch::GridPtr grid, double amplitude,
                                   std::uint64_t seed) {
    nch::RealField f(std::move(grid));
    nch::Xorshift64Star rng(seed);
    for (double& v : f.values())
        v = rng.next_symmetric(amplitude);
    return f;
}

inline nch::RealField zero_mean(nch::RealField f) {
    const double mu = nch::mean(f);
    for (double& v : f.values())
        v -= mu;
    return f;
}

// Remove the Nyquist rows/columns so first-derivative identities are exact.
inline nch::RealField band_limit(const nch::RealField& f) {
    nch::SpectralField hat = nch::fft_forward(f);
    const nch::Grid& g = f.grid();
    for (int a = 0; a < g.n1(); ++a)
        for (int b = 0; b < g.n2(); ++b)
            if (a == g.n1() / 2 || b == g.n2() / 2)
                hat.at_bin(a, b) = 0.0;
    return nch::fft_inverse(hat);
}

// O(N^4) reference for the periodic convolution: the kernel factor is read
// at the wrapped displacement (i-p, j-q) from the node-sampled array, whose
// peak sits at bin (N1/2, N2/2).
inline nch::RealField direct_convolution(const nch::Kernel& k,
                                         const nch::RealField& phi) {
    const nch::Grid& g = phi.grid();
    nch::RealField out(phi.grid_ptr());
    const int n1 = g.n1(), n2 = g.n2();
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            double s = 0.0;
            for (int p = 0; p < n1; ++p)
                for (int q = 0; q < n2; ++q)
                    s += k.samples().at_periodic(i - p + n1 / 2, j - q + n2 / 2) *
                         phi(p, q);
            out(i, j) = g.cell_area() * s;
        }
    }
    return out;
}

} // namespace nch_test
