#ifndef FBMC_INTERFERENCE_HPP
#define FBMC_INTERFERENCE_HPP

#include "fbmc/prototype.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

/// Structured matrices of the frame-level interference model.
/// S diagonal +/-1, E skew-symmetric circulant (M x M), Ebar skew-symmetric
/// tridiagonal Toeplitz (N x N), Etilde symmetric tridiagonal Toeplitz (N x N),
/// Zbar symmetric circulant (M x M).
struct StructMatrices {
    int M = 0;
    int N = 0;
    MatR S, E, Ebar, Etilde, Zbar;
};

/// Rejects M < 4, odd M, or N < 2. The default builds the matrices exactly as
/// displayed (clean circulant wrap). With wrap_corrected the four circulant
/// corner entries of E and Zbar are sign-flipped to match the physical
/// frequency wrap of the modulated pulses (g_{m+M,n} = -g_{m,n} for even-length
/// prototypes) -- the same signs the noise-covariance blocks carry; receivers
/// reconstruct interference with the corrected variant.
StructMatrices build_struct_matrices(int M, int N, bool wrap_corrected = false);

/// C = D + j*(beta*E*D + S*(-gamma*D*Ebar + delta*Zbar*D*Etilde)); Re{C} = D.
MatC virtualize(const MatR& D, const InterferenceWeights& w, const StructMatrices& sm);
VirtualFrame virtualize(const OqamFrame& D, const InterferenceWeights& w, const StructMatrices& sm);

/// Elementwise real part.
MatR devirtualize(const MatC& C);
OqamFrame devirtualize(const VirtualFrame& C);

struct Histogram {
    VecR bin_centers;
    VecR density;  // normalized: sum(density)*bin_width == 1
    double mean = 0.0;
    double variance = 0.0;
    long samples = 0;
};

/// Histogram of Im{C} entries. Requires bins >= 10.
Histogram interference_histogram(const MatC& C, int bins);
Histogram interference_histogram(const std::vector<MatC>& frames, int bins);

}  // namespace fbmc

#endif
