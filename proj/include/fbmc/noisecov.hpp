#ifndef FBMC_NOISECOV_HPP
#define FBMC_NOISECOV_HPP

#include <vector>

#include "fbmc/prototype.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

/// M x M covariance block of the AFB noise in the frequency direction:
/// unit diagonal, +j*beta superdiagonal, -j*beta subdiagonal, corners
/// (0,M-1) = +j*beta and (M-1,0) = -j*beta.
MatC build_B(int M, double beta);

/// Time-direction blocks A(+/-) = j * (+/-gamma on the diagonal, delta on the
/// off-diagonals, -delta corners). sign = +1 or -1.
MatC build_Apm(int M, double gamma, double delta, int sign);

/// diag(1,-1,1,...) as a vector.
VecR sign_diagonal(int M);

/// Normalized (MN x MN) covariance of vec(W^(r)): block tridiagonal, block
/// Toeplitz with diagonal B, superdiagonal S*A+, subdiagonal S*A-.
MatC assemble_Bbar(const MatC& B, const MatC& Aplus, const MatC& Aminus, const VecR& S, int N);

/// Sample covariance of vec(AFB(white time noise)) over the given trials.
MatC empirical_noise_cov(const PrototypeFilter& g, int M, int N, int trials, std::uint64_t seed,
                         double sigma2 = 1.0);

/// Index maps between the vectorized unfolding noise stackings:
/// w2[i] = w3[p23[i]] and w1[i] = w3[p13[i]].
struct PermutationMaps {
    std::vector<int> p23;
    std::vector<int> p13;
    int M = 0, N = 0, n_rx = 0;
};

PermutationMaps build_permutations(int M, int N, int n_rx);

/// Dense 0/1 matrix P with (P x)[i] = x[map[i]] (for the identity checks).
MatR permutation_matrix(const std::vector<int>& map);

/// C_{w1} = P13 (sigma2 I_{N_R} (x) Bbar) P13^T.
MatC build_Cw1(const MatC& Bbar, const PermutationMaps& maps, int n_rx, double sigma2);

struct WlsResult {
    MatC value;
    bool ridged = false;  // Bbar needed the 1e-8 ridge (eigenvalue below 1e-10)
};

/// Weighted-LS channel update: per antenna r,
/// H^(r) = [Phi^H Bbar^-1 Phi]^-1 Phi^H Bbar^-1 vec(Y^(r)), Phi = stack_q diag(c_q).
/// SIMO only (the symbol matrix C is M x N).
WlsResult wls_update_H(const MatC& Y3, const MatC& C, const MatC& Gamma, const MatC& Bbar);

/// Weighted-LS symbol update:
/// c = [sum_r D_r^H Bbar^-1 D_r]^-1 sum_r D_r^H Bbar^-1 vec(Y^(r)),
/// D_r = I_N (x) diag(H^(r)). SIMO only.
WlsResult wls_update_C(const MatC& Y2, const MatC& H, const MatC& Gamma, const MatC& Bbar,
                       const PermutationMaps& maps);

}  // namespace fbmc

#endif
