#ifndef FBMC_TENSOR_HPP
#define FBMC_TENSOR_HPP

#include <vector>

#include "fbmc/types.hpp"

namespace fbmc {

/// M x N x N_R received tensor held as frontal slices Y(:,:,r) = AFB output of
/// antenna r (frequency x time x space).
struct ReceivedTensor {
    std::vector<MatC> slice;

    int M() const { return slice.empty() ? 0 : static_cast<int>(slice[0].rows()); }
    int N() const { return slice.empty() ? 0 : static_cast<int>(slice[0].cols()); }
    int n_rx() const { return static_cast<int>(slice.size()); }
    double frob_norm() const;
};

/// (M*N_R) x N: frontal slices stacked vertically; block r of M rows = Y(:,:,r).
MatC unfold2(const ReceivedTensor& Y);
ReceivedTensor fold2(const MatC& Y2, int M, int n_rx);

/// (M*N) x N_R: column r = column-major vec of Y(:,:,r).
MatC unfold3(const ReceivedTensor& Y);
ReceivedTensor fold3(const MatC& Y3, int M, int N);

/// (N_R*N) x M: block r of N rows = Y(:,:,r)^T.
MatC unfold1(const ReceivedTensor& Y);
ReceivedTensor fold1(const MatC& Y1, int N, int n_rx);

/// Columnwise Kronecker product; A-index major. Rejects mismatched column counts.
MatC khatri_rao(const MatC& A, const MatC& B);

/// Known factor [I_M I_M ... I_M] (N_T copies).
MatC gamma_factor(int M, int n_tx);

/// Frobenius norm of Y - [[Gamma, C^T, H]] (residual of the constrained CPD).
double cpd_cost(const ReceivedTensor& Y, const MatC& Gamma, const MatC& C, const MatC& H);

struct KrFactorization {
    MatC H;            // N_R x M
    MatC Ct;           // N x M (transposed symbol factor)
    std::vector<int> flagged;  // all-zero columns
};

/// SIMO Khatri-Rao factorization of Y1 ~= H (kr) C^T, per-column dominant
/// rank-1 approximation; factors defined up to per-column scaling.
KrFactorization kr_factorize(const MatC& Y1, int n_rx, int N);

struct Identifiability {
    bool holds = false;           // generic condition of the CPD model
    bool simo_condition = false;  // the SIMO reduction N_R >= 2
};

Identifiability check_identifiability(int M, int N, int n_tx, int n_rx);

}  // namespace fbmc

#endif
