#include "fbmc/tensor.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace fbmc {

double ReceivedTensor::frob_norm() const {
    double s = 0.0;
    for (const auto& sl : slice) s += sl.squaredNorm();
    return std::sqrt(s);
}

MatC unfold2(const ReceivedTensor& Y) {
    const int M = Y.M(), N = Y.N(), R = Y.n_rx();
    MatC out(static_cast<Eigen::Index>(M) * R, N);
    for (int r = 0; r < R; ++r) out.middleRows(static_cast<Eigen::Index>(r) * M, M) = Y.slice[r];
    return out;
}

ReceivedTensor fold2(const MatC& Y2, int M, int n_rx) {
    if (Y2.rows() != static_cast<Eigen::Index>(M) * n_rx) throw std::invalid_argument("fold2: row count mismatch");
    ReceivedTensor Y;
    for (int r = 0; r < n_rx; ++r) Y.slice.push_back(Y2.middleRows(static_cast<Eigen::Index>(r) * M, M));
    return Y;
}

MatC unfold3(const ReceivedTensor& Y) {
    const int M = Y.M(), N = Y.N(), R = Y.n_rx();
    MatC out(static_cast<Eigen::Index>(M) * N, R);
    for (int r = 0; r < R; ++r)
        out.col(r) = Eigen::Map<const VecC>(Y.slice[r].data(), static_cast<Eigen::Index>(M) * N);
    return out;
}

ReceivedTensor fold3(const MatC& Y3, int M, int N) {
    if (Y3.rows() != static_cast<Eigen::Index>(M) * N) throw std::invalid_argument("fold3: row count mismatch");
    ReceivedTensor Y;
    for (Eigen::Index r = 0; r < Y3.cols(); ++r)
        Y.slice.push_back(Eigen::Map<const MatC>(Y3.col(r).data(), M, N));
    return Y;
}

MatC unfold1(const ReceivedTensor& Y) {
    const int M = Y.M(), N = Y.N(), R = Y.n_rx();
    MatC out(static_cast<Eigen::Index>(N) * R, M);
    for (int r = 0; r < R; ++r) out.middleRows(static_cast<Eigen::Index>(r) * N, N) = Y.slice[r].transpose();
    return out;
}

ReceivedTensor fold1(const MatC& Y1, int N, int n_rx) {
    if (Y1.rows() != static_cast<Eigen::Index>(N) * n_rx) throw std::invalid_argument("fold1: row count mismatch");
    ReceivedTensor Y;
    for (int r = 0; r < n_rx; ++r)
        Y.slice.push_back(Y1.middleRows(static_cast<Eigen::Index>(r) * N, N).transpose());
    return Y;
}

MatC khatri_rao(const MatC& A, const MatC& B) {
    if (A.cols() != B.cols()) throw std::invalid_argument("khatri_rao: column count mismatch");
    MatC out(A.rows() * B.rows(), A.cols());
    for (Eigen::Index c = 0; c < A.cols(); ++c)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            out.col(c).segment(i * B.rows(), B.rows()) = A(i, c) * B.col(c);
    return out;
}

MatC gamma_factor(int M, int n_tx) {
    MatC G = MatC::Zero(M, static_cast<Eigen::Index>(M) * n_tx);
    for (int t = 0; t < n_tx; ++t) G.middleCols(static_cast<Eigen::Index>(t) * M, M) = MatC::Identity(M, M);
    return G;
}

double cpd_cost(const ReceivedTensor& Y, const MatC& Gamma, const MatC& C, const MatC& H) {
    const MatC model = khatri_rao(H, Gamma) * C;  // unfold2 of the model tensor
    return (unfold2(Y) - model).norm();
}

KrFactorization kr_factorize(const MatC& Y1, int n_rx, int N) {
    if (Y1.rows() != static_cast<Eigen::Index>(n_rx) * N)
        throw std::invalid_argument("kr_factorize: row count must be N_R*N");
    const int M = static_cast<int>(Y1.cols());
    KrFactorization f;
    f.H.resize(n_rx, M);
    f.Ct.resize(N, M);
    for (int m = 0; m < M; ++m) {
        MatC X(n_rx, N);
        for (int r = 0; r < n_rx; ++r)
            X.row(r) = Y1.col(m).segment(static_cast<Eigen::Index>(r) * N, N).transpose();
        if (X.norm() == 0.0) {
            f.H.col(m).setZero();
            f.Ct.col(m).setZero();
            f.flagged.push_back(m);
            continue;
        }
        Eigen::JacobiSVD<MatC> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        f.H.col(m) = svd.singularValues()[0] * svd.matrixU().col(0);
        f.Ct.col(m) = svd.matrixV().col(0).conjugate();
    }
    return f;
}

Identifiability check_identifiability(int M, int N, int n_tx, int n_rx) {
    if (M < 1 || N < 1 || n_tx < 1 || n_rx < 1)
        throw std::invalid_argument("check_identifiability: dimensions must be positive");
    Identifiability id;
    const long mnt = static_cast<long>(M) * n_tx;
    id.holds = M + std::min<long>(N, mnt) + std::min<long>(n_rx, mnt) >= 2 * mnt + 2;
    id.simo_condition = (n_tx == 1) && (n_rx >= 2);
    return id;
}

}  // namespace fbmc
