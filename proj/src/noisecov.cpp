#include "fbmc/noisecov.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "fbmc/waveform.hpp"

namespace fbmc {

namespace {
constexpr cplx kJ(0.0, 1.0);

// Whitening transform W = Lambda^{-1/2} V^H of the (regularized) covariance.
// The first-order truncation can dip mildly indefinite, so eigenvalues below
// the threshold are floored at the ridge level (flagged); GLS solves run on
// whitened rows to keep the conditioning at sqrt of the weight spread.
struct BbarWhitener {
    MatC W;
    bool ridged = false;

    explicit BbarWhitener(const MatC& Bbar) {
        if (Bbar.rows() > 4096)
            throw std::invalid_argument("wls: dense covariance solves are desk scale only (MN too large)");
        Eigen::SelfAdjointEigenSolver<MatC> eig(Bbar);
        VecR lam = eig.eigenvalues();
        if (lam.minCoeff() < 1e-10) {
            lam = lam.cwiseMax(1e-8);
            ridged = true;
        }
        W = lam.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().adjoint();
    }
};
}  // namespace

MatC build_B(int M, double beta) {
    if (M < 4 || (M % 2) != 0) throw std::invalid_argument("build_B: M must be even and >= 4");
    MatC B = MatC::Identity(M, M);
    for (int i = 0; i + 1 < M; ++i) {
        B(i, i + 1) = kJ * beta;
        B(i + 1, i) = -kJ * beta;
    }
    B(0, M - 1) = kJ * beta;
    B(M - 1, 0) = -kJ * beta;
    return B;
}

MatC build_Apm(int M, double gamma, double delta, int sign) {
    if (M < 4) throw std::invalid_argument("build_Apm: M must be >= 4");
    if (sign != 1 && sign != -1) throw std::invalid_argument("build_Apm: sign must be +1 or -1");
    MatC A = MatC::Zero(M, M);
    for (int i = 0; i < M; ++i) A(i, i) = kJ * (sign * gamma);
    for (int i = 0; i + 1 < M; ++i) {
        A(i, i + 1) = kJ * delta;
        A(i + 1, i) = kJ * delta;
    }
    A(0, M - 1) = -kJ * delta;
    A(M - 1, 0) = -kJ * delta;
    return A;
}

VecR sign_diagonal(int M) {
    VecR s(M);
    for (int i = 0; i < M; ++i) s[i] = (i % 2) ? -1.0 : 1.0;
    return s;
}

MatC assemble_Bbar(const MatC& B, const MatC& Aplus, const MatC& Aminus, const VecR& S, int N) {
    const int M = static_cast<int>(B.rows());
    if (Aplus.rows() != M || Aminus.rows() != M || S.size() != M)
        throw std::invalid_argument("assemble_Bbar: block dimensions disagree");
    if (N < 1) throw std::invalid_argument("assemble_Bbar: N must be >= 1");
    const MatC SAp = S.asDiagonal() * Aplus;
    const MatC SAm = S.asDiagonal() * Aminus;
    MatC Bbar = MatC::Zero(static_cast<Eigen::Index>(M) * N, static_cast<Eigen::Index>(M) * N);
    for (int q = 0; q < N; ++q) {
        Bbar.block(q * M, q * M, M, M) = B;
        if (q + 1 < N) {
            Bbar.block(q * M, (q + 1) * M, M, M) = SAp;
            Bbar.block((q + 1) * M, q * M, M, M) = SAm;
        }
    }
    return Bbar;
}

MatC empirical_noise_cov(const PrototypeFilter& g, int M, int N, int trials, std::uint64_t seed,
                         double sigma2) {
    if (trials < 1) throw std::invalid_argument("empirical_noise_cov: trials must be >= 1");
    const Eigen::Index len = static_cast<Eigen::Index>(N - 1) * M / 2 + g.length();
    const Eigen::Index MN = static_cast<Eigen::Index>(M) * N;
    MatC acc = MatC::Zero(MN, MN);
    GaussianRng rng(seed);
    const double nstd = std::sqrt(sigma2);
    VecC w(len);
    for (int t = 0; t < trials; ++t) {
        for (Eigen::Index l = 0; l < len; ++l) w[l] = nstd * rng.cnormal();
        const MatC W = afb_demodulate(w, g, M, N);
        const Eigen::Map<const VecC> v(W.data(), MN);
        acc.noalias() += v * v.adjoint();
    }
    return acc / double(trials);
}

PermutationMaps build_permutations(int M, int N, int n_rx) {
    if (M < 1 || N < 1 || n_rx < 1) throw std::invalid_argument("build_permutations: dims must be positive");
    PermutationMaps maps;
    maps.M = M;
    maps.N = N;
    maps.n_rx = n_rx;
    const int total = M * N * n_rx;
    maps.p23.resize(total);
    maps.p13.resize(total);
    for (int r = 0; r < n_rx; ++r)
        for (int q = 0; q < N; ++q)
            for (int p = 0; p < M; ++p) {
                const int i3 = r * M * N + q * M + p;
                const int i2 = q * M * n_rx + r * M + p;
                const int i1 = p * n_rx * N + r * N + q;
                maps.p23[i2] = i3;
                maps.p13[i1] = i3;
            }
    return maps;
}

MatR permutation_matrix(const std::vector<int>& map) {
    const int n = static_cast<int>(map.size());
    MatR P = MatR::Zero(n, n);
    for (int i = 0; i < n; ++i) P(i, map[i]) = 1.0;
    return P;
}

MatC build_Cw1(const MatC& Bbar, const PermutationMaps& maps, int n_rx, double sigma2) {
    const Eigen::Index MN = Bbar.rows();
    const Eigen::Index total = MN * n_rx;
    if (static_cast<Eigen::Index>(maps.p13.size()) != total)
        throw std::invalid_argument("build_Cw1: permutation size mismatch");
    // C_{w3} = sigma2 * I_{N_R} (x) Bbar; congruence by the index map
    MatC out(total, total);
    for (Eigen::Index i = 0; i < total; ++i) {
        const Eigen::Index si = maps.p13[i];
        const Eigen::Index ri = si / MN, pi = si % MN;
        for (Eigen::Index j = 0; j < total; ++j) {
            const Eigen::Index sj = maps.p13[j];
            const Eigen::Index rj = sj / MN, pj = sj % MN;
            out(i, j) = (ri == rj) ? sigma2 * Bbar(pi, pj) : cplx(0.0, 0.0);
        }
    }
    return out;
}

WlsResult wls_update_H(const MatC& Y3, const MatC& C, const MatC& Gamma, const MatC& Bbar) {
    const int M = static_cast<int>(Gamma.rows());
    if (Gamma.cols() != M) throw std::invalid_argument("wls_update_H: SIMO only (Gamma must be I_M)");
    const int N = static_cast<int>(C.cols());
    const int n_rx = static_cast<int>(Y3.cols());
    const Eigen::Index MN = static_cast<Eigen::Index>(M) * N;
    if (C.rows() != M || Y3.rows() != MN || Bbar.rows() != MN)
        throw std::invalid_argument("wls_update_H: dimension mismatch");

    // Phi = stack_q diag(c_q), MN x M
    MatC Phi = MatC::Zero(MN, M);
    for (int q = 0; q < N; ++q)
        for (int p = 0; p < M; ++p) Phi(static_cast<Eigen::Index>(q) * M + p, p) = C(p, q);

    BbarWhitener wh(Bbar);
    const MatC Phiw = wh.W * Phi;
    Eigen::ColPivHouseholderQR<MatC> qr(Phiw);
    if (qr.rank() < M) throw std::runtime_error("wls_update_H: singular normal matrix");

    WlsResult res;
    res.ridged = wh.ridged;
    res.value.resize(n_rx, M);
    for (int r = 0; r < n_rx; ++r)
        res.value.row(r) = qr.solve(wh.W * Y3.col(r)).transpose();
    return res;
}

WlsResult wls_update_C(const MatC& Y2, const MatC& H, const MatC& Gamma, const MatC& Bbar,
                       const PermutationMaps& maps) {
    const int M = static_cast<int>(Gamma.rows());
    if (Gamma.cols() != M) throw std::invalid_argument("wls_update_C: SIMO only (Gamma must be I_M)");
    const int n_rx = static_cast<int>(H.rows());
    const int N = static_cast<int>(Y2.cols());
    const Eigen::Index MN = static_cast<Eigen::Index>(M) * N;
    if (H.cols() != M || Y2.rows() != static_cast<Eigen::Index>(M) * n_rx || Bbar.rows() != MN)
        throw std::invalid_argument("wls_update_C: dimension mismatch");
    if (maps.M != M || maps.N != N || maps.n_rx != n_rx)
        throw std::invalid_argument("wls_update_C: permutation maps built for different dims");

    BbarWhitener wh(Bbar);
    // stacked whitened system over antennas: rows r give W * D_r and W * vec(Y^(r)),
    // with D_r = I_N (x) diag(H^(r)); the Y2 indexing realizes w3 = P23^T w2
    MatC A(MN * n_rx, MN);
    VecC b(MN * n_rx);
    VecC d(MN), y(MN);
    for (int r = 0; r < n_rx; ++r) {
        for (int q = 0; q < N; ++q)
            for (int p = 0; p < M; ++p) {
                d[static_cast<Eigen::Index>(q) * M + p] = H(r, p);
                y[static_cast<Eigen::Index>(q) * M + p] = Y2(static_cast<Eigen::Index>(r) * M + p, q);
            }
        A.middleRows(static_cast<Eigen::Index>(r) * MN, MN) = wh.W * d.asDiagonal();
        b.segment(static_cast<Eigen::Index>(r) * MN, MN) = wh.W * y;
    }
    Eigen::ColPivHouseholderQR<MatC> qr(A);
    if (qr.rank() < MN) throw std::runtime_error("wls_update_C: singular normal matrix");
    const VecC c = qr.solve(b);

    WlsResult res;
    res.ridged = wh.ridged;
    res.value = Eigen::Map<const MatC>(c.data(), M, N);
    return res;
}

}  // namespace fbmc
