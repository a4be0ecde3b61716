#include <doctest.h>

#include <cmath>

#include "fbmc/tensor.hpp"

using namespace fbmc;

namespace {

MatC random_mat(int r, int c, std::uint64_t seed) {
    GaussianRng rng(seed);
    MatC A(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) A(i, j) = rng.cnormal();
    return A;
}

// Synthetic noiseless tensor from factors (H: N_R x M*N_T, C: M*N_T x N).
ReceivedTensor synthesize(const MatC& H, const MatC& C, int M, int n_tx, int n_rx) {
    ReceivedTensor Y;
    const int N = static_cast<int>(C.cols());
    for (int r = 0; r < n_rx; ++r) {
        MatC S = MatC::Zero(M, N);
        for (int t = 0; t < n_tx; ++t) {
            const auto Hc = H.row(r).segment(static_cast<Eigen::Index>(t) * M, M).transpose();
            S += Hc.asDiagonal() * C.middleRows(static_cast<Eigen::Index>(t) * M, M);
        }
        Y.slice.push_back(S);
    }
    return Y;
}

}  // namespace

TEST_CASE("unfoldings: trivial shapes and fold inverses") {
    ReceivedTensor one;
    one.slice.push_back(MatC::Constant(1, 1, cplx(2.0, -1.0)));
    CHECK(unfold2(one)(0, 0) == cplx(2.0, -1.0));
    CHECK(unfold3(one)(0, 0) == cplx(2.0, -1.0));
    CHECK(unfold1(one)(0, 0) == cplx(2.0, -1.0));

    ReceivedTensor Y;
    for (int r = 0; r < 3; ++r) Y.slice.push_back(random_mat(4, 6, 10 + r));
    const auto Y2 = unfold2(Y);
    const auto back2 = fold2(Y2, 4, 3);
    for (int r = 0; r < 3; ++r) CHECK((back2.slice[r] - Y.slice[r]).cwiseAbs().maxCoeff() == 0.0);
    const auto back3 = fold3(unfold3(Y), 4, 6);
    for (int r = 0; r < 3; ++r) CHECK((back3.slice[r] - Y.slice[r]).cwiseAbs().maxCoeff() == 0.0);
    const auto back1 = fold1(unfold1(Y), 6, 3);
    for (int r = 0; r < 3; ++r) CHECK((back1.slice[r] - Y.slice[r]).cwiseAbs().maxCoeff() == 0.0);

    // single-slice unfold3 is the plain vec
    ReceivedTensor s1;
    s1.slice.push_back(random_mat(3, 2, 5));
    const auto v = unfold3(s1);
    CHECK(v(0, 0) == s1.slice[0](0, 0));
    CHECK(v(1, 0) == s1.slice[0](1, 0));
    CHECK(v(3 * 2 - 1, 0) == s1.slice[0](2, 1));

    ReceivedTensor z;
    z.slice.push_back(MatC::Zero(3, 3));
    CHECK(unfold1(z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unfoldings reproduce the Khatri-Rao factorizations") {
    struct Dims {
        int M, N, n_rx, n_tx;
    };
    for (const Dims d : {Dims{4, 6, 2, 1}, Dims{4, 6, 3, 2}}) {
        const MatC H = random_mat(d.n_rx, d.M * d.n_tx, 1);
        const MatC C = random_mat(d.M * d.n_tx, d.N, 2);
        const MatC G = gamma_factor(d.M, d.n_tx);
        const ReceivedTensor Y = synthesize(H, C, d.M, d.n_tx, d.n_rx);
        CHECK((unfold2(Y) - khatri_rao(H, G) * C).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((unfold3(Y) - khatri_rao(C.transpose(), G) * H.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((unfold1(Y) - khatri_rao(H, C.transpose()) * G.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("khatri_rao basics") {
    MatC a(1, 1), b(1, 1);
    a(0, 0) = cplx(1, 0);
    b(0, 0) = cplx(1, 0);
    CHECK(khatri_rao(a, b)(0, 0) == cplx(1, 0));

    MatC A(2, 1), B(2, 1);
    A << cplx(1, 0), cplx(2, 0);
    B << cplx(3, 0), cplx(4, 0);
    const MatC K = khatri_rao(A, B);
    CHECK(K(0, 0) == cplx(3, 0));
    CHECK(K(1, 0) == cplx(4, 0));
    CHECK(K(2, 0) == cplx(6, 0));
    CHECK(K(3, 0) == cplx(8, 0));

    const MatC H = random_mat(3, 8, 3);
    const MatC G = gamma_factor(4, 2);
    CHECK(khatri_rao(H, G).cols() == 8);  // M*N_T columns

    MatC bad(2, 3);
    CHECK_THROWS(khatri_rao(A, bad));

    // generic full rank
    const MatC R1 = random_mat(3, 6, 7), R2 = random_mat(4, 6, 8);
    Eigen::JacobiSVD<MatC> svd(khatri_rao(R1, R2));
    CHECK(svd.singularValues()[5] > 1e-8);
}

TEST_CASE("cpd_cost: exact factors, zero factors, unfolding agreement") {
    const int M = 4, N = 6, n_rx = 3, n_tx = 2;
    const MatC H = random_mat(n_rx, M * n_tx, 4);
    const MatC C = random_mat(M * n_tx, N, 5);
    const MatC G = gamma_factor(M, n_tx);
    const ReceivedTensor Y = synthesize(H, C, M, n_tx, n_rx);
    CHECK(cpd_cost(Y, G, C, H) < 1e-12);
    CHECK(cpd_cost(Y, G, MatC::Zero(M * n_tx, N), MatC::Zero(n_rx, M * n_tx)) ==
          doctest::Approx(Y.frob_norm()));

    // residual norm agrees across the three unfoldings
    ReceivedTensor Yn = Y;
    GaussianRng rng(6);
    for (auto& s : Yn.slice)
        for (Eigen::Index j = 0; j < s.cols(); ++j)
            for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, j) += 0.1 * rng.cnormal();
    const double c2 = (unfold2(Yn) - khatri_rao(H, G) * C).norm();
    const double c3 = (unfold3(Yn) - khatri_rao(C.transpose(), G) * H.transpose()).norm();
    const double c1 = (unfold1(Yn) - khatri_rao(H, C.transpose()) * G.transpose()).norm();
    CHECK(std::abs(c2 - c3) < 1e-12);
    CHECK(std::abs(c2 - c1) < 1e-12);
    CHECK(cpd_cost(Yn, G, C, H) == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("kr_factorize: noiseless recovery, zero column, noisy bound") {
    const int M = 8, N = 16, n_rx = 2;
    MatC H = random_mat(n_rx, M, 9);
    MatC Ct = random_mat(N, M, 10);
    H.col(3).setZero();
    Ct.col(3).setZero();  // plant a dead column
    const MatC Y1 = khatri_rao(H, Ct) * gamma_factor(M, 1).transpose();
    const auto f = kr_factorize(Y1, n_rx, N);
    REQUIRE(f.flagged.size() == 1);
    CHECK(f.flagged[0] == 3);
    for (int m = 0; m < M; ++m) {
        if (m == 3) continue;
        MatC X = MatC::Zero(n_rx, N);
        for (int r = 0; r < n_rx; ++r)
            for (int q = 0; q < N; ++q) X(r, q) = Y1(r * N + q, m);
        const MatC approx = f.H.col(m) * f.Ct.col(m).transpose();
        CHECK((X - approx).norm() / X.norm() < 1e-10);
    }

    // single column of a rank-1 matrix: recovered exactly up to scale
    MatC Y1s = khatri_rao(random_mat(3, 1, 11), random_mat(5, 1, 12));
    const auto fs = kr_factorize(Y1s, 3, 5);
    const MatC rec = fs.H.col(0) * fs.Ct.col(0).transpose();
    MatC Xs(3, 5);
    for (int r = 0; r < 3; ++r)
        for (int q = 0; q < 5; ++q) Xs(r, q) = Y1s(r * 5 + q, 0);
    CHECK((Xs - rec).norm() < 1e-12);

    // 30 dB perturbation: reconstruction error bounded by 3x the noise level
    GaussianRng rng(13);
    const MatC H2 = random_mat(n_rx, M, 14);
    const MatC Ct2 = random_mat(N, M, 15);
    MatC Y1n = khatri_rao(H2, Ct2);
    const double sig = Y1n.norm() * std::pow(10.0, -30.0 / 20.0) / std::sqrt(double(Y1n.size()));
    MatC noise(Y1n.rows(), Y1n.cols());
    for (Eigen::Index j = 0; j < Y1n.cols(); ++j)
        for (Eigen::Index i = 0; i < Y1n.rows(); ++i) noise(i, j) = sig * rng.cnormal();
    const auto fn = kr_factorize(Y1n + noise, n_rx, N);
    const MatC recon = khatri_rao(fn.H, fn.Ct);
    CHECK((recon - Y1n - noise).norm() < 3.0 * noise.norm());
}

TEST_CASE("identifiability condition") {
    CHECK(check_identifiability(32, 106, 1, 2).holds);
    CHECK(check_identifiability(32, 106, 1, 2).simo_condition);
    CHECK_FALSE(check_identifiability(32, 106, 1, 1).holds);
    CHECK_FALSE(check_identifiability(32, 106, 1, 1).simo_condition);
    CHECK(check_identifiability(4, 100, 2, 7).holds);   // N_R >= M(N_T-1)+2 = 6
    CHECK_FALSE(check_identifiability(4, 100, 2, 5).holds);
    CHECK_THROWS(check_identifiability(0, 1, 1, 1));
}
