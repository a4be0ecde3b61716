#include <doctest.h>

#include <cmath>

#include "fbmc/interference.hpp"

using namespace fbmc;

namespace {

const PrototypeFilter& filter8() {
    static const PrototypeFilter g = design_prototype(8, 4);
    return g;
}

// Independent route to the pseudo-symbols: per FT point, sum the 8 first-order
// neighbors with the pattern grid of the center's parity.
// Frequency wraps circularly, time neighbors outside the frame are zero.
MatC neighbor_sum_oracle(const MatR& D, const InterferenceWeights& w) {
    const int M = static_cast<int>(D.rows()), N = static_cast<int>(D.cols());
    MatC C(M, N);
    for (int p = 0; p < M; ++p) {
        const Eigen::Matrix3d grid = w.neighborhood(p % 2 ? -1 : 1);
        for (int q = 0; q < N; ++q) {
            double im = 0.0;
            for (int dm = -1; dm <= 1; ++dm)
                for (int dn = -1; dn <= 1; ++dn) {
                    if (dm == 0 && dn == 0) continue;
                    const int n = q + dn;
                    if (n < 0 || n >= N) continue;
                    const int m = ((p + dm) % M + M) % M;
                    im += grid(dm + 1, dn + 1) * D(m, n);
                }
            C(p, q) = cplx(D(p, q), im);
        }
    }
    return C;
}

MatR random_pam(int M, int N, std::uint64_t seed) {
    GaussianRng rng(seed);
    MatR D(M, N);
    const double a = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < M; ++i) D(i, j) = a * rng.sign();
    return D;
}

}  // namespace

TEST_CASE("struct matrices match the displayed patterns") {
    const auto sm = build_struct_matrices(4, 3);
    VecR e0(4);
    e0 << 0, 1, 0, -1;
    CHECK((sm.E.row(0).transpose() - e0).cwiseAbs().maxCoeff() == 0.0);
    VecR z0(4);
    z0 << 0, 1, 0, 1;
    CHECK((sm.Zbar.row(0).transpose() - z0).cwiseAbs().maxCoeff() == 0.0);
    MatR ebar(3, 3);
    ebar << 0, 1, 0, -1, 0, 1, 0, -1, 0;
    CHECK((sm.Ebar - ebar).cwiseAbs().maxCoeff() == 0.0);
    MatR etil(3, 3);
    etil << 0, 1, 0, 1, 0, 1, 0, 1, 0;
    CHECK((sm.Etilde - etil).cwiseAbs().maxCoeff() == 0.0);
    for (int p = 0; p < 4; ++p) CHECK(sm.S(p, p) == (p % 2 ? -1.0 : 1.0));
    CHECK((sm.E + sm.E.transpose()).cwiseAbs().maxCoeff() == 0.0);  // skew symmetric
}

TEST_CASE("struct matrices reject invalid dimensions") {
    CHECK_THROWS(build_struct_matrices(2, 4));
    CHECK_THROWS(build_struct_matrices(5, 4));
    CHECK_THROWS(build_struct_matrices(8, 1));
}

TEST_CASE("virtualize: zero frame and real-part identity") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    CHECK(virtualize(MatR::Zero(8, 6), w, sm).cwiseAbs().maxCoeff() == 0.0);

    const MatR D = random_pam(8, 6, 11);
    const MatC C = virtualize(D, w, sm);
    CHECK((C.real() - D).cwiseAbs().maxCoeff() == 0.0);
    CHECK((devirtualize(C) - D).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("virtualize: single impulse lights up exactly the 8 neighbors") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    MatR D = MatR::Zero(8, 6);
    D(3, 2) = 1.0;
    const MatC C = virtualize(D, w, sm);
    const MatC ref = neighbor_sum_oracle(D, w);
    CHECK((C - ref).cwiseAbs().maxCoeff() < 1e-14);
    int nonzero = 0;
    for (int p = 0; p < 8; ++p)
        for (int q = 0; q < 6; ++q)
            if (std::abs(C(p, q).imag()) > 0) ++nonzero;
    CHECK(nonzero == 8);
}

TEST_CASE("virtualize matrix form equals the neighbor-sum oracle") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    for (int trial = 0; trial < 10; ++trial) {
        const MatR D = random_pam(8, 6, 100 + trial);
        const MatC C = virtualize(D, w, sm);
        const MatC ref = neighbor_sum_oracle(D, w);
        CHECK((C - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("virtualize is linear") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    const MatR D1 = random_pam(8, 6, 21), D2 = random_pam(8, 6, 22);
    const double alpha = 1.375;
    const MatC lhs = virtualize(alpha * D1 + D2, w, sm);
    const MatC rhs = alpha * virtualize(D1, w, sm) + virtualize(D2, w, sm);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("impulse response of the pattern, neighbor view; time flip negates gamma only") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    MatR D = MatR::Zero(8, 6);
    D(4, 2) = 1.0;
    const MatC C = virtualize(D, w, sm);
    // neighbor view = pattern transposed: the impulse sits at (p, q-1) of the
    // right center, so it contributes -(-1)^p gamma there, and so on
    CHECK(C(4, 3).imag() == doctest::Approx(-w.gamma));  // impulse left of (4,3)
    CHECK(C(4, 1).imag() == doctest::Approx(+w.gamma));  // impulse right of (4,1): time flip negates
    CHECK(C(5, 2).imag() == doctest::Approx(-w.beta));   // impulse at (p-1, q) of (5,2)
    CHECK(C(3, 2).imag() == doctest::Approx(+w.beta));
    // corners follow the center parity (odd rows 3/5) and keep their sign under the time flip
    CHECK(C(5, 3).imag() == doctest::Approx(-w.delta));
    CHECK(C(5, 1).imag() == doctest::Approx(-w.delta));
    CHECK(C(3, 3).imag() == doctest::Approx(-w.delta));
    CHECK(C(3, 1).imag() == doctest::Approx(-w.delta));
}

TEST_CASE("frame-level virtualize round trip") {
    const auto w = compute_weights(filter8());
    const auto sm = build_struct_matrices(8, 6);
    OqamFrame F;
    F.ant.push_back(random_pam(8, 6, 31));
    F.ant.push_back(random_pam(8, 6, 32));
    const VirtualFrame V = virtualize(F, w, sm);
    CHECK(V.stacked().rows() == 16);
    const OqamFrame back = devirtualize(V);
    for (int t = 0; t < 2; ++t)
        CHECK((back.ant[t] - F.ant[t]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("devirtualize trivial cases") {
    MatC C(2, 2);
    C << cplx(0, 1), cplx(0, -2), cplx(0, 0.5), cplx(0, 3);
    CHECK(devirtualize(C).cwiseAbs().maxCoeff() == 0.0);
    MatC C2 = MatC::Zero(2, 2);
    C2(0, 0) = cplx(0.75, 0.0);
    CHECK(devirtualize(C2)(0, 0) == 0.75);
}

TEST_CASE("interference histogram: mean, variance, degenerate case") {
    const auto w = compute_weights(filter8());
    const int M = 8, N = 512;
    const auto sm = build_struct_matrices(M, N);
    const MatR D = random_pam(M, N, 77);
    const MatC C = virtualize(D, w, sm);
    const auto h = interference_histogram(C, 41);
    const double var_th = (2 * w.beta * w.beta + 2 * w.gamma * w.gamma + 4 * w.delta * w.delta) * 0.5;
    const double se = std::sqrt(var_th / double(h.samples));
    CHECK(std::abs(h.mean) < 3 * se);
    CHECK(h.variance == doctest::Approx(var_th).epsilon(0.1));

    const auto hz = interference_histogram(MatC::Zero(4, 4), 10);
    CHECK(hz.variance == doctest::Approx(0.0));
    CHECK(hz.mean == doctest::Approx(0.0));

    CHECK_THROWS(interference_histogram(C, 5));
}

TEST_CASE("wrap-corrected structures match the physical pulse couplings at the edges") {
    const auto& g = filter8();
    const auto w = compute_weights(g);
    const auto sm = build_struct_matrices(8, 6, true);
    // corners flip relative to the displayed circulants
    CHECK(sm.E(0, 7) == 1.0);
    CHECK(sm.E(7, 0) == -1.0);
    CHECK(sm.Zbar(0, 7) == -1.0);
    CHECK(sm.Zbar(7, 0) == -1.0);
    CHECK((sm.E + sm.E.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // virtualize with the corrected structures reproduces the true first-order
    // couplings: check every contribution of an edge-row impulse
    for (int p0 : {0, 7}) {
        MatR D = MatR::Zero(8, 6);
        D(p0, 3) = 1.0;
        const MatC C = virtualize(D, w, sm);
        for (int dm = -1; dm <= 1; ++dm)
            for (int dn = -1; dn <= 1; ++dn) {
                if (dm == 0 && dn == 0) continue;
                const int p = ((p0 + dm) % 8 + 8) % 8, q = 3 + dn;
                // physical weight of the impulse as seen from (p, q)
                const cplx J = pulse_inner_product(g, p0, 3, p, q);
                CHECK(C(p, q).imag() == doctest::Approx(J.imag()).epsilon(1e-6));
            }
    }
}
