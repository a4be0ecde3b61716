#include <doctest.h>

#include <cmath>

#include "fbmc/channel.hpp"
#include "fbmc/interference.hpp"
#include "fbmc/waveform.hpp"

using namespace fbmc;

TEST_CASE("single-tap profile gives a flat frequency response") {
    const auto prof = exponential_profile("flat", 1, 1.0);
    const auto ch = draw_channel(prof, 1, 1, 16, 42);
    const double mag = std::abs(ch.Hf[0][0][0]);
    for (int p = 0; p < 16; ++p) CHECK(std::abs(ch.Hf[0][0][p]) == doctest::Approx(mag).epsilon(1e-12));
}

TEST_CASE("profile fixtures carry the expected tap counts") {
    const auto peda = load_profile(std::string(FIXTURE_DIR) + "/peda.profile");
    CHECK(peda.length() == 9);
    CHECK(peda.tap_powers.sum() == doctest::Approx(1.0).epsilon(1e-12));
    const auto vehb = load_profile(std::string(FIXTURE_DIR) + "/vehb.profile");
    CHECK(vehb.length() == 18);
}

TEST_CASE("channel energy is normalized on average") {
    const auto prof = exponential_profile("e", 9, 0.7);
    double acc = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const auto ch = draw_channel(prof, 1, 1, 8, 1000 + i);
        acc += ch.h[0][0].squaredNorm();
    }
    CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("apply_channel: identity channel, lengths, noiseless passthrough") {
    ChannelProfile prof;
    prof.name = "delta";
    prof.tap_powers = VecR::Ones(1);
    auto ch = draw_channel(prof, 1, 1, 8, 3);
    ch.h[0][0][0] = cplx(1.0, 0.0);  // force exact delta
    VecC s(40);
    GaussianRng rng(4);
    for (int i = 0; i < 40; ++i) s[i] = rng.cnormal();
    const auto r = apply_channel({s}, ch, NoiseSpec{0.0, 0});
    CHECK((r[0] - s).cwiseAbs().maxCoeff() == 0.0);

    const auto prof9 = exponential_profile("e", 9, 1.0);
    const auto ch9 = draw_channel(prof9, 1, 2, 8, 5);
    const auto r9 = apply_channel({s}, ch9, NoiseSpec{0.25, 6});
    CHECK(r9.size() == 2);
    CHECK(r9[0].size() == 40 + 9 - 1);
}

TEST_CASE("noise across antennas is uncorrelated") {
    ChannelProfile prof;
    prof.tap_powers = VecR::Ones(1);
    auto ch = draw_channel(prof, 1, 2, 8, 3);
    ch.h[0][0][0] = cplx(0.0, 0.0);
    ch.h[1][0][0] = cplx(0.0, 0.0);  // pure noise out
    const VecC s = VecC::Zero(2000);
    cplx cross(0.0, 0.0);
    double power = 0.0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        const auto r = apply_channel({s}, ch, NoiseSpec{1.0, 777 + static_cast<std::uint64_t>(t)});
        cross += (r[0].adjoint() * r[1])(0, 0);
        power += r[0].squaredNorm();
    }
    const double n = 2000.0 * trials;
    CHECK(std::abs(cross) / n < 0.02);                     // ~3 sigma of the cross estimate
    CHECK(power / n == doctest::Approx(1.0).epsilon(0.05));  // variance sigma^2 per sample
}

TEST_CASE("frequency responses equal the DFT of the impulse responses") {
    const auto prof = exponential_profile("e", 5, 2.0);
    const auto ch = draw_channel(prof, 2, 2, 16, 12);
    for (int r = 0; r < 2; ++r)
        for (int t = 0; t < 2; ++t)
            for (int p = 0; p < 16; ++p) {
                cplx acc(0.0, 0.0);
                for (int k = 0; k < 5; ++k) {
                    const double ph = -2.0 * M_PI * p * k / 16.0;
                    acc += ch.h[r][t][k] * cplx(std::cos(ph), std::sin(ph));
                }
                CHECK(std::abs(acc - ch.Hf[r][t][p]) < 1e-12);
            }
}

TEST_CASE("frequency-flat model error grows with channel length") {
    const auto g = design_prototype(32, 4);
    const auto w = compute_weights(g);
    const int M = 32, N = 8;
    const auto sm = build_struct_matrices(M, N);
    GaussianRng rng(21);
    MatR D(M, N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < M; ++i) D(i, j) = rng.sign() / std::sqrt(2.0);
    const MatC C = virtualize(D, w, sm);
    const VecC s = sfb_modulate(D, g);

    double prev = -1.0;
    for (int Lh : {1, 3, 9, 18}) {
        const auto prof = exponential_profile("e", Lh, std::max(1.0, Lh / 3.0));
        const auto ch = draw_channel(prof, 1, 1, M, 4242);
        const auto r = apply_channel({s}, ch, NoiseSpec{0.0, 0});
        const MatC Y = afb_demodulate(r[0], g, M, N);
        MatC pred(M, N);
        for (int p = 0; p < M; ++p) pred.row(p) = ch.Hf[0][0][p] * C.row(p);
        const double resid = (Y - pred).norm() / pred.norm();
        CHECK(resid > prev);
        prev = resid;
    }
}

TEST_CASE("snr_to_sigma2 formula") {
    CHECK(snr_to_sigma2(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(snr_to_sigma2(10.0, 1.0) == doctest::Approx(0.1));
    CHECK(snr_to_sigma2(3.0, 2.0) == doctest::Approx(2.0 / std::pow(10.0, 0.3)));
    CHECK_THROWS(snr_to_sigma2(0.0, 0.0));
}

TEST_CASE("same seed reproduces the same noise bits") {
    ChannelProfile prof;
    prof.tap_powers = VecR::Ones(1);
    const auto ch = draw_channel(prof, 1, 1, 8, 3);
    const VecC s = VecC::Zero(64);
    const auto a = apply_channel({s}, ch, NoiseSpec{1.0, 31337});
    const auto b = apply_channel({s}, ch, NoiseSpec{1.0, 31337});
    CHECK((a[0] - b[0]).cwiseAbs().maxCoeff() == 0.0);
}
