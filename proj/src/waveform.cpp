#include "fbmc/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// forward/inverse unitary DFT, direct form (M is small at desk scale)
MatC dft_matrix(int M, double sign) {
    MatC W(M, M);
    for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) {
            const double ph = sign * kTwoPi * r * c / M;
            W(r, c) = cplx(std::cos(ph), std::sin(ph)) / std::sqrt(double(M));
        }
    return W;
}
}  // namespace

void ModulationConfig::validate() const {
    if (num_fbmc_symbols % 2) throw std::invalid_argument("ModulationConfig: N must be even");
    if (preamble_len < 2) throw std::invalid_argument("ModulationConfig: preamble_len must be >= 2");
    const int q = static_cast<int>(std::lround(std::sqrt(double(constellation_order))));
    if (q * q != constellation_order)
        throw std::invalid_argument("ModulationConfig: constellation order must be a perfect square");
}

double oqam_amplitude(int constellation_order) {
    const int q = static_cast<int>(std::lround(std::sqrt(double(constellation_order))));
    if (q * q != constellation_order || q < 2)
        throw std::invalid_argument("oqam_amplitude: constellation order must be a perfect square >= 4");
    // unit average symbol energy: levels +/-1, +/-3, ... scaled by sqrt(3/(2(Q^2-1)))
    return std::sqrt(3.0 / (2.0 * (constellation_order - 1)));
}

MatR qam_to_oqam(const MatC& qam) {
    MatR d(qam.rows(), 2 * qam.cols());
    for (Eigen::Index k = 0; k < qam.cols(); ++k) {
        d.col(2 * k) = qam.col(k).real();
        d.col(2 * k + 1) = qam.col(k).imag();
    }
    return d;
}

MatC oqam_to_qam(const MatR& d) {
    if (d.cols() % 2) throw std::invalid_argument("oqam_to_qam: odd number of FBMC symbols");
    MatC qam(d.rows(), d.cols() / 2);
    for (Eigen::Index k = 0; k < qam.cols(); ++k)
        qam.col(k) = d.col(2 * k).cast<cplx>() + cplx(0.0, 1.0) * d.col(2 * k + 1).cast<cplx>();
    return qam;
}

namespace {
// g_{m,n}(start + x) = base(m, x) * j^{m+n}: the start-offset modulation phase
// exp(j*pi*m*n) merges with phi_{m,n} into the pure quadrature factor.
MatC modulation_bank(const PrototypeFilter& g) {
    const int M = g.num_subcarriers, L = g.length();
    const double c = (L - 1) / 2.0;
    MatC base(M, L);
    for (int m = 0; m < M; ++m)
        for (int x = 0; x < L; ++x) {
            const double ph = kTwoPi / M * m * (x - c);
            base(m, x) = g.taps[x] * cplx(std::cos(ph), std::sin(ph));
        }
    return base;
}

cplx quarter_phase(int mn) {  // j^{mn mod 4}
    switch (((mn % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}
}  // namespace

VecC sfb_modulate(const MatR& D, const PrototypeFilter& g) {
    const int M = g.num_subcarriers;
    if (D.rows() != M) throw std::invalid_argument("sfb_modulate: frame rows must equal M");
    const int N = static_cast<int>(D.cols());
    const int L = g.length();
    const MatC base = modulation_bank(g);
    VecC s = VecC::Zero(static_cast<Eigen::Index>(N - 1) * M / 2 + L);
    VecC u(M);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < M; ++m) u[m] = D(m, n) * quarter_phase(m + n);
        s.segment(static_cast<Eigen::Index>(n) * M / 2, L) += base.transpose() * u;
    }
    return s;
}

MatC afb_demodulate(const VecC& signal, const PrototypeFilter& g, int M, int N) {
    if (M != g.num_subcarriers) throw std::invalid_argument("afb_demodulate: M mismatch with filter");
    const int L = g.length();
    const Eigen::Index need = static_cast<Eigen::Index>(N - 1) * M / 2 + L;
    if (signal.size() < need)
        throw std::invalid_argument("afb_demodulate: signal too short for the requested frame");
    const MatC base = modulation_bank(g);
    MatC Y(M, N);
    for (int n = 0; n < N; ++n) {
        const auto seg = signal.segment(static_cast<Eigen::Index>(n) * M / 2, L);
        const VecC proj = base.conjugate() * seg;
        for (int m = 0; m < M; ++m) Y(m, n) = std::conj(quarter_phase(m + n)) * proj[m];
    }
    return Y;
}

VecC ofdm_modulate(const MatC& qam, int cp_len) {
    const int M = static_cast<int>(qam.rows());
    if (cp_len < 0 || cp_len >= M) throw std::invalid_argument("ofdm_modulate: need 0 <= cp_len < M");
    const int n_sym = static_cast<int>(qam.cols());
    const MatC Winv = dft_matrix(M, +1.0);
    VecC s(static_cast<Eigen::Index>(n_sym) * (M + cp_len));
    for (int k = 0; k < n_sym; ++k) {
        const VecC t = Winv * qam.col(k);
        auto blk = s.segment(static_cast<Eigen::Index>(k) * (M + cp_len), M + cp_len);
        blk.head(cp_len) = t.tail(cp_len);
        blk.tail(M) = t;
    }
    return s;
}

MatC ofdm_demodulate(const VecC& signal, int M, int cp_len, int n_sym) {
    if (cp_len < 0 || cp_len >= M) throw std::invalid_argument("ofdm_demodulate: need 0 <= cp_len < M");
    if (signal.size() < static_cast<Eigen::Index>(n_sym) * (M + cp_len))
        throw std::invalid_argument("ofdm_demodulate: signal too short");
    const MatC W = dft_matrix(M, -1.0);
    MatC X(M, n_sym);
    for (int k = 0; k < n_sym; ++k) {
        const auto blk = signal.segment(static_cast<Eigen::Index>(k) * (M + cp_len) + cp_len, M);
        X.col(k) = W * blk;
    }
    return X;
}

}  // namespace fbmc
