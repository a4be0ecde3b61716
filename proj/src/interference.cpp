#include "fbmc/interference.hpp"

#include <cmath>
#include <stdexcept>

namespace fbmc {

StructMatrices build_struct_matrices(int M, int N, bool wrap_corrected) {
    if (M < 4 || (M % 2) != 0) throw std::invalid_argument("build_struct_matrices: M must be even and >= 4");
    if (N < 2) throw std::invalid_argument("build_struct_matrices: N must be >= 2");

    StructMatrices sm;
    sm.M = M;
    sm.N = N;
    sm.S = MatR::Zero(M, M);
    for (int p = 0; p < M; ++p) sm.S(p, p) = (p % 2) ? -1.0 : 1.0;

    sm.E = MatR::Zero(M, M);
    sm.Zbar = MatR::Zero(M, M);
    for (int p = 0; p < M; ++p) {
        sm.E(p, (p + 1) % M) = 1.0;
        sm.E(p, (p - 1 + M) % M) = -1.0;
        sm.Zbar(p, (p + 1) % M) = 1.0;
        sm.Zbar(p, (p - 1 + M) % M) = 1.0;
    }
    if (wrap_corrected) {
        sm.E(0, M - 1) = 1.0;
        sm.E(M - 1, 0) = -1.0;
        sm.Zbar(0, M - 1) = -1.0;
        sm.Zbar(M - 1, 0) = -1.0;
    }

    sm.Ebar = MatR::Zero(N, N);
    sm.Etilde = MatR::Zero(N, N);
    for (int n = 0; n + 1 < N; ++n) {
        sm.Ebar(n, n + 1) = 1.0;
        sm.Ebar(n + 1, n) = -1.0;
        sm.Etilde(n, n + 1) = 1.0;
        sm.Etilde(n + 1, n) = 1.0;
    }
    return sm;
}

MatC virtualize(const MatR& D, const InterferenceWeights& w, const StructMatrices& sm) {
    if (D.rows() != sm.M || D.cols() != sm.N)
        throw std::invalid_argument("virtualize: frame dimensions do not match the structure matrices");
    const MatR imag_part = w.beta * (sm.E * D) + sm.S * (-w.gamma * (D * sm.Ebar) + w.delta * (sm.Zbar * D * sm.Etilde));
    return D.cast<cplx>() + cplx(0.0, 1.0) * imag_part.cast<cplx>();
}

VirtualFrame virtualize(const OqamFrame& D, const InterferenceWeights& w, const StructMatrices& sm) {
    VirtualFrame out;
    out.ant.reserve(D.ant.size());
    for (const auto& d : D.ant) out.ant.push_back(virtualize(d, w, sm));
    return out;
}

MatR devirtualize(const MatC& C) { return C.real(); }

OqamFrame devirtualize(const VirtualFrame& C) {
    OqamFrame out;
    out.ant.reserve(C.ant.size());
    for (const auto& c : C.ant) out.ant.push_back(c.real());
    return out;
}

Histogram interference_histogram(const std::vector<MatC>& frames, int bins) {
    if (bins < 10) throw std::invalid_argument("interference_histogram: bins must be >= 10");
    if (frames.empty()) throw std::invalid_argument("interference_histogram: no frames given");

    double lo = 0.0, hi = 0.0;
    long n = 0;
    double sum = 0.0, sq = 0.0;
    for (const auto& C : frames) {
        for (Eigen::Index j = 0; j < C.cols(); ++j)
            for (Eigen::Index i = 0; i < C.rows(); ++i) {
                const double v = C(i, j).imag();
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
                sq += v * v;
                ++n;
            }
    }
    if (n == 0) throw std::invalid_argument("interference_histogram: empty frames");

    Histogram h;
    h.samples = n;
    h.mean = sum / n;
    h.variance = sq / n - h.mean * h.mean;
    if (hi <= lo) hi = lo + 1.0;  // degenerate all-equal case: one occupied bin
    const double width = (hi - lo) / bins;
    h.bin_centers.resize(bins);
    h.density = VecR::Zero(bins);
    for (int b = 0; b < bins; ++b) h.bin_centers[b] = lo + (b + 0.5) * width;
    for (const auto& C : frames)
        for (Eigen::Index j = 0; j < C.cols(); ++j)
            for (Eigen::Index i = 0; i < C.rows(); ++i) {
                int b = static_cast<int>((C(i, j).imag() - lo) / width);
                b = std::min(std::max(b, 0), bins - 1);
                h.density[b] += 1.0;
            }
    h.density /= double(n) * width;
    return h;
}

Histogram interference_histogram(const MatC& C, int bins) {
    return interference_histogram(std::vector<MatC>{C}, bins);
}

}  // namespace fbmc
