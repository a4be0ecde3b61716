#ifndef FBMC_TYPES_HPP
#define FBMC_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace fbmc {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;

/// Real OQAM data frame, one M x N matrix per Tx antenna.
struct OqamFrame {
    std::vector<MatR> ant;

    int n_tx() const { return static_cast<int>(ant.size()); }
    int subcarriers() const { return ant.empty() ? 0 : static_cast<int>(ant[0].rows()); }
    int symbols() const { return ant.empty() ? 0 : static_cast<int>(ant[0].cols()); }
};

/// Complex pseudo-symbol frame C = D + j*(intrinsic interference), per Tx antenna.
struct VirtualFrame {
    std::vector<MatC> ant;

    /// Vertically stacked (M*N_T) x N matrix as used by the CPD model.
    MatC stacked() const {
        if (ant.empty()) return MatC();
        const auto M = ant[0].rows(), N = ant[0].cols();
        MatC out(M * static_cast<Eigen::Index>(ant.size()), N);
        for (size_t t = 0; t < ant.size(); ++t) out.middleRows(t * M, M) = ant[t];
        return out;
    }
};

/// splitmix64; used to derive independent seeds for parallel trials.
inline std::uint64_t split_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    return split_seed(split_seed(split_seed(base ^ a) + b) ^ (c * 0xd1342543de82ef95ULL + 1));
}

/// Deterministic Gaussian source. One instance per trial/stream, never shared.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    double real() { return dist_(eng_); }
    /// CN(0,1): unit-variance circularly-symmetric complex Gaussian.
    cplx cnormal() { return cplx(dist_(eng_), dist_(eng_)) / std::sqrt(2.0); }
    /// fair sign, +1 or -1
    double sign() { return (eng_() & 1u) ? 1.0 : -1.0; }
    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace fbmc

#endif
