#ifndef FBMC_PROTOTYPE_HPP
#define FBMC_PROTOTYPE_HPP

#include <map>
#include <string>
#include <vector>

#include "fbmc/types.hpp"

namespace fbmc {

/// Unit-energy real prototype filter of length L_g = K*M, symmetric about (L_g-1)/2.
struct PrototypeFilter {
    VecR taps;
    int num_subcarriers = 0;  // M, even
    int overlap_factor = 0;   // K

    int length() const { return static_cast<int>(taps.size()); }
};

/// First-order intrinsic-interference weights, gamma > beta > delta > 0.
struct InterferenceWeights {
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;

    /// 3x3 signed weight grid around an FT point with subcarrier parity (-1)^p.
    /// Rows: m = p-1, p, p+1 (top to bottom); columns: n = q-1, q, q+1.
    /// Center entry is 0 (the data symbol itself carries weight 1 on the real part).
    Eigen::Matrix3d neighborhood(int p_parity) const;
};

/// phi_{m,n} = (m+n)*pi/2 + m*n*pi, reduced to [0, 2*pi).
double ambient_phase(int m, int n);

/// Complex samples of g_{m,n} on its support [n*M/2, n*M/2 + L_g).
/// The subcarrier modulation is referenced to the absolute time origin.
VecC modulated_pulse(const PrototypeFilter& g, int m, int n);

/// Inner product <g_{m,n}, g_{p,q}> = sum_l g_{m,n}(l) * conj(g_{p,q}(l)).
cplx pulse_inner_product(const PrototypeFilter& g, int m, int n, int p, int q);

/// Frequency-sampling coefficients K -> [P_0, P_1, ..., P_{K-1}] shipped as defaults.
const std::map<int, std::vector<double>>& default_prototype_coeffs();

/// Parse a coefficient fixture file ("K: P0 P1 ..." lines, '#' comments).
std::map<int, std::vector<double>> load_prototype_coeffs(const std::string& path);

/// Design the prototype: frequency-sampling seed from the coefficients, then a
/// deterministic confinement optimization constrained to exact real-field
/// orthogonality of the resulting filter bank. Rejects odd M, M < 4 and K < 2.
PrototypeFilter design_prototype(int M, int K);
PrototypeFilter design_prototype(int M, int K, const std::vector<double>& fs_coeffs);

/// beta, gamma, delta by direct inner products over the first-order neighborhood.
/// Throws if the computed weights violate gamma > beta > delta > 0 or the
/// expected sign pattern of the neighborhood grid.
InterferenceWeights compute_weights(const PrototypeFilter& g);

}  // namespace fbmc

#endif
