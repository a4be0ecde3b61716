#ifndef FBMC_RECEIVER_HPP
#define FBMC_RECEIVER_HPP

#include <string>
#include <vector>

#include "fbmc/interference.hpp"
#include "fbmc/tensor.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

enum class ReceiverMode { structure_blind, informed, training_only, perfect_csi };

const char* to_string(ReceiverMode m);
ReceiverMode receiver_mode_from_string(const std::string& s);

/// Which symbol alphabet the detector projects onto: staggered real PAM
/// (FBMC/OQAM) or complex QAM (the CP-OFDM baseline).
enum class ConstellationKind { oqam_pam, qpsk_complex };

struct AlsConfig {
    int max_iters = 200;
    double tol = 1e-6;        // relative cost-decrease threshold
    int n_simple_iters = 2;   // plain iterations before informed steps
    ReceiverMode mode = ReceiverMode::informed;
    std::uint64_t seed = 1;   // random H initialization

    void validate() const;
};

/// Training occupying the first n_cols frame columns. c_known are the known
/// pseudo-symbols; fit_cols selects the columns whose pseudo-symbols are fully
/// determined by the training content (used for scaling and training-only fits).
struct Preamble {
    int n_cols = 0;
    MatR d_known;  // (M*N_T) x n_cols
    MatC c_known;  // (M*N_T) x n_cols
    std::vector<int> fit_cols;
};

struct ReceiverReport {
    MatC H_hat;                     // N_R x (M*N_T)
    MatC C_hat;                     // (M*N_T) x N, scaling resolved
    std::vector<MatR> D_hat;        // detected real frames per Tx antenna (oqam kind)
    int iterations = 0;
    std::vector<double> cost_trace;
    bool converged = false;
    bool flagged = false;           // rank failure or unresolvable scaling
    std::string flag_reason;
};

/// C = (H kr Gamma)^+ Y2; least squares for fixed H. The LS problem decouples
/// per subcarrier; rank is checked per block at 1e-10 * sigma_max.
MatC als_update_C(const MatC& Y2, const MatC& H, const MatC& Gamma);

/// H = [(C^T kr Gamma)^+ Y3]^T; least squares for fixed C.
MatC als_update_H(const MatC& Y3, const MatC& C, const MatC& Gamma);

/// Per-CPD-column scaling fix from the preamble: alpha_j is the LS fit of the
/// estimated preamble entries to the known ones over pre.fit_cols. C and H are
/// rescaled in place (C row * alpha, H column / alpha). Throws when a known
/// preamble row has no entry above 1e-9.
VecC resolve_scaling(MatC& C_hat, MatC& H_hat, const Preamble& pre);

/// Nearest-PAM decision on real parts (levels +/-a, +/-3a, ...).
MatR detect(const MatC& C, double amplitude, int levels_per_axis = 2);

/// Joint channel/data estimation. weights/sm may be null for the qpsk kind.
ReceiverReport joint_estimate(const ReceivedTensor& Y, const AlsConfig& cfg, const Preamble& pre,
                              int n_tx, const InterferenceWeights* weights, const StructMatrices* sm,
                              ConstellationKind kind, double amplitude, int levels_per_axis = 2);

/// Single C update with the true channel factor, then detection.
ReceiverReport equalize_perfect_csi(const ReceivedTensor& Y, const MatC& H_true, int n_tx,
                                    ConstellationKind kind, double amplitude, int levels_per_axis = 2);

double nmse(const MatC& H_hat, const MatC& H_true);

/// Bit error rate over the payload (preamble columns excluded). Each real PAM
/// symbol carries log2(levels) Gray-coded bits.
double ber(const std::vector<MatR>& D_hat, const std::vector<MatR>& D_true, int n_preamble_cols,
           double amplitude, int levels_per_axis = 2);

}  // namespace fbmc

#endif
