#include "fbmc/receiver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbmc {

namespace {
constexpr double kRankRel = 1e-10;

// Per-subcarrier stacked channel column A_p(r,t) = H(r, t*M + p).
MatC channel_block(const MatC& H, int M, int n_tx, int p) {
    MatC A(H.rows(), n_tx);
    for (int t = 0; t < n_tx; ++t) A.col(t) = H.col(static_cast<Eigen::Index>(t) * M + p);
    return A;
}

// Per-subcarrier symbol block B_p(q,t) = C(t*M + p, q).
MatC symbol_block(const MatC& C, int M, int n_tx, int p) {
    const int N = static_cast<int>(C.cols());
    MatC B(N, n_tx);
    for (int t = 0; t < n_tx; ++t) B.col(t) = C.row(static_cast<Eigen::Index>(t) * M + p).transpose();
    return B;
}

// LS solve X = A^+ Y with a rank check against the given global sigma_max.
MatC block_solve(const MatC& A, const MatC& Y, double sigma_max, const char* who, int p) {
    const MatC G = A.adjoint() * A;
    Eigen::SelfAdjointEigenSolver<MatC> eig(G);
    const double smin = std::sqrt(std::max(0.0, eig.eigenvalues().minCoeff()));
    if (smin <= kRankRel * sigma_max) {
        throw std::runtime_error(std::string(who) + ": rank-deficient block at subcarrier " +
                                 std::to_string(p) + " (singular value " + std::to_string(smin) + ")");
    }
    return G.ldlt().solve(A.adjoint() * Y);
}

double global_sigma_max(const MatC& H, int M, int n_tx, bool by_channel) {
    double s = 0.0;
    for (int p = 0; p < M; ++p) {
        const MatC A = by_channel ? channel_block(H, M, n_tx, p) : symbol_block(H, M, n_tx, p);
        s = std::max(s, A.norm());  // upper bound of sigma_max, adequate for the threshold
    }
    return s;
}

// Residual norm of the slice-wise model Y(:,:,r) - sum_t diag(H^(r,t)) C^(t);
// equals cpd_cost but avoids materializing the Khatri-Rao factor.
double model_cost(const ReceivedTensor& Y, const MatC& H, const MatC& C, int n_tx) {
    const int M = Y.M();
    double acc = 0.0;
    for (int r = 0; r < Y.n_rx(); ++r) {
        MatC resid = Y.slice[r];
        for (int t = 0; t < n_tx; ++t) {
            const auto Hc = H.row(r).segment(static_cast<Eigen::Index>(t) * M, M).transpose();
            resid -= Hc.asDiagonal() * C.middleRows(static_cast<Eigen::Index>(t) * M, M);
        }
        acc += resid.squaredNorm();
    }
    return std::sqrt(acc);
}

MatC stack_virtualize(const MatR& D, int M, int n_tx, const InterferenceWeights& w, const StructMatrices& sm) {
    MatC C(D.rows(), D.cols());
    for (int t = 0; t < n_tx; ++t)
        C.middleRows(static_cast<Eigen::Index>(t) * M, M) =
            virtualize(MatR(D.middleRows(static_cast<Eigen::Index>(t) * M, M)), w, sm);
    return C;
}

int pam_index(double x, double a, int levels) {
    const int idx = static_cast<int>(std::lround((x / a + levels - 1) / 2.0));
    return std::min(std::max(idx, 0), levels - 1);
}

int gray_code(int i) { return i ^ (i >> 1); }
}  // namespace

const char* to_string(ReceiverMode m) {
    switch (m) {
        case ReceiverMode::structure_blind: return "structure_blind";
        case ReceiverMode::informed: return "informed";
        case ReceiverMode::training_only: return "training_only";
        default: return "perfect_csi";
    }
}

ReceiverMode receiver_mode_from_string(const std::string& s) {
    if (s == "structure_blind" || s == "s-blind" || s == "blind") return ReceiverMode::structure_blind;
    if (s == "informed" || s == "inf") return ReceiverMode::informed;
    if (s == "training_only" || s == "train") return ReceiverMode::training_only;
    if (s == "perfect_csi" || s == "pci") return ReceiverMode::perfect_csi;
    throw std::invalid_argument("unknown receiver mode: " + s);
}

void AlsConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("AlsConfig: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("AlsConfig: tol must be positive");
    if (n_simple_iters < 1) throw std::invalid_argument("AlsConfig: n_simple_iters must be >= 1");
}

MatC als_update_C(const MatC& Y2, const MatC& H, const MatC& Gamma) {
    const int M = static_cast<int>(Gamma.rows());
    const int n_tx = static_cast<int>(Gamma.cols()) / M;
    const int n_rx = static_cast<int>(H.rows());
    const int N = static_cast<int>(Y2.cols());
    if (Y2.rows() != static_cast<Eigen::Index>(M) * n_rx)
        throw std::invalid_argument("als_update_C: Y2 rows must be M*N_R");
    if (n_rx < n_tx) throw std::runtime_error("als_update_C: needs at least as many Rx as Tx antennas");

    const double smax = global_sigma_max(H, M, n_tx, true);
    MatC C(static_cast<Eigen::Index>(M) * n_tx, N);
    MatC Yp(n_rx, N);
    for (int p = 0; p < M; ++p) {
        for (int r = 0; r < n_rx; ++r) Yp.row(r) = Y2.row(static_cast<Eigen::Index>(r) * M + p);
        const MatC A = channel_block(H, M, n_tx, p);
        const MatC X = block_solve(A, Yp, smax, "als_update_C", p);
        for (int t = 0; t < n_tx; ++t) C.row(static_cast<Eigen::Index>(t) * M + p) = X.row(t);
    }
    return C;
}

MatC als_update_H(const MatC& Y3, const MatC& C, const MatC& Gamma) {
    const int M = static_cast<int>(Gamma.rows());
    const int n_tx = static_cast<int>(Gamma.cols()) / M;
    const int N = static_cast<int>(C.cols());
    const int n_rx = static_cast<int>(Y3.cols());
    if (Y3.rows() != static_cast<Eigen::Index>(M) * N)
        throw std::invalid_argument("als_update_H: Y3 rows must be M*N");

    const double smax = global_sigma_max(C, M, n_tx, false);
    MatC H(n_rx, static_cast<Eigen::Index>(M) * n_tx);
    MatC Yp(N, n_rx);
    for (int p = 0; p < M; ++p) {
        for (int q = 0; q < N; ++q) Yp.row(q) = Y3.row(static_cast<Eigen::Index>(q) * M + p);
        const MatC B = symbol_block(C, M, n_tx, p);
        const MatC X = block_solve(B, Yp, smax, "als_update_H", p);  // n_tx x n_rx
        for (int t = 0; t < n_tx; ++t)
            for (int r = 0; r < n_rx; ++r) H(r, static_cast<Eigen::Index>(t) * M + p) = X(t, r);
    }
    return H;
}

VecC resolve_scaling(MatC& C_hat, MatC& H_hat, const Preamble& pre) {
    const auto rows = C_hat.rows();
    if (pre.c_known.rows() != rows)
        throw std::invalid_argument("resolve_scaling: preamble rows must match the stacked C");
    const auto& cols = pre.fit_cols;
    if (cols.empty()) throw std::invalid_argument("resolve_scaling: no preamble fit columns");

    VecC alpha(rows);
    for (Eigen::Index j = 0; j < rows; ++j) {
        double mag = 0.0;
        cplx num(0.0, 0.0);
        double den = 0.0;
        for (int q : cols) {
            mag = std::max(mag, std::abs(pre.c_known(j, q)));
            num += std::conj(C_hat(j, q)) * pre.c_known(j, q);
            den += std::norm(C_hat(j, q));
        }
        if (mag < 1e-9)
            throw std::runtime_error("resolve_scaling: preamble magnitude below 1e-9 at row " +
                                     std::to_string(j) + ", cannot resolve scaling");
        if (den < 1e-18)
            throw std::runtime_error("resolve_scaling: estimated preamble entries vanish at row " +
                                     std::to_string(j));
        alpha[j] = num / den;
    }
    C_hat.array().colwise() *= alpha.array();
    for (Eigen::Index j = 0; j < rows; ++j) H_hat.col(j) /= alpha[j];
    return alpha;
}

MatR detect(const MatC& C, double amplitude, int levels_per_axis) {
    MatR D(C.rows(), C.cols());
    for (Eigen::Index j = 0; j < C.cols(); ++j)
        for (Eigen::Index i = 0; i < C.rows(); ++i) {
            const int idx = pam_index(C(i, j).real(), amplitude, levels_per_axis);
            D(i, j) = amplitude * (2 * idx - (levels_per_axis - 1));
        }
    return D;
}

namespace {

MatC detect_complex(const MatC& C, double amplitude, int levels) {
    MatC X(C.rows(), C.cols());
    for (Eigen::Index j = 0; j < C.cols(); ++j)
        for (Eigen::Index i = 0; i < C.rows(); ++i) {
            const int ir = pam_index(C(i, j).real(), amplitude, levels);
            const int ii = pam_index(C(i, j).imag(), amplitude, levels);
            X(i, j) = cplx(amplitude * (2 * ir - (levels - 1)), amplitude * (2 * ii - (levels - 1)));
        }
    return X;
}

std::vector<MatR> split_ant(const MatR& D, int M, int n_tx) {
    std::vector<MatR> out;
    for (int t = 0; t < n_tx; ++t) out.push_back(D.middleRows(static_cast<Eigen::Index>(t) * M, M));
    return out;
}

}  // namespace

ReceiverReport joint_estimate(const ReceivedTensor& Y, const AlsConfig& cfg, const Preamble& pre,
                              int n_tx, const InterferenceWeights* weights, const StructMatrices* sm,
                              ConstellationKind kind, double amplitude, int levels_per_axis) {
    cfg.validate();
    const int M = Y.M(), N = Y.N(), n_rx = Y.n_rx();
    const MatC Gamma = gamma_factor(M, n_tx);
    if (kind == ConstellationKind::oqam_pam && cfg.mode == ReceiverMode::informed && (!weights || !sm))
        throw std::invalid_argument("joint_estimate: informed OQAM mode needs weights and structure matrices");
    if (cfg.mode == ReceiverMode::perfect_csi)
        throw std::invalid_argument("joint_estimate: perfect CSI runs through equalize_perfect_csi");

    ReceiverReport rep;
    const MatC Y2 = unfold2(Y);
    const MatC Y3 = unfold3(Y);

    try {
        if (cfg.mode == ReceiverMode::training_only) {
            // channel from the known preamble columns only, then a single symbol update
            MatC Y3fit(static_cast<Eigen::Index>(M) * pre.fit_cols.size(), n_rx);
            MatC Cfit(static_cast<Eigen::Index>(M) * n_tx, pre.fit_cols.size());
            for (size_t k = 0; k < pre.fit_cols.size(); ++k) {
                const int q = pre.fit_cols[k];
                for (int r = 0; r < n_rx; ++r)
                    Y3fit.col(r).segment(static_cast<Eigen::Index>(k) * M, M) = Y.slice[r].col(q);
                Cfit.col(k) = pre.c_known.col(q);
            }
            rep.H_hat = als_update_H(Y3fit, Cfit, Gamma);
            rep.C_hat = als_update_C(Y2, rep.H_hat, Gamma);
            rep.iterations = 0;
            rep.converged = true;
            rep.cost_trace.push_back(model_cost(Y, rep.H_hat, rep.C_hat, n_tx));
        } else {
            GaussianRng rng(cfg.seed);
            MatC H(n_rx, static_cast<Eigen::Index>(M) * n_tx);
            for (Eigen::Index j = 0; j < H.cols(); ++j)
                for (int r = 0; r < n_rx; ++r) H(r, j) = rng.cnormal();

            MatC C;
            double prev = std::numeric_limits<double>::infinity();
            MatR D_prev;
            bool have_prev_D = false;
            const bool informed = cfg.mode == ReceiverMode::informed;
            for (int it = 1; it <= cfg.max_iters; ++it) {
                C = als_update_C(Y2, H, Gamma);
                if (it == cfg.n_simple_iters) resolve_scaling(C, H, pre);
                if (informed && it > cfg.n_simple_iters) {
                    MatR Dtrack;  // detected lattice, used for fixed-point stopping
                    if (kind == ConstellationKind::qpsk_complex) {
                        MatC X = detect_complex(C, amplitude, levels_per_axis);
                        X.leftCols(pre.n_cols) = pre.c_known.leftCols(pre.n_cols);
                        Dtrack.resize(X.rows(), 2 * X.cols());
                        Dtrack << X.real(), X.imag();
                        C = X;
                    } else {
                        MatR Dh = detect(C, amplitude, levels_per_axis);
                        Dh.leftCols(pre.n_cols) = pre.d_known;
                        Dtrack = Dh;
                        C = stack_virtualize(Dh, M, n_tx, *weights, *sm);
                    }
                    if (have_prev_D && (Dtrack - D_prev).cwiseAbs().maxCoeff() == 0.0) {
                        rep.iterations = it;
                        rep.converged = true;
                        break;
                    }
                    D_prev = Dtrack;
                    have_prev_D = true;
                }
                H = als_update_H(Y3, C, Gamma);
                const double J = model_cost(Y, H, C, n_tx);
                rep.cost_trace.push_back(J);
                rep.iterations = it;
                if (std::isfinite(prev)) {
                    const double rel = (prev - J) / std::max(prev, 1e-300);
                    if (!informed && rel < cfg.tol) {
                        rep.converged = true;
                        break;
                    }
                    if (informed && it > cfg.n_simple_iters + 1 && std::abs(rel) < cfg.tol * 1e-3) {
                        rep.converged = true;
                        break;
                    }
                }
                prev = J;
            }
            rep.H_hat = H;
            rep.C_hat = als_update_C(Y2, H, Gamma);
            if (informed) {
                // hard-decision fixed points are invariant to per-column sign flips;
                // anchor the remaining discrete ambiguity against the preamble at
                // convergence, before detection
                for (Eigen::Index j = 0; j < rep.C_hat.rows(); ++j) {
                    cplx dot(0.0, 0.0);
                    for (int q : pre.fit_cols) dot += std::conj(rep.C_hat(j, q)) * pre.c_known(j, q);
                    if (dot.real() < 0.0) {
                        rep.C_hat.row(j) = -rep.C_hat.row(j);
                        rep.H_hat.col(j) = -rep.H_hat.col(j);
                    }
                }
            }
        }
    } catch (const std::runtime_error& e) {
        rep.flagged = true;
        rep.flag_reason = e.what();
        return rep;
    }

    rep.D_hat = split_ant(detect(rep.C_hat, amplitude, levels_per_axis), M, n_tx);
    return rep;
}

ReceiverReport equalize_perfect_csi(const ReceivedTensor& Y, const MatC& H_true, int n_tx,
                                    ConstellationKind kind, double amplitude, int levels_per_axis) {
    (void)kind;
    const int M = Y.M();
    const MatC Gamma = gamma_factor(M, n_tx);
    ReceiverReport rep;
    try {
        rep.C_hat = als_update_C(unfold2(Y), H_true, Gamma);
    } catch (const std::runtime_error& e) {
        rep.flagged = true;
        rep.flag_reason = e.what();
        return rep;
    }
    rep.H_hat = H_true;
    rep.iterations = 0;
    rep.converged = true;
    rep.D_hat = split_ant(detect(rep.C_hat, amplitude, levels_per_axis), M, n_tx);
    return rep;
}

double nmse(const MatC& H_hat, const MatC& H_true) {
    if (H_hat.rows() != H_true.rows() || H_hat.cols() != H_true.cols())
        throw std::invalid_argument("nmse: dimension mismatch");
    const double denom = H_true.squaredNorm();
    if (denom == 0.0) throw std::invalid_argument("nmse: reference channel is zero");
    return (H_hat - H_true).squaredNorm() / denom;
}

double ber(const std::vector<MatR>& D_hat, const std::vector<MatR>& D_true, int n_preamble_cols,
           double amplitude, int levels_per_axis) {
    if (D_hat.size() != D_true.size()) throw std::invalid_argument("ber: antenna count mismatch");
    const int bits_per_symbol = static_cast<int>(std::lround(std::log2(levels_per_axis)));
    long err = 0, total = 0;
    for (size_t t = 0; t < D_hat.size(); ++t) {
        const MatR& A = D_hat[t];
        const MatR& B = D_true[t];
        if (A.rows() != B.rows() || A.cols() != B.cols()) throw std::invalid_argument("ber: dimension mismatch");
        for (Eigen::Index q = n_preamble_cols; q < A.cols(); ++q)
            for (Eigen::Index p = 0; p < A.rows(); ++p) {
                const int ga = gray_code(pam_index(A(p, q), amplitude, levels_per_axis));
                const int gb = gray_code(pam_index(B(p, q), amplitude, levels_per_axis));
                for (int b = 0; b < bits_per_symbol; ++b) err += ((ga ^ gb) >> b) & 1;
                total += bits_per_symbol;
            }
    }
    if (total == 0) throw std::invalid_argument("ber: empty payload");
    return double(err) / double(total);
}

}  // namespace fbmc
