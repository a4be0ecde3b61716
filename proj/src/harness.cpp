#include "fbmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fbmc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

std::string dirname_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

// Known OQAM training: pilots in column 0, zero guard in column 1 so the
// column-0 pseudo-symbols are fully determined by the training content. The
// pilots reuse the guard slot's energy budget (boost sqrt(2)), keeping the
// average preamble power equal to the payload power.
MatR make_oqam_preamble(int M, int n_tx, int n_cols, double amp, std::uint64_t seed) {
    GaussianRng rng(seed);
    MatR d = MatR::Zero(static_cast<Eigen::Index>(M) * n_tx, n_cols);
    const double boost = std::sqrt(2.0) * amp;
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, 0) = boost * rng.sign();
    return d;
}

}  // namespace

void Scenario::validate() const {
    mod.validate();
    if (trials_per_point < 1) throw std::invalid_argument("Scenario: trials_per_point must be >= 1");
    if (snr_grid_db.empty()) throw std::invalid_argument("Scenario: snr_grid_db must be non-empty");
    if (profile.length() < 1) throw std::invalid_argument("Scenario: channel profile missing");
    if (cp_len < 0 || cp_len >= mod.num_subcarriers)
        throw std::invalid_argument("Scenario: cp_len out of range");
    if (run_cp_ofdm && mod.n_tx != 1)
        throw std::invalid_argument("Scenario: the CP-OFDM baseline is SIMO (n_tx must be 1)");
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario: " + path);
    Scenario scn;
    bool have_profile = false;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("scenario: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "name") scn.name = val;
        else if (key == "M") scn.mod.num_subcarriers = std::stoi(val);
        else if (key == "K") scn.overlap_factor = std::stoi(val);
        else if (key == "N") scn.mod.num_fbmc_symbols = std::stoi(val);
        else if (key == "n_tx") scn.mod.n_tx = std::stoi(val);
        else if (key == "n_rx") scn.mod.n_rx = std::stoi(val);
        else if (key == "preamble_len") scn.mod.preamble_len = std::stoi(val);
        else if (key == "constellation") scn.mod.constellation_order = std::stoi(val);
        else if (key == "profile") {
            scn.profile = load_profile(dirname_of(path) + "/" + val);
            have_profile = true;
        } else if (key == "snr_grid_db") {
            scn.snr_grid_db.clear();
            for (const auto& t : split_list(val)) scn.snr_grid_db.push_back(std::stod(t));
        } else if (key == "trials_per_point") scn.trials_per_point = std::stoi(val);
        else if (key == "system") {
            scn.run_fbmc = false;
            scn.run_cp_ofdm = false;
            for (const auto& t : split_list(val)) {
                if (t == "fbmc") scn.run_fbmc = true;
                else if (t == "cp_ofdm") scn.run_cp_ofdm = true;
                else throw std::runtime_error("scenario: unknown system '" + t + "'");
            }
        } else if (key == "fbmc_modes") {
            scn.fbmc_modes.clear();
            for (const auto& t : split_list(val)) scn.fbmc_modes.push_back(receiver_mode_from_string(t));
        } else if (key == "ofdm_modes") {
            scn.ofdm_modes.clear();
            for (const auto& t : split_list(val)) scn.ofdm_modes.push_back(receiver_mode_from_string(t));
        } else if (key == "cp_len") scn.cp_len = std::stoi(val);
        else if (key == "seed") scn.seed = std::stoull(val);
        else if (key == "als_max_iters") scn.als_max_iters = std::stoi(val);
        else if (key == "als_tol") scn.als_tol = std::stod(val);
        else if (key == "als_n_simple") scn.als_n_simple = std::stoi(val);
        else throw std::runtime_error("scenario: unknown key '" + key + "'");
    }
    if (!have_profile) throw std::runtime_error("scenario: profile key is required");
    scn.validate();
    return scn;
}

ScenarioContext make_context(const Scenario& scn) {
    ScenarioContext ctx;
    const int M = scn.mod.num_subcarriers;
    ctx.filter = design_prototype(M, scn.overlap_factor);
    ctx.weights = compute_weights(ctx.filter);
    ctx.sm = build_struct_matrices(M, scn.mod.num_fbmc_symbols, /*wrap_corrected=*/true);
    ctx.amplitude = oqam_amplitude(scn.mod.constellation_order);
    ctx.d_preamble = make_oqam_preamble(M, scn.mod.n_tx, scn.mod.preamble_len, ctx.amplitude,
                                        derive_seed(scn.seed, 0xF1, 0, 0));
    // pseudo-symbols of the training-only frame (payload zero)
    MatR dref = MatR::Zero(static_cast<Eigen::Index>(M) * scn.mod.n_tx, scn.mod.num_fbmc_symbols);
    dref.leftCols(scn.mod.preamble_len) = ctx.d_preamble;
    MatC cref(dref.rows(), dref.cols());
    for (int t = 0; t < scn.mod.n_tx; ++t)
        cref.middleRows(static_cast<Eigen::Index>(t) * M, M) =
            virtualize(MatR(dref.middleRows(static_cast<Eigen::Index>(t) * M, M)), ctx.weights, ctx.sm);
    ctx.c_preamble = cref.leftCols(scn.mod.preamble_len);

    GaussianRng rng(derive_seed(scn.seed, 0xF2, 0, 0));
    ctx.x_preamble.resize(M, 1);
    for (int p = 0; p < M; ++p)
        ctx.x_preamble(p, 0) = cplx(ctx.amplitude * rng.sign(), ctx.amplitude * rng.sign());
    return ctx;
}

namespace {

Preamble fbmc_preamble(const ScenarioContext& ctx, int n_cols) {
    Preamble pre;
    pre.n_cols = n_cols;
    pre.d_known = ctx.d_preamble;
    pre.c_known = ctx.c_preamble;
    pre.fit_cols = {0};
    return pre;
}

TrialMetrics::Entry run_mode(const std::string& system, ReceiverMode mode, const ReceivedTensor& Y,
                             const AlsConfig& base_cfg, const Preamble& pre, int n_tx,
                             const InterferenceWeights* w, const StructMatrices* sm,
                             ConstellationKind kind, double amp, int levels, const MatC& H_true,
                             const std::vector<MatR>& D_true, int ber_skip_cols) {
    TrialMetrics::Entry e;
    e.system = system;
    e.mode = to_string(mode);
    ReceiverReport rep;
    if (mode == ReceiverMode::perfect_csi) {
        rep = equalize_perfect_csi(Y, H_true, n_tx, kind, amp, levels);
    } else {
        AlsConfig cfg = base_cfg;
        cfg.mode = mode;
        rep = joint_estimate(Y, cfg, pre, n_tx, w, sm, kind, amp, levels);
    }
    if (rep.flagged) {
        e.flagged = true;
        return e;
    }
    e.iterations = rep.iterations;
    e.nmse = (mode == ReceiverMode::perfect_csi) ? 0.0 : nmse(rep.H_hat, H_true);
    e.ber = ber(rep.D_hat, D_true, ber_skip_cols, amp, levels);
    return e;
}

}  // namespace

TrialMetrics run_trial(const Scenario& scn, const ScenarioContext& ctx, double snr_db,
                       std::uint64_t trial_seed) {
    const int M = scn.mod.num_subcarriers;
    const int N = scn.mod.num_fbmc_symbols;
    const int n_tx = scn.mod.n_tx, n_rx = scn.mod.n_rx;
    const double amp = ctx.amplitude;
    const int levels = static_cast<int>(std::lround(std::sqrt(double(scn.mod.constellation_order))));

    const std::uint64_t seed_ch = derive_seed(trial_seed, 1);
    const std::uint64_t seed_noise = derive_seed(trial_seed, 2);
    const std::uint64_t seed_data = derive_seed(trial_seed, 3);
    const std::uint64_t seed_init = derive_seed(trial_seed, 4);

    const ChannelSet ch = draw_channel(scn.profile, n_tx, n_rx, M, seed_ch);
    const MatC H_true = ch.factor();

    AlsConfig cfg;
    cfg.max_iters = scn.als_max_iters;
    cfg.tol = scn.als_tol;
    cfg.n_simple_iters = scn.als_n_simple;
    cfg.seed = seed_init;

    TrialMetrics out;

    if (scn.run_fbmc) {
        GaussianRng rng(seed_data);
        MatR D(static_cast<Eigen::Index>(M) * n_tx, N);
        for (Eigen::Index j = 0; j < D.cols(); ++j)
            for (Eigen::Index i = 0; i < D.rows(); ++i) D(i, j) = amp * rng.sign();
        D.leftCols(scn.mod.preamble_len) = ctx.d_preamble;

        std::vector<VecC> s(n_tx);
        double power = 0.0;
        for (int t = 0; t < n_tx; ++t) {
            s[t] = sfb_modulate(MatR(D.middleRows(static_cast<Eigen::Index>(t) * M, M)), ctx.filter);
            power += s[t].squaredNorm() / double(s[t].size());
        }
        NoiseSpec ns{snr_to_sigma2(snr_db, power), seed_noise};
        const auto r = apply_channel(s, ch, ns);

        ReceivedTensor Y;
        for (int rx = 0; rx < n_rx; ++rx) Y.slice.push_back(afb_demodulate(r[rx], ctx.filter, M, N));

        const Preamble pre = fbmc_preamble(ctx, scn.mod.preamble_len);
        std::vector<MatR> D_true;
        for (int t = 0; t < n_tx; ++t) D_true.push_back(D.middleRows(static_cast<Eigen::Index>(t) * M, M));
        for (ReceiverMode mode : scn.fbmc_modes)
            out.entries.push_back(run_mode("fbmc", mode, Y, cfg, pre, n_tx, &ctx.weights, &ctx.sm,
                                           ConstellationKind::oqam_pam, amp, levels, H_true, D_true,
                                           scn.mod.preamble_len));
    }

    if (scn.run_cp_ofdm) {
        const int n_sym = N / 2;
        GaussianRng rng(derive_seed(seed_data, 7));
        MatC X(M, n_sym);
        for (int k = 0; k < n_sym; ++k)
            for (int p = 0; p < M; ++p) X(p, k) = cplx(amp * rng.sign(), amp * rng.sign());
        X.col(0) = ctx.x_preamble.col(0);

        std::vector<VecC> s{ofdm_modulate(X, scn.cp_len)};
        const double power = s[0].squaredNorm() / double(s[0].size());
        NoiseSpec ns{snr_to_sigma2(snr_db, power), derive_seed(seed_noise, 7)};
        const auto r = apply_channel(s, ch, ns);

        ReceivedTensor Y;
        for (int rx = 0; rx < n_rx; ++rx)
            Y.slice.push_back(ofdm_demodulate(r[rx], M, scn.cp_len, n_sym));

        Preamble pre;
        pre.n_cols = 1;
        pre.c_known = ctx.x_preamble;
        pre.d_known = ctx.x_preamble.real();
        pre.fit_cols = {0};

        std::vector<MatR> X_true{qam_to_oqam(X)};
        for (ReceiverMode mode : scn.ofdm_modes) {
            TrialMetrics::Entry e;
            e.system = "cp_ofdm";
            e.mode = to_string(mode);
            ReceiverReport rep;
            if (mode == ReceiverMode::perfect_csi) {
                rep = equalize_perfect_csi(Y, H_true, 1, ConstellationKind::qpsk_complex, amp, levels);
            } else {
                AlsConfig c2 = cfg;
                c2.mode = mode;
                rep = joint_estimate(Y, c2, pre, 1, nullptr, nullptr, ConstellationKind::qpsk_complex, amp, levels);
            }
            if (rep.flagged) {
                e.flagged = true;
            } else {
                e.iterations = rep.iterations;
                e.nmse = (mode == ReceiverMode::perfect_csi) ? 0.0 : nmse(rep.H_hat, H_true);
                // per-axis PAM decisions on the detected QAM symbols, preamble symbol excluded
                const MatR re = detect(rep.C_hat, amp, levels);
                const MatR im = detect(cplx(0.0, -1.0) * rep.C_hat, amp, levels);
                MatC Xd = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
                std::vector<MatR> Xd_r{qam_to_oqam(Xd)};
                e.ber = ber(Xd_r, X_true, 2, amp, levels);
            }
            out.entries.push_back(e);
        }
    }
    return out;
}

std::vector<ResultRow> run_scenario(const Scenario& scn, int threads) {
    scn.validate();
    const ScenarioContext ctx = make_context(scn);
    const int n_snr = static_cast<int>(scn.snr_grid_db.size());
    const int T = scn.trials_per_point;
    std::vector<std::vector<TrialMetrics>> results(n_snr, std::vector<TrialMetrics>(T));

    const int nthreads = threads > 0 ? threads
                                     : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    const int total = n_snr * T;
    auto worker = [&] {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= total) return;
            const int si = idx / T, ti = idx % T;
            const std::uint64_t trial_seed = derive_seed(scn.seed, si + 1, ti + 1);
            results[si][ti] = run_trial(scn, ctx, scn.snr_grid_db[si], trial_seed);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    // deterministic reduction in trial order
    std::vector<ResultRow> rows;
    for (int si = 0; si < n_snr; ++si) {
        std::vector<std::string> keys;
        for (const auto& e : results[si][0].entries) keys.push_back(e.system + "/" + e.mode);
        for (size_t k = 0; k < keys.size(); ++k) {
            ResultRow row;
            row.system = results[si][0].entries[k].system;
            row.mode = results[si][0].entries[k].mode;
            row.snr_db = scn.snr_grid_db[si];
            row.seed = scn.seed;
            double sum_n = 0, sum_b = 0, sum_i = 0, sum_i2 = 0;
            int good = 0, flagged = 0;
            for (int ti = 0; ti < T; ++ti) {
                const auto& e = results[si][ti].entries[k];
                if (e.flagged) {
                    ++flagged;
                    continue;
                }
                sum_n += e.nmse;
                sum_b += e.ber;
                sum_i += e.iterations;
                sum_i2 += double(e.iterations) * e.iterations;
                ++good;
            }
            row.trials = T;
            row.flagged = flagged;
            if (good > 0) {
                row.nmse = sum_n / good;
                row.ber = sum_b / good;
                row.avg_iterations = sum_i / good;
                const double var = good > 1 ? (sum_i2 - sum_i * sum_i / good) / (good - 1) : 0.0;
                row.iter_std = std::sqrt(std::max(0.0, var));
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output csv: " + path);
    out << "system,mode,snr_db,nmse,ber,avg_iterations,iter_std,trials,flagged,seed\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10e,%.10e,%.10g,%.10g,%d,%d,%llu\n",
                      r.system.c_str(), r.mode.c_str(), r.snr_db, r.nmse, r.ber, r.avg_iterations,
                      r.iter_std, r.trials, r.flagged, static_cast<unsigned long long>(r.seed));
        out << buf;
    }
}

Histogram emit_histogram(const Scenario& scn, int bins, int frames) {
    if (frames < 1) throw std::invalid_argument("emit_histogram: need at least one frame");
    const ScenarioContext ctx = make_context(scn);
    const int M = scn.mod.num_subcarriers, N = scn.mod.num_fbmc_symbols;
    std::vector<MatC> cs;
    for (int f = 0; f < frames; ++f) {
        GaussianRng rng(derive_seed(scn.seed, 0x4157, f));
        MatR D(M, N);
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < M; ++i) D(i, j) = ctx.amplitude * rng.sign();
        cs.push_back(virtualize(D, ctx.weights, ctx.sm));
    }
    return interference_histogram(cs, bins);
}

void write_histogram_csv(const std::string& path, const Histogram& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output csv: " + path);
    out << "bin_center,density\n";
    char buf[128];
    for (Eigen::Index i = 0; i < h.bin_centers.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10e,%.10e\n", h.bin_centers[i], h.density[i]);
        out << buf;
    }
}

}  // namespace fbmc
