#ifndef FBMC_HARNESS_HPP
#define FBMC_HARNESS_HPP

#include <string>
#include <vector>

#include "fbmc/channel.hpp"
#include "fbmc/interference.hpp"
#include "fbmc/receiver.hpp"
#include "fbmc/waveform.hpp"

namespace fbmc {

/// Monte Carlo experiment description; loadable from a key = value file.
struct Scenario {
    std::string name = "peda";
    ModulationConfig mod;           // M, N, antennas, preamble_len, constellation
    int overlap_factor = 4;         // prototype K
    ChannelProfile profile;
    std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
    int trials_per_point = 500;
    bool run_fbmc = true;
    bool run_cp_ofdm = true;
    std::vector<ReceiverMode> fbmc_modes{ReceiverMode::informed, ReceiverMode::structure_blind,
                                         ReceiverMode::training_only, ReceiverMode::perfect_csi};
    std::vector<ReceiverMode> ofdm_modes{ReceiverMode::informed};
    int cp_len = 8;
    std::uint64_t seed = 20240601;
    int als_max_iters = 200;
    double als_tol = 1e-6;
    int als_n_simple = 2;

    void validate() const;
};

/// Parse a scenario fixture. The profile path inside is resolved relative to
/// the scenario file's directory. Unknown keys are rejected.
Scenario load_scenario(const std::string& path);

struct ResultRow {
    std::string system;  // "fbmc" or "cp_ofdm"
    std::string mode;
    double snr_db = 0.0;
    double nmse = 0.0;
    double ber = 0.0;
    double avg_iterations = 0.0;
    double iter_std = 0.0;
    int trials = 0;
    int flagged = 0;
    std::uint64_t seed = 0;
};

/// Metrics of a single transmit->channel->receive cycle, one entry per
/// (system, mode); all modes see the same channel/noise realization.
struct TrialMetrics {
    struct Entry {
        std::string system, mode;
        double nmse = 0.0, ber = 0.0;
        int iterations = 0;
        bool flagged = false;
    };
    std::vector<Entry> entries;
};

/// Precomputed per-scenario state shared across trials.
struct ScenarioContext {
    PrototypeFilter filter;
    InterferenceWeights weights;
    StructMatrices sm;
    MatR d_preamble;   // (M*N_T) x preamble_len known OQAM training
    MatC c_preamble;   // its pseudo-symbols
    MatC x_preamble;   // M x 1 known OFDM training symbol
    double amplitude = 0.0;
};

ScenarioContext make_context(const Scenario& scn);

TrialMetrics run_trial(const Scenario& scn, const ScenarioContext& ctx, double snr_db,
                       std::uint64_t trial_seed);

/// Monte Carlo over snr_grid x trials; deterministic for a fixed scenario/seed
/// regardless of the worker count (threads = 0 picks the hardware count).
std::vector<ResultRow> run_scenario(const Scenario& scn, int threads = 0);

void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Histogram of Im{C} over `frames` random payload frames; written as
/// bin_center,density rows.
Histogram emit_histogram(const Scenario& scn, int bins, int frames);
void write_histogram_csv(const std::string& path, const Histogram& h);

}  // namespace fbmc

#endif
