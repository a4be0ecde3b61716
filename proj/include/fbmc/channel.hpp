#ifndef FBMC_CHANNEL_HPP
#define FBMC_CHANNEL_HPP

#include <string>
#include <vector>

#include "fbmc/types.hpp"

namespace fbmc {

/// Power-delay profile; tap powers are normalized to unit total on load.
struct ChannelProfile {
    std::string name;
    VecR tap_powers;

    int length() const { return static_cast<int>(tap_powers.size()); }
};

/// Parse a profile fixture (key = value lines: name, L_h, tap_powers).
ChannelProfile load_profile(const std::string& path);

/// Exponentially decaying profile, tap k power ~ exp(-k/tau), unit total.
ChannelProfile exponential_profile(const std::string& name, int L_h, double tau);

struct NoiseSpec {
    double sigma2 = 0.0;  // variance per complex time sample
    std::uint64_t seed = 0;
};

/// Block-fading MIMO channel: impulse responses h[r][t] and their M-point
/// frequency responses H[r][t].
struct ChannelSet {
    int n_rx = 0, n_tx = 0, M = 0;
    std::vector<std::vector<VecC>> h;   // [r][t], length L_h
    std::vector<std::vector<VecC>> Hf;  // [r][t], length M

    /// CPD channel factor: N_R x (M*N_T), row r = [H^(r,1)^T ... H^(r,N_T)^T].
    MatC factor() const;
};

/// i.i.d. circularly-symmetric Gaussian taps, tap k variance = tap_powers[k].
ChannelSet draw_channel(const ChannelProfile& profile, int n_tx, int n_rx, int M, std::uint64_t seed);

/// r^(rx)(l) = sum_t (h^(rx,t) * s^(t))(l) + w^(rx)(l), w i.i.d. CN(0, sigma2),
/// independent across antennas. Output length = input length + L_h - 1.
std::vector<VecC> apply_channel(const std::vector<VecC>& s_per_tx, const ChannelSet& ch, const NoiseSpec& noise);

/// sigma2 = signal_power / 10^(snr_db/10); signal_power must be positive.
double snr_to_sigma2(double snr_db, double signal_power);

}  // namespace fbmc

#endif
