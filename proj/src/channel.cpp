#include "fbmc/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbmc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

VecC dft_bins(const VecC& h, int M) {
    VecC H(M);
    for (int p = 0; p < M; ++p) {
        cplx acc(0.0, 0.0);
        for (Eigen::Index k = 0; k < h.size(); ++k) {
            const double ph = -kTwoPi * p * k / M;
            acc += h[k] * cplx(std::cos(ph), std::sin(ph));
        }
        H[p] = acc;
    }
    return H;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace

ChannelProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel profile: " + path);
    ChannelProfile prof;
    int declared_len = -1;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "name") {
            prof.name = val;
        } else if (key == "L_h") {
            declared_len = std::stoi(val);
        } else if (key == "tap_powers") {
            std::vector<double> p;
            std::istringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) p.push_back(std::stod(trim(tok)));
            prof.tap_powers = Eigen::Map<VecR>(p.data(), p.size());
        } else {
            throw std::runtime_error("channel profile: unknown key '" + key + "'");
        }
    }
    if (prof.tap_powers.size() == 0) throw std::runtime_error("channel profile: tap_powers missing");
    if (declared_len >= 0 && declared_len != prof.length())
        throw std::runtime_error("channel profile: L_h does not match tap_powers length");
    if (prof.tap_powers.minCoeff() < 0.0) throw std::runtime_error("channel profile: negative tap power");
    prof.tap_powers /= prof.tap_powers.sum();
    return prof;
}

ChannelProfile exponential_profile(const std::string& name, int L_h, double tau) {
    ChannelProfile prof;
    prof.name = name;
    prof.tap_powers.resize(L_h);
    for (int k = 0; k < L_h; ++k) prof.tap_powers[k] = std::exp(-k / tau);
    prof.tap_powers /= prof.tap_powers.sum();
    return prof;
}

MatC ChannelSet::factor() const {
    MatC Hm(n_rx, static_cast<Eigen::Index>(M) * n_tx);
    for (int r = 0; r < n_rx; ++r)
        for (int t = 0; t < n_tx; ++t)
            Hm.row(r).segment(static_cast<Eigen::Index>(t) * M, M) = Hf[r][t].transpose();
    return Hm;
}

ChannelSet draw_channel(const ChannelProfile& profile, int n_tx, int n_rx, int M, std::uint64_t seed) {
    if (profile.length() < 1) throw std::invalid_argument("draw_channel: empty profile");
    ChannelSet ch;
    ch.n_rx = n_rx;
    ch.n_tx = n_tx;
    ch.M = M;
    ch.h.assign(n_rx, std::vector<VecC>(n_tx));
    ch.Hf.assign(n_rx, std::vector<VecC>(n_tx));
    GaussianRng rng(seed);
    const int Lh = profile.length();
    for (int r = 0; r < n_rx; ++r)
        for (int t = 0; t < n_tx; ++t) {
            VecC h(Lh);
            for (int k = 0; k < Lh; ++k) h[k] = std::sqrt(profile.tap_powers[k]) * rng.cnormal();
            ch.h[r][t] = h;
            ch.Hf[r][t] = dft_bins(h, M);
        }
    return ch;
}

std::vector<VecC> apply_channel(const std::vector<VecC>& s_per_tx, const ChannelSet& ch, const NoiseSpec& noise) {
    if (static_cast<int>(s_per_tx.size()) != ch.n_tx)
        throw std::invalid_argument("apply_channel: transmit stream count mismatch");
    if (noise.sigma2 < 0.0) throw std::invalid_argument("apply_channel: negative noise variance");
    const Eigen::Index in_len = s_per_tx[0].size();
    const int Lh = static_cast<int>(ch.h[0][0].size());
    const Eigen::Index out_len = in_len + Lh - 1;

    GaussianRng rng(noise.seed);
    std::vector<VecC> out(ch.n_rx);
    const double nstd = std::sqrt(noise.sigma2);
    for (int r = 0; r < ch.n_rx; ++r) {
        VecC y = VecC::Zero(out_len);
        for (int t = 0; t < ch.n_tx; ++t) {
            const VecC& s = s_per_tx[t];
            const VecC& h = ch.h[r][t];
            for (int k = 0; k < Lh; ++k) {
                if (h[k] == cplx(0.0, 0.0)) continue;
                y.segment(k, in_len) += h[k] * s;
            }
        }
        if (noise.sigma2 > 0.0)
            for (Eigen::Index l = 0; l < out_len; ++l) y[l] += nstd * rng.cnormal();
        out[r] = std::move(y);
    }
    return out;
}

double snr_to_sigma2(double snr_db, double signal_power) {
    if (signal_power <= 0.0) throw std::invalid_argument("snr_to_sigma2: signal power must be positive");
    return signal_power / std::pow(10.0, snr_db / 10.0);
}

}  // namespace fbmc
