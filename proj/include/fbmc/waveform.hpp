#ifndef FBMC_WAVEFORM_HPP
#define FBMC_WAVEFORM_HPP

#include "fbmc/prototype.hpp"
#include "fbmc/types.hpp"

namespace fbmc {

/// Frame/link configuration shared by the waveform chain and the harness.
struct ModulationConfig {
    int constellation_order = 4;  // Q^2; 4 = QPSK
    int num_subcarriers = 32;     // M
    int num_fbmc_symbols = 106;   // N, even (two FBMC symbols per OFDM symbol)
    int n_tx = 1;
    int n_rx = 2;
    int preamble_len = 2;  // FBMC symbol slots reserved for training

    void validate() const;
};

/// PAM amplitude of the OQAM reals for a unit-energy Q^2-QAM constellation.
double oqam_amplitude(int constellation_order);

/// OQAM staggering: each QAM symbol's real/imag parts occupy two consecutive
/// FBMC slots. M x (N/2) QAM -> M x N real.
MatR qam_to_oqam(const MatC& qam);
MatC oqam_to_qam(const MatR& d);

/// SFB output s(l) = sum_{m,n} d_{m,n} g_{m,n}(l); length (N-1)*M/2 + L_g.
VecC sfb_modulate(const MatR& D, const PrototypeFilter& g);

/// AFB matched-filter outputs y_{p,q} = <r, g_{p,q}> at all M x N FT points.
/// Rejects signals shorter than (N-1)*M/2 + L_g.
MatC afb_demodulate(const VecC& signal, const PrototypeFilter& g, int M, int N);

/// CP-OFDM chain with unitary DFT scaling. Rejects cp_len >= M or cp_len < 0.
VecC ofdm_modulate(const MatC& qam, int cp_len);
MatC ofdm_demodulate(const VecC& signal, int M, int cp_len, int n_sym);

}  // namespace fbmc

#endif
