#include "fbmc/prototype.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbmc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

VecR freq_sampling_taps(int M, int K, const std::vector<double>& P) {
    const int L = K * M;
    VecR g(L);
    for (int l = 0; l < L; ++l) {
        double v = P[0];
        for (int k = 1; k < K; ++k) {
            const double sgn = (k % 2) ? -1.0 : 1.0;
            v += 2.0 * sgn * P[k] * std::cos(kTwoPi * k * (l + 1) / double(L + 1));
        }
        g[l] = v;
    }
    return g / g.norm();
}

// Cross-ambiguity sample J(dm,dn) = <g_{p+dm,q+dn}, g_{p,q}> as a bilinear form
// in the taps; value and tap-gradient in O(L).
struct CouplingOp {
    int off = 0;  // dn * M/2
    VecC w;       // phase profile on the center-pulse support

    CouplingOp(int M, int K, int dm, int dn) {
        const int L = K * M;
        off = dn * M / 2;
        const int p = 2, q = 2 * K;
        const int m = p + dm, n = q + dn;
        const double c = (L - 1) / 2.0;
        const double dphi = (m + n - p - q) * M_PI / 2.0 + double(m) * n * M_PI - double(p) * q * M_PI;
        w.resize(L);
        for (int x = 0; x < L; ++x) {
            const double ph = kTwoPi / M * dm * (x + q * M / 2.0 - c) + dphi;
            w[x] = cplx(std::cos(ph), std::sin(ph));
        }
    }

    cplx value(const VecR& g) const {
        const int L = static_cast<int>(g.size());
        const int lo = std::max(0, off), hi = std::min(L, L + off);
        cplx acc(0.0, 0.0);
        for (int x = lo; x < hi; ++x) acc += g[x] * g[x - off] * w[x];
        return acc;
    }

    VecC grad(const VecR& g) const {
        const int L = static_cast<int>(g.size());
        const int lo = std::max(0, off), hi = std::min(L, L + off);
        VecC gr = VecC::Zero(L);
        for (int x = lo; x < hi; ++x) {
            gr[x] += g[x - off] * w[x];
            gr[x - off] += g[x] * w[x];
        }
        return gr;
    }
};

int canon_dm(int dm, int M) {
    int d = ((dm % M) + M) % M;
    if (d > M / 2) d -= M;
    return d;
}

std::vector<std::pair<int, int>> junk_positions(int M, int K) {
    std::vector<std::pair<int, int>> pos;
    for (int dm = -M / 2 + 1; dm <= M / 2; ++dm) {
        for (int dn = -(2 * K - 1); dn <= 2 * K - 1; ++dn) {
            if (canon_dm(dm, M) != dm) continue;  // canonical representatives only
            if (dm == 0 && dn == 0) continue;
            if (std::abs(dm) <= 1 && std::abs(dn) <= 1) continue;
            pos.emplace_back(dm, dn);
        }
    }
    return pos;
}

// Orthogonality constraints: per polyphase pair (k, k+M/2) the even-lag
// autocorrelations vanish; lag-0 constants equal across pairs; unit energy.
// Only pairs not implied by tap symmetry are included.
void pair_constraints(const VecR& g, int M, int K, VecR& cons, MatR& jac) {
    const int L = K * M;
    const int half = M / 2;
    const int npairs = (half + 1) / 2;
    const int nc = npairs * (K - 1) + (npairs - 1) + 1;
    cons.resize(nc);
    jac.setZero(nc, L);
    int row = 0;
    for (int k = 0; k < npairs; ++k) {
        for (int u = 1; u < K; ++u) {
            double s = 0.0;
            for (int l = 0; l + u < K; ++l) {
                const int a0 = k + l * M, a1 = k + (l + u) * M;
                const int b0 = k + half + l * M, b1 = k + half + (l + u) * M;
                s += g[a0] * g[a1] + g[b0] * g[b1];
                jac(row, a0) += g[a1];
                jac(row, a1) += g[a0];
                jac(row, b0) += g[b1];
                jac(row, b1) += g[b0];
            }
            cons[row++] = s;
        }
    }
    auto lag0 = [&](int k, int sign, int r) {
        double s = 0.0;
        for (int l = 0; l < K; ++l) {
            const int a = k + l * M, b = k + half + l * M;
            s += g[a] * g[a] + g[b] * g[b];
            jac(r, a) += sign * 2.0 * g[a];
            jac(r, b) += sign * 2.0 * g[b];
        }
        return sign * s;
    };
    for (int k = 1; k < npairs; ++k) {
        cons[row] = lag0(k, +1, row) + lag0(0, -1, row);
        ++row;
    }
    cons[row] = g.squaredNorm() - 1.0;
    jac.row(row) = 2.0 * g.transpose();
}

// Nearest-point projection of each polyphase pair onto the zero-even-lag
// manifold, mirrored pairs assigned by symmetry, lag-0 constants equalized.
VecR polish(VecR g, int M, int K) {
    const int L = K * M;
    const int half = M / 2;
    MatR poly(M, K);
    for (int k = 0; k < M; ++k)
        for (int u = 0; u < K; ++u) poly(k, u) = g[k + u * M];

    auto project_pair = [&](VecR& a, VecR& b) {
        VecR x(2 * K);
        x.head(K) = a;
        x.tail(K) = b;
        for (int it = 0; it < 100; ++it) {
            VecR s(K - 1);
            MatR J = MatR::Zero(K - 1, 2 * K);
            double worst = 0.0;
            for (int u = 1; u < K; ++u) {
                double v = 0.0;
                for (int l = 0; l + u < K; ++l) {
                    v += x[l] * x[l + u] + x[K + l] * x[K + l + u];
                    J(u - 1, l) += x[l + u];
                    J(u - 1, l + u) += x[l];
                    J(u - 1, K + l) += x[K + l + u];
                    J(u - 1, K + l + u) += x[K + l];
                }
                s[u - 1] = v;
                worst = std::max(worst, std::abs(v));
            }
            if (worst < 1e-16) break;
            x -= J.transpose() * (J * J.transpose()).ldlt().solve(s);
        }
        a = x.head(K);
        b = x.tail(K);
    };

    const int nfree = (half + 1) / 2;
    for (int k = 0; k < nfree; ++k) {
        const int km = half - 1 - k;
        VecR a = poly.row(k).transpose(), b = poly.row(k + half).transpose();
        project_pair(a, b);
        poly.row(k) = a.transpose();
        poly.row(k + half) = b.transpose();
        if (km != k) {
            poly.row(M - 1 - k) = a.reverse().transpose();
            poly.row(km) = b.reverse().transpose();
        }
    }
    VecR t(half);
    for (int k = 0; k < half; ++k)
        t[k] = poly.row(k).squaredNorm() + poly.row(k + half).squaredNorm();
    const double tm = t.mean();
    for (int k = 0; k < half; ++k) {
        const double sc = std::sqrt(tm / t[k]);
        poly.row(k) *= sc;
        poly.row(k + half) *= sc;
    }
    VecR out(L);
    for (int k = 0; k < M; ++k)
        for (int u = 0; u < K; ++u) out[k + u * M] = poly(k, u);
    return out / out.norm();
}

// First-order targets: ordered weights near the confinement optimum.
struct FirstOrderTarget {
    int dm, dn;
    double value;
};
const FirstOrderTarget kTargets[] = {
    {1, 0, 0.401}, {-1, 0, -0.401}, {0, 1, 0.416}, {0, -1, -0.416},
    {1, 1, 0.288}, {1, -1, 0.288},  {-1, 1, 0.288}, {-1, -1, 0.288},
};

}  // namespace

double ambient_phase(int m, int n) {
    double phi = std::fmod((m + n) * (M_PI / 2.0) + double(m) * n * M_PI, kTwoPi);
    if (phi < 0) phi += kTwoPi;
    return phi;
}

VecC modulated_pulse(const PrototypeFilter& g, int m, int n) {
    const int L = g.length();
    const int M = g.num_subcarriers;
    const double c = (L - 1) / 2.0;
    const double phi = ambient_phase(m, n);
    const Eigen::Index start = static_cast<Eigen::Index>(n) * M / 2;
    VecC out(L);
    for (int x = 0; x < L; ++x) {
        const double ph = kTwoPi / M * m * (start + x - c) + phi;
        out[x] = g.taps[x] * cplx(std::cos(ph), std::sin(ph));
    }
    return out;
}

cplx pulse_inner_product(const PrototypeFilter& g, int m, int n, int p, int q) {
    const int L = g.length();
    const int M = g.num_subcarriers;
    const long start_a = static_cast<long>(n) * M / 2;
    const long start_b = static_cast<long>(q) * M / 2;
    const long lo = std::max(start_a, start_b);
    const long hi = std::min(start_a + L, start_b + L);
    if (lo >= hi) return {0.0, 0.0};
    const VecC va = modulated_pulse(g, m, n);
    const VecC vb = modulated_pulse(g, p, q);
    cplx acc(0.0, 0.0);
    for (long l = lo; l < hi; ++l) acc += va[l - start_a] * std::conj(vb[l - start_b]);
    return acc;
}

const std::map<int, std::vector<double>>& default_prototype_coeffs() {
    static const std::map<int, std::vector<double>> table = [] {
        std::map<int, std::vector<double>> t;
        for (int K = 2; K <= 6; ++K) {
            std::vector<double> P(K);
            for (int k = 0; k < K; ++k) P[k] = std::exp(-0.55 * k * k);
            t[K] = P;
        }
        return t;
    }();
    return table;
}

std::map<int, std::vector<double>> load_prototype_coeffs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open prototype coefficient fixture: " + path);
    std::map<int, std::vector<double>> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const int K = std::stoi(line.substr(0, colon));
        std::istringstream rest(line.substr(colon + 1));
        std::vector<double> P;
        double v;
        while (rest >> v) P.push_back(v);
        if (static_cast<int>(P.size()) != K)
            throw std::runtime_error("fixture row for K=" + std::to_string(K) + " must list K coefficients");
        out[K] = std::move(P);
    }
    return out;
}

PrototypeFilter design_prototype(int M, int K) {
    const auto& table = default_prototype_coeffs();
    const auto it = table.find(K);
    if (it != table.end()) return design_prototype(M, K, it->second);
    std::vector<double> P(K);
    for (int k = 0; k < K; ++k) P[k] = std::exp(-0.55 * k * k);
    return design_prototype(M, K, P);
}

PrototypeFilter design_prototype(int M, int K, const std::vector<double>& fs_coeffs) {
    if (M < 4 || (M % 2) != 0)
        throw std::invalid_argument("design_prototype: M must be even and >= 4");
    if (K < 2) throw std::invalid_argument("design_prototype: K must be >= 2");
    if (static_cast<int>(fs_coeffs.size()) != K)
        throw std::invalid_argument("design_prototype: need K frequency-sampling coefficients");

    const int L = K * M;
    const int half = L / 2;
    VecR g = freq_sampling_taps(M, K, fs_coeffs);

    const auto jpos = junk_positions(M, K);
    std::vector<CouplingOp> jops;
    jops.reserve(jpos.size());
    for (auto [dm, dn] : jpos) jops.emplace_back(M, K, dm, dn);
    std::vector<CouplingOp> fops;
    std::vector<double> ftgt;
    for (const auto& t : kTargets) {
        fops.emplace_back(M, K, t.dm, t.dn);
        ftgt.push_back(t.value);
    }

    auto fold = [&](const VecR& full) {
        VecR h(half);
        for (int i = 0; i < half; ++i) h[i] = full[i] + full[L - 1 - i];
        return h;
    };

    // Sequential quadratic program over the symmetric tap half. pexp selects
    // the reweighting exponent for the residual-coupling spreading phases.
    auto sqp = [&](VecR g, int iters, int pexp, const std::vector<double>* freeze, double rho,
                   double trust) {
        const double wt = 0.5;
        for (int it = 0; it < iters; ++it) {
            const int nj = static_cast<int>(jops.size());
            const int nextra = freeze ? 0 : static_cast<int>(fops.size());
            VecR r(2 * nj + nextra);
            MatR Jr(2 * nj + nextra, half);
            for (int i = 0; i < nj; ++i) {
                const cplx v = jops[i].value(g);
                const VecC gr = jops[i].grad(g);
                const double w = std::pow(std::norm(v) + 1e-7, (pexp - 2) / 4.0);
                r[2 * i] = w * v.real();
                r[2 * i + 1] = w * v.imag();
                Jr.row(2 * i) = w * fold(gr.real()).transpose();
                Jr.row(2 * i + 1) = w * fold(gr.imag()).transpose();
            }
            if (!freeze) {
                for (size_t i = 0; i < fops.size(); ++i) {
                    const cplx v = fops[i].value(g);
                    const VecC gr = fops[i].grad(g);
                    r[2 * nj + i] = std::sqrt(wt) * (v.imag() - ftgt[i]);
                    Jr.row(2 * nj + i) = std::sqrt(wt) * fold(gr.imag()).transpose();
                }
            }
            VecR cons;
            MatR jac;
            pair_constraints(g, M, K, cons, jac);
            int nc = static_cast<int>(cons.size());
            const int nfr = freeze ? static_cast<int>(fops.size()) : 0;
            VecR call(nc + nfr);
            MatR Jcall(nc + nfr, half);
            call.head(nc) = cons;
            for (int i = 0; i < nc; ++i) Jcall.row(i) = fold(jac.row(i).transpose()).transpose();
            for (int i = 0; i < nfr; ++i) {
                const cplx v = fops[i].value(g);
                call[nc + i] = v.imag() - (*freeze)[i];
                Jcall.row(nc + i) = fold(fops[i].grad(g).imag()).transpose();
            }
            nc += nfr;

            const MatR H = Jr.transpose() * Jr + rho * MatR::Identity(half, half);
            const VecR f = Jr.transpose() * r;
            MatR KKT = MatR::Zero(half + nc, half + nc);
            KKT.topLeftCorner(half, half) = H;
            KKT.topRightCorner(half, nc) = Jcall.transpose();
            KKT.bottomLeftCorner(nc, half) = Jcall;
            VecR rhs(half + nc);
            rhs.head(half) = -f;
            rhs.tail(nc) = -call;
            const VecR sol = KKT.completeOrthogonalDecomposition().solve(rhs);
            VecR d = sol.head(half);
            const double nr = d.norm();
            if (nr > trust) d *= trust / nr;
            for (int i = 0; i < half; ++i) {
                g[i] += d[i];
                g[L - 1 - i] += d[i];
            }
            if (call.cwiseAbs().maxCoeff() < 1e-14 && nr < 1e-12) break;
        }
        return g;
    };

    g = sqp(g, 200, 2, nullptr, 1e-2, 0.05);
    std::vector<double> frozen(fops.size());
    for (size_t i = 0; i < fops.size(); ++i) frozen[i] = fops[i].value(g).imag();
    g = sqp(g, 150, 4, &frozen, 1e-3, 0.02);
    g = sqp(g, 200, 8, &frozen, 1e-3, 0.02);
    g = polish(g, M, K);

    PrototypeFilter out;
    out.taps = g;
    out.num_subcarriers = M;
    out.overlap_factor = K;

    for (int i = 0; i < half; ++i) {
        if (std::abs(g[i] - g[L - 1 - i]) > 1e-12)
            throw std::runtime_error("design_prototype: symmetry violated");
    }
    if (std::abs(g.squaredNorm() - 1.0) > 1e-12)
        throw std::runtime_error("design_prototype: unit energy violated");
    return out;
}

Eigen::Matrix3d InterferenceWeights::neighborhood(int p_parity) const {
    const double s = (p_parity >= 0) ? 1.0 : -1.0;
    auto clamp = [](double v) { return std::abs(v) < 1e-6 ? 0.0 : v; };
    const double b = clamp(beta), gm = clamp(gamma), dl = clamp(delta);
    Eigen::Matrix3d grid;
    grid << s * dl, -b, s * dl,
           -s * gm, 0.0, s * gm,
            s * dl,  b, s * dl;
    return grid;
}

InterferenceWeights compute_weights(const PrototypeFilter& g) {
    const int p = 2, q = 2;  // any interior reference; weights are translation invariant
    auto w = [&](int dm, int dn) { return pulse_inner_product(g, p + dm, q + dn, p, q); };

    cplx grid[3][3];
    double worst_re = 0.0;
    for (int dm = -1; dm <= 1; ++dm)
        for (int dn = -1; dn <= 1; ++dn) {
            grid[dm + 1][dn + 1] = w(dm, dn);
            if (dm || dn) worst_re = std::max(worst_re, std::abs(grid[dm + 1][dn + 1].real()));
        }
    if (worst_re > 1e-8)
        throw std::runtime_error("compute_weights: first-order couplings are not purely imaginary");

    InterferenceWeights out;
    out.beta = grid[2][1].imag();   // from (p+1, q)
    out.gamma = grid[1][2].imag();  // from (p, q+1), p even
    out.delta = grid[2][2].imag();  // corner (p+1, q+1)
    if (!(out.gamma > out.beta && out.beta > out.delta && out.delta > 0.0))
        throw std::runtime_error("compute_weights: weight ordering gamma > beta > delta > 0 violated");

    // sign/symmetry structure of the pattern (even-p reference)
    auto close = [](double a, double b) { return std::abs(a - b) < 1e-8; };
    if (!close(grid[0][1].imag(), -out.beta) || !close(grid[1][0].imag(), -out.gamma) ||
        !close(grid[0][0].imag(), out.delta) || !close(grid[0][2].imag(), out.delta) ||
        !close(grid[2][0].imag(), out.delta))
        throw std::runtime_error("compute_weights: neighborhood sign pattern violated");
    return out;
}

}  // namespace fbmc
