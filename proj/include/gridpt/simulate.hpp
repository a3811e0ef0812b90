#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridpt/rng.hpp"
#include "gridpt/system_matrices.hpp"

namespace gridpt {

enum class PanelMode { phasor, magnitude };

inline std::string panel_mode_name(PanelMode m) {
    return m == PanelMode::phasor ? "phasor" : "magnitude";
}

inline PanelMode panel_mode_from_name(const std::string& s) {
    if (s == "phasor") return PanelMode::phasor;
    if (s == "magnitude") return PanelMode::magnitude;
    throw Error("bad_argument", "unknown panel mode \"" + s + "\"");
}

inline std::string channel_name(int node, Phase p) {
    return std::to_string(node) + "_" + std::string(1, phase_char(p));
}

// Injection fluctuation statistics. Fluctuations are complex with independent
// real and imaginary parts, each zero-mean Gaussian with covariance Sigma/2
// where Sigma = s2 * ((1-eps) I + eps 11') across channels; node_variance
// entries replace s2 for all channels of that node. `base` adds a constant
// per-channel injection (needed for magnitude readouts to have a carrier).
struct InjectionSpec {
    double s2 = 1e-4;
    double epsilon = 0.0;
    std::vector<cplx> base;               // empty, or one entry per reduced channel
    std::map<int, double> node_variance;  // node id -> variance override
    std::string distribution = "gaussian"; // recorded so heavier tails can slot in later

    void validate(int channels) const {
        if (distribution != "gaussian")
            throw Error("bad_argument",
                        "unsupported injection distribution \"" + distribution + "\"");
        if (!(s2 > 0.0)) throw Error("bad_argument", "injection variance must be positive");
        if (epsilon < 0.0 || epsilon >= 1.0)
            throw Error("bad_argument", "epsilon must lie in [0, 1)");
        if (!base.empty() && static_cast<int>(base.size()) != channels)
            throw Error("bad_argument", "base injection vector has wrong length");
        for (const auto& [node, v] : node_variance)
            if (!(v > 0.0))
                throw Error("bad_argument",
                            "variance override for node " + std::to_string(node) +
                                " must be positive");
    }
};

struct NoiseSpec {
    double level = 0.0; // noise variance as a fraction of each channel's variance
    std::uint64_t seed = 0;
};

// Sample panel over the reduced channels, row-major samples x channels.
// Phasor panels live in `cdata`, magnitude panels in `rdata`.
struct Panel {
    PanelMode mode = PanelMode::phasor;
    std::vector<std::pair<int, Phase>> channels;
    int samples = 0;
    double rate_hz = 120.0;
    std::vector<cplx> cdata;
    std::vector<double> rdata;

    // provenance, echoed into the sidecar
    std::uint64_t seed = 0;
    double s2 = 0.0;
    double epsilon = 0.0;
    double noise_level = 0.0;
    std::string distribution = "gaussian";

    int width() const { return static_cast<int>(channels.size()); }

    cplx& cat(int t, int ch) { return cdata[static_cast<std::size_t>(t) * channels.size() + static_cast<std::size_t>(ch)]; }
    const cplx& cat(int t, int ch) const { return cdata[static_cast<std::size_t>(t) * channels.size() + static_cast<std::size_t>(ch)]; }
    double& rat(int t, int ch) { return rdata[static_cast<std::size_t>(t) * channels.size() + static_cast<std::size_t>(ch)]; }
    const double& rat(int t, int ch) const { return rdata[static_cast<std::size_t>(t) * channels.size() + static_cast<std::size_t>(ch)]; }
};

using InjectionPanel = Panel;
using VoltagePanel = Panel;

// Unit-magnitude base injection per channel, rotated to its phase's nominal
// angle (0, -120, +120 degrees).
inline std::vector<cplx> default_base(const BlockIndex& reduced) {
    const cplx rot[3] = {cplx(1.0, 0.0), cplx(-0.5, -0.86602540378443864676),
                         cplx(-0.5, 0.86602540378443864676)};
    std::vector<cplx> base(static_cast<std::size_t>(reduced.total));
    for (int ch = 0; ch < reduced.total; ++ch)
        base[static_cast<std::size_t>(ch)] =
            rot[static_cast<int>(reduced.channels[static_cast<std::size_t>(ch)].second)];
    return base;
}

// Draws T injection samples. Per sample the draw order is: one standard
// normal per channel for the real parts, one shared real factor, then the
// same for the imaginary parts; the shared factor carries the cross-channel
// correlation epsilon. A seed therefore fully determines the panel.
inline InjectionPanel sample_injections(const BlockIndex& reduced, const InjectionSpec& spec,
                                        int samples, std::uint64_t seed) {
    if (samples < 1) throw Error("bad_argument", "sample count must be positive");
    spec.validate(reduced.total);
    const int C = reduced.total;

    std::vector<double> w(static_cast<std::size_t>(C)); // per-channel std of each part
    for (int ch = 0; ch < C; ++ch) {
        int node = reduced.channels[static_cast<std::size_t>(ch)].first;
        auto it = spec.node_variance.find(node);
        double v = (it != spec.node_variance.end()) ? it->second : spec.s2;
        w[static_cast<std::size_t>(ch)] = std::sqrt(v / 2.0);
    }
    double a = std::sqrt(1.0 - spec.epsilon);
    double b = std::sqrt(spec.epsilon);

    InjectionPanel p;
    p.mode = PanelMode::phasor;
    p.channels = reduced.channels;
    p.samples = samples;
    p.seed = seed;
    p.s2 = spec.s2;
    p.epsilon = spec.epsilon;
    p.distribution = spec.distribution;
    p.cdata.resize(static_cast<std::size_t>(samples) * static_cast<std::size_t>(C));

    Rng rng(seed);
    std::vector<double> re(static_cast<std::size_t>(C)), im(static_cast<std::size_t>(C));
    for (int t = 0; t < samples; ++t) {
        for (int ch = 0; ch < C; ++ch) re[static_cast<std::size_t>(ch)] = rng.normal();
        double hre = rng.normal();
        for (int ch = 0; ch < C; ++ch) im[static_cast<std::size_t>(ch)] = rng.normal();
        double him = rng.normal();
        for (int ch = 0; ch < C; ++ch) {
            double s = w[static_cast<std::size_t>(ch)];
            cplx x(s * (a * re[static_cast<std::size_t>(ch)] + b * hre),
                   s * (a * im[static_cast<std::size_t>(ch)] + b * him));
            if (!spec.base.empty()) x += spec.base[static_cast<std::size_t>(ch)];
            p.cat(t, ch) = x;
        }
    }
    return p;
}

// v = Z i per sample. Z is the reduced impedance over the same channel
// layout. Split real/imaginary kernel; this is one of the two hot loops.
inline VoltagePanel voltages_from_injections(const CMat& z_red, const InjectionPanel& inj) {
    const int C = inj.width();
    if (z_red.rows() != static_cast<std::size_t>(C) || z_red.cols() != static_cast<std::size_t>(C))
        throw Error("shape_mismatch", "impedance size does not match injection channels");
    std::vector<double> zr(static_cast<std::size_t>(C) * static_cast<std::size_t>(C));
    std::vector<double> zi(zr.size());
    for (int r = 0; r < C; ++r)
        for (int c = 0; c < C; ++c) {
            zr[static_cast<std::size_t>(r) * C + c] = z_red(static_cast<std::size_t>(r), static_cast<std::size_t>(c)).real();
            zi[static_cast<std::size_t>(r) * C + c] = z_red(static_cast<std::size_t>(r), static_cast<std::size_t>(c)).imag();
        }

    VoltagePanel v = inj;
    for (int t = 0; t < inj.samples; ++t) {
        const cplx* row = &inj.cdata[static_cast<std::size_t>(t) * static_cast<std::size_t>(C)];
        cplx* out = &v.cdata[static_cast<std::size_t>(t) * static_cast<std::size_t>(C)];
        for (int r = 0; r < C; ++r) {
            const double* zrr = &zr[static_cast<std::size_t>(r) * C];
            const double* zir = &zi[static_cast<std::size_t>(r) * C];
            double sre = 0.0, sim = 0.0;
            for (int c = 0; c < C; ++c) {
                double ir = row[c].real(), ii = row[c].imag();
                sre += zrr[c] * ir - zir[c] * ii;
                sim += zrr[c] * ii + zir[c] * ir;
            }
            out[r] = cplx(sre, sim);
        }
    }
    return v;
}

// Magnitude readout of a phasor panel.
inline Panel to_magnitudes(const Panel& p) {
    if (p.mode != PanelMode::phasor)
        throw Error("bad_argument", "panel is already a magnitude panel");
    Panel out = p;
    out.mode = PanelMode::magnitude;
    out.rdata.resize(p.cdata.size());
    for (std::size_t k = 0; k < p.cdata.size(); ++k) out.rdata[k] = std::abs(p.cdata[k]);
    out.cdata.clear();
    return out;
}

namespace detail {

inline std::vector<double> channel_variances(const Panel& p) {
    const int C = p.width();
    std::vector<double> var(static_cast<std::size_t>(C), 0.0);
    if (p.samples < 2) return var;
    for (int ch = 0; ch < C; ++ch) {
        if (p.mode == PanelMode::phasor) {
            cplx mean{};
            for (int t = 0; t < p.samples; ++t) mean += p.cat(t, ch);
            mean /= static_cast<double>(p.samples);
            double s = 0.0;
            for (int t = 0; t < p.samples; ++t) {
                cplx d = p.cat(t, ch) - mean;
                s += d.real() * d.real() + d.imag() * d.imag();
            }
            var[static_cast<std::size_t>(ch)] = s / (p.samples - 1);
        } else {
            double mean = 0.0;
            for (int t = 0; t < p.samples; ++t) mean += p.rat(t, ch);
            mean /= p.samples;
            double s = 0.0;
            for (int t = 0; t < p.samples; ++t) {
                double d = p.rat(t, ch) - mean;
                s += d * d;
            }
            var[static_cast<std::size_t>(ch)] = s / (p.samples - 1);
        }
    }
    return var;
}

} // namespace detail

// Additive measurement noise, variance = level x empirical variance of the
// channel. Complex circular on phasor panels, real on magnitude panels.
// Noise draws run channel by channel so panels of different width never share
// a stream. A channel with zero empirical variance cannot be scaled this way
// and is reported as an error.
inline Panel add_noise(const Panel& p, const NoiseSpec& noise) {
    Panel out = p;
    out.noise_level = noise.level;
    if (noise.level == 0.0) return out;
    if (noise.level < 0.0) throw Error("bad_argument", "noise level must be non-negative");

    std::vector<double> var = detail::channel_variances(p);
    for (int ch = 0; ch < p.width(); ++ch)
        if (var[static_cast<std::size_t>(ch)] <= 0.0)
            throw Error("zero_variance_channel",
                        "cannot scale noise to zero-variance channel " +
                            channel_name(p.channels[static_cast<std::size_t>(ch)].first,
                                         p.channels[static_cast<std::size_t>(ch)].second));

    Rng rng(noise.seed);
    for (int ch = 0; ch < p.width(); ++ch) {
        double sd = std::sqrt(noise.level * var[static_cast<std::size_t>(ch)]);
        if (p.mode == PanelMode::phasor) {
            double part = sd / std::sqrt(2.0);
            for (int t = 0; t < p.samples; ++t)
                out.cat(t, ch) += cplx(part * rng.normal(), part * rng.normal());
        } else {
            for (int t = 0; t < p.samples; ++t) out.rat(t, ch) += sd * rng.normal();
        }
    }
    return out;
}

// One-call pipeline: injections -> voltages -> optional magnitude readout ->
// noise. Stream seeds are derived from `seed` (index 0 injections, 1 noise).
inline Panel simulate_panel(const CMat& z_red, const BlockIndex& reduced, const InjectionSpec& spec,
                            int samples, std::uint64_t seed, PanelMode mode, double noise_level) {
    InjectionPanel inj = sample_injections(reduced, spec, samples, derive_seed(seed, 0));
    Panel v = voltages_from_injections(z_red, inj);
    if (mode == PanelMode::magnitude) v = to_magnitudes(v);
    NoiseSpec ns;
    ns.level = noise_level;
    ns.seed = derive_seed(seed, 1);
    v = add_noise(v, ns);
    v.seed = seed;
    return v;
}

inline Panel simulate_panel(const RadialNetwork& net, const InjectionSpec& spec, int samples,
                            std::uint64_t seed, PanelMode mode, double noise_level) {
    require_valid(net);
    Rooted tree = Rooted::build(net);
    BlockIndex red = BlockIndex::reduced(net);
    CMat z = impedance_by_paths(net, tree, red);
    return simulate_panel(z, red, spec, samples, seed, mode, noise_level);
}

} // namespace gridpt
