#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gridpt/io.hpp"
#include "gridpt/metrics.hpp"
#include "gridpt/random_network.hpp"
#include "gridpt/recover.hpp"

namespace gridpt {

enum class Variant { joint, phase, topology };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::joint: return "joint";
        case Variant::phase: return "phase";
        default: return "topology";
    }
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "joint") return Variant::joint;
    if (s == "phase") return Variant::phase;
    if (s == "topology") return Variant::topology;
    throw Error("bad_argument", "unknown variant \"" + s + "\"");
}

struct RandomNetSpec {
    int n3 = 13;
    int n2 = 0;
    int n1 = 0;
    ImpedanceParams impedance;
};

// Where trials get their network: an in-memory fixture, a JSON file, or a
// fresh random feeder (drawn once per run from the run's master seed).
struct NetworkSource {
    std::optional<RadialNetwork> fixed;
    std::optional<std::string> file;
    std::optional<RandomNetSpec> random;

    RadialNetwork resolve(std::uint64_t seed) const {
        if (fixed) return *fixed;
        if (file) return load_network(*file);
        if (random)
            return random_radial(random->n3, random->n2, random->n1, random->impedance, seed);
        throw Error("bad_argument", "no network source configured");
    }
};

struct TrialConfig {
    NetworkSource source;
    int samples = 7200;
    double noise = 0.0;
    double epsilon = 0.0;
    double s2 = 1e-4;
    PanelMode mode = PanelMode::phasor;
    Variant variant = Variant::joint;
    int trials = 30;
    std::uint64_t seed = 1;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    double topology_error = 0.0;
    double phase_error = 0.0;
    double wall_s = 0.0; // recovery stage only, simulation excluded
};

struct TrialReport {
    RadialNetwork net;
    std::vector<TrialOutcome> trials;

    double mean_topology_error() const {
        double s = 0.0;
        for (const auto& t : trials) s += t.topology_error;
        return trials.empty() ? 0.0 : s / static_cast<double>(trials.size());
    }
    double mean_phase_error() const {
        double s = 0.0;
        for (const auto& t : trials) s += t.phase_error;
        return trials.empty() ? 0.0 : s / static_cast<double>(trials.size());
    }
    double median_wall_s() const {
        if (trials.empty()) return 0.0;
        std::vector<double> w;
        for (const auto& t : trials) w.push_back(t.wall_s);
        std::sort(w.begin(), w.end());
        std::size_t m = w.size() / 2;
        return (w.size() % 2) ? w[m] : 0.5 * (w[m - 1] + w[m]);
    }
};

// Repeated simulate-and-recover runs. The network is resolved once from
// sub-seed 0 of the config seed; trial t draws its panel from sub-seed 1+t,
// so any single trial can be reproduced from (seed, t) alone.
inline TrialReport run_trials(const TrialConfig& cfg) {
    if (cfg.trials < 1) throw Error("bad_argument", "trial count must be positive");
    TrialReport rep;
    rep.net = cfg.source.resolve(derive_seed(cfg.seed, 0));
    require_valid(rep.net);

    Rooted tree = Rooted::build(rep.net);
    BlockIndex red = BlockIndex::reduced(rep.net);
    CMat z = impedance_by_paths(rep.net, tree, red);

    InjectionSpec spec;
    spec.s2 = cfg.s2;
    spec.epsilon = cfg.epsilon;
    spec.base = default_base(red); // harmless for phasor stats, required for magnitudes

    auto truth_labels = canonical_slot_phases(rep.net);
    std::vector<std::pair<int, int>> truth_edges;
    for (const auto& e : rep.net.edges) truth_edges.push_back({e.from, e.to});

    for (int t = 0; t < cfg.trials; ++t) {
        std::uint64_t tseed = derive_seed(cfg.seed, 1 + static_cast<std::uint64_t>(t));
        Panel panel = simulate_panel(z, red, spec, cfg.samples, tseed, cfg.mode, cfg.noise);

        auto t0 = std::chrono::steady_clock::now();
        RecoveryResult res;
        switch (cfg.variant) {
            case Variant::joint:
                res = recover_panel(panel, rep.net.reference);
                break;
            case Variant::phase: {
                CovTable table = cov_from_panel(panel, rep.net.reference);
                res = phase_id_known_topology(table, truth_edges, rep.net.reference);
                break;
            }
            case Variant::topology: {
                CovTable table = cov_from_panel(panel, rep.net.reference);
                res = topology_known_phases(table, truth_labels, rep.net.reference);
                break;
            }
        }
        auto t1 = std::chrono::steady_clock::now();

        TrialOutcome out;
        out.seed = tseed;
        out.wall_s = std::chrono::duration<double>(t1 - t0).count();
        out.topology_error = topology_error(res.edges, rep.net).error;
        out.phase_error =
            phase_error(res.phases, truth_labels, rep.net.reference).error;
        rep.trials.push_back(out);
    }
    return rep;
}

// Parameter grid; empty dimensions fall back to the base config's value.
struct SweepGrid {
    std::vector<int> samples;
    std::vector<double> noise;
    std::vector<double> epsilon;
    std::vector<PanelMode> modes;
};

struct SweepOptions {
    bool timings = false; // wall_s column stays 0 unless enabled, keeping output reproducible
};

struct SweepCell {
    int samples;
    double noise;
    double epsilon;
    PanelMode mode;
    TrialReport report;
};

// Runs the full grid, streaming one CSV row per trial. Cell k derives its
// seed as sub-seed k of the base seed; a one-cell sweep therefore reproduces
// run_trials with seed derive_seed(base, 0).
inline std::vector<SweepCell> sweep(const TrialConfig& base, const SweepGrid& grid,
                                    std::ostream& out, const SweepOptions& opt = {}) {
    auto samples = grid.samples.empty() ? std::vector<int>{base.samples} : grid.samples;
    auto noise = grid.noise.empty() ? std::vector<double>{base.noise} : grid.noise;
    auto epsilon = grid.epsilon.empty() ? std::vector<double>{base.epsilon} : grid.epsilon;
    auto modes = grid.modes.empty() ? std::vector<PanelMode>{base.mode} : grid.modes;

    out << "samples,noise,epsilon,mode,variant,trial,seed,topology_error,phase_error,wall_s\n";
    std::vector<SweepCell> cells;
    std::uint64_t cell_index = 0;
    for (int s : samples) {
        for (double nl : noise) {
            for (double ep : epsilon) {
                for (PanelMode md : modes) {
                    TrialConfig cfg = base;
                    cfg.samples = s;
                    cfg.noise = nl;
                    cfg.epsilon = ep;
                    cfg.mode = md;
                    cfg.seed = derive_seed(base.seed, cell_index);
                    SweepCell cell{s, nl, ep, md, run_trials(cfg)};
                    for (std::size_t t = 0; t < cell.report.trials.size(); ++t) {
                        const auto& tr = cell.report.trials[t];
                        out << s << ',' << fmt_double(nl) << ',' << fmt_double(ep) << ','
                            << panel_mode_name(md) << ',' << variant_name(base.variant) << ',' << t
                            << ',' << tr.seed << ',' << fmt_double(tr.topology_error) << ','
                            << fmt_double(tr.phase_error) << ','
                            << fmt_double(opt.timings ? tr.wall_s : 0.0) << "\n";
                    }
                    cells.push_back(std::move(cell));
                    ++cell_index;
                }
            }
        }
    }
    return cells;
}

} // namespace gridpt
