// Acceptance suite: one pass/fail line per numbered criterion, exit code is
// the number of failures. argv[1] is the CLI binary, argv[2] a scratch
// directory for the determinism checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gridpt/gridpt.hpp"

namespace fs = std::filesystem;
using namespace gridpt;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(int number, const std::string& name, const Criterion& c) {
    std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ")";
    std::cout << "\n" << std::flush;
    if (!c.pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

CMat eye(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// mixed-size corpus for the matrix identities, up to 40 nodes
std::vector<RadialNetwork> matrix_corpus(int count) {
    std::vector<RadialNetwork> nets;
    for (int k = 0; k < count; ++k) {
        int n3 = 2 + (k % 19);
        int n2 = (k * 3 + 1) % 7;
        int n1 = (k * 5 + 2) % 9;
        if (k % 10 == 9) {
            n3 = 21;
            n2 = 10;
            n1 = 9;
        }
        nets.push_back(random_radial(n3, n2, n1, ImpedanceParams{},
                                     derive_seed(101, static_cast<std::uint64_t>(k))));
    }
    return nets;
}

// feeders whose nodes at the voltage origin are all three phase; orderings
// against the origin's zero-covariance rows carry no phase information, so
// like the benchmark feeders the trunk head must be fully phased for labels
// to be identifiable
std::vector<RadialNetwork> sized_corpus(int n3, int n2, int n1, std::uint64_t tag, int want) {
    std::vector<RadialNetwork> nets;
    for (std::uint64_t k = 0; static_cast<int>(nets.size()) < want && k < 100000; ++k) {
        RadialNetwork net = random_radial(n3, n2, n1, ImpedanceParams{}, derive_seed(tag, k));
        bool head_ok = true;
        for (const auto& e : net.edges)
            if (e.from == net.reference &&
                net.node_phases[static_cast<std::size_t>(e.to)].size() != 3)
                head_ok = false;
        if (head_ok) nets.push_back(std::move(net));
    }
    return nets;
}

Criterion criterion_impedance_oracles(const std::vector<RadialNetwork>& nets, double* bta_worst) {
    Criterion c;
    auto t0 = std::chrono::steady_clock::now();
    double worst_rel = 0.0, worst_zy = 0.0;
    *bta_worst = 0.0;
    for (const auto& net : nets) {
        SystemMatrices sys = build_system(net);
        CMat zi = impedance_by_inverse(net);
        worst_rel = std::max(worst_rel, max_abs_diff(sys.z_red, zi) / max_abs(zi));
        worst_zy = std::max(worst_zy,
                            max_abs_diff(matmul(sys.z_red, sys.y_red), eye(sys.z_red.rows())));
        *bta_worst = std::max(
            *bta_worst, max_abs_diff(matmul(transpose(sys.b), sys.a_red), eye(sys.b.cols())));
    }
    double dt = seconds_since(t0);
    c.pass = worst_rel <= 1e-9 && worst_zy <= 1e-10 && dt < 10.0;
    c.detail = std::to_string(nets.size()) + " feeders, worst rel diff " + fmt(worst_rel) +
               ", worst ZY drift " + fmt(worst_zy) + ", " + fmt(dt) + "s";
    return c;
}

Criterion criterion_path_inverse_identity(std::size_t corpus_size, double bta_worst) {
    Criterion c;
    c.pass = bta_worst == 0.0;
    c.detail = "max |B'A - I| = " + fmt(bta_worst) + " over " + std::to_string(corpus_size) +
               " feeders";
    return c;
}

Criterion criterion_matching_argmax() {
    Criterion c;
    int feeders = 0, skipped = 0;
    long pairs = 0, violations = 0;
    for (std::uint64_t k = 0; feeders < 200 && k < 4000; ++k) {
        RadialNetwork net = random_radial(5, 3, 3, ImpedanceParams{}, derive_seed(103, k));
        if (!check_line_condition(net).holds) {
            ++skipped;
            continue;
        }
        ++feeders;
        CovTable t = analytic_cov(net, InjectionSpec{});
        for (int i = 0; i < net.n(); ++i) {
            for (int j = 0; j < net.n(); ++j) {
                if (i == j) continue;
                PhaseSet si = net.node_phases[static_cast<std::size_t>(i)];
                PhaseSet sj = net.node_phases[static_cast<std::size_t>(j)];
                if (!si.subset_of(sj)) continue;
                ++pairs;
                SlotMap truth = phase_identity_map(si, sj);
                MatchResult m = best_phase_match(t, i, j);
                if (phase_match_score(t, i, j, truth) != m.score) {
                    ++violations; // the true ordering must attain the maximum
                    continue;
                }
                // a shared path makes the maximum strict and unique
                if (m.score != 0.0 && (!(m.map == truth) || m.tie)) ++violations;
            }
        }
    }
    c.pass = feeders >= 200 && violations == 0;
    c.detail = std::to_string(feeders) + " feeders, " + std::to_string(pairs) + " pairs, " +
               std::to_string(violations) + " violations, " + std::to_string(skipped) +
               " failed the separation condition";
    return c;
}

Criterion criterion_distance_neighbors() {
    Criterion c;
    int feeders = 0;
    long nodes_checked = 0, violations = 0;
    for (std::uint64_t k = 0; feeders < 500; ++k) {
        RadialNetwork net = random_radial(6, 3, 3, ImpedanceParams{}, derive_seed(104, k));
        InjectionSpec spec;
        if (k % 2 == 1) {
            Rng r(derive_seed(204, k));
            for (int i = 1; i < net.n(); ++i)
                if (r.uniform01() < 0.5) spec.node_variance[i] = spec.s2 * r.uniform(0.5, 2.0);
        }
        PairScores ps = pairwise_scores(analytic_cov(net, spec));

        std::vector<std::set<int>> nbr(static_cast<std::size_t>(net.n()));
        for (const auto& e : net.edges) {
            nbr[static_cast<std::size_t>(e.from)].insert(e.to);
            nbr[static_cast<std::size_t>(e.to)].insert(e.from);
        }

        ++feeders;
        for (int i = 0; i < net.n(); ++i) {
            double best = 0.0;
            bool have = false;
            for (int j = 0; j < net.n(); ++j) {
                const auto& cell = ps.at(i, j);
                if (!cell) continue;
                if (!have || cell->d < best) {
                    best = cell->d;
                    have = true;
                }
            }
            if (!have) continue;
            ++nodes_checked;
            for (int j = 0; j < net.n(); ++j) {
                const auto& cell = ps.at(i, j);
                if (cell && cell->d == best && !nbr[static_cast<std::size_t>(i)].count(j))
                    ++violations;
            }
        }
    }
    c.pass = violations == 0;
    c.detail = std::to_string(feeders) + " feeders (half with variance overrides), " +
               std::to_string(nodes_checked) + " nodes, " + std::to_string(violations) +
               " non-neighbor minimizers";
    return c;
}

struct RecoveryCorpusStats {
    int clean_runs = 0, clean_failures = 0;
    int noisy_trials = 0, noisy_zero = 0;
    double noisy_error_sum = 0.0;
};

RecoveryCorpusStats run_recovery_corpus(const std::vector<RadialNetwork>& corpus) {
    RecoveryCorpusStats st;
    std::uint64_t idx = 0;
    for (const auto& net : corpus) {
        Rooted tree = Rooted::build(net);
        BlockIndex red = BlockIndex::reduced(net);
        CMat z = impedance_by_paths(net, tree, red);
        InjectionSpec spec;
        spec.base = default_base(red);
        auto truth = canonical_slot_phases(net);

        Panel clean = simulate_panel(z, red, spec, 7200, derive_seed(505, idx), PanelMode::phasor, 0.0);
        Panel mag = to_magnitudes(clean);

        for (const Panel* p : {&clean, &mag}) {
            RecoveryResult res = gpt(cov_from_panel(*p, net.reference), net.reference);
            ++st.clean_runs;
            if (topology_error(res.edges, net).error != 0.0 ||
                phase_error(res.phases, truth, net.reference).error != 0.0)
                ++st.clean_failures;
        }

        NoiseSpec np{0.001, derive_seed(606, idx)};
        NoiseSpec nm{0.001, derive_seed(607, idx)};
        for (const Panel& noisy : {add_noise(clean, np), add_noise(mag, nm)}) {
            RecoveryResult res = gpt(cov_from_panel(noisy, net.reference), net.reference);
            double err = topology_error(res.edges, net).error;
            ++st.noisy_trials;
            if (err == 0.0) ++st.noisy_zero;
            st.noisy_error_sum += err;
        }
        ++idx;
    }
    return st;
}

Criterion criterion_exact_recovery(const RecoveryCorpusStats& st) {
    Criterion c;
    c.pass = st.clean_runs >= 200 && st.clean_failures == 0;
    c.detail = std::to_string(st.clean_runs) + " noiseless runs across both readout modes, " +
               std::to_string(st.clean_failures) + " with any error";
    return c;
}

Criterion criterion_low_noise(const RecoveryCorpusStats& st) {
    Criterion c;
    double zero_frac =
        st.noisy_trials ? static_cast<double>(st.noisy_zero) / st.noisy_trials : 0.0;
    double mean = st.noisy_trials ? st.noisy_error_sum / st.noisy_trials : 1.0;
    c.pass = zero_frac >= 0.95 && mean <= 0.01;
    c.detail = std::to_string(st.noisy_trials) + " trials at noise 0.001, zero-error fraction " +
               fmt(zero_frac) + ", mean " + fmt(mean);
    return c;
}

Criterion criterion_noise_trend(const std::vector<RadialNetwork>& family) {
    Criterion c;
    double short_sum = 0.0, long_sum = 0.0;
    int trials = 0;
    std::uint64_t fk = 0;
    for (const auto& net : family) {
        TrialConfig cfg;
        cfg.source.fixed = net;
        cfg.noise = 10.0;
        cfg.trials = 40;
        cfg.seed = 707 + fk++;
        cfg.samples = 120;
        short_sum += run_trials(cfg).mean_topology_error() * cfg.trials;
        cfg.samples = 7200;
        long_sum += run_trials(cfg).mean_topology_error() * cfg.trials;
        trials += cfg.trials;
    }
    double short_mean = short_sum / trials, long_mean = long_sum / trials;
    c.pass = short_mean > long_mean;
    auto fmt9 = [](double v) {
        std::ostringstream s;
        s.precision(9);
        s << v;
        return s.str();
    };
    c.detail = "noise 10: mean topology error " + fmt9(short_mean) + " at T=120 vs " +
               fmt9(long_mean) + " at T=7200, " + std::to_string(trials) + " trials each";
    if (!c.pass) {
        if (std::abs(short_mean - long_mean) < 1e-9)
            c.detail += "; saturated: the noise floor inflates every variance distance, so the "
                        "same biased tree is recovered at either duration";
        else
            c.detail += "; the noise floor biases the variance distances themselves, and longer "
                        "panels only estimate the biased minimizer more precisely";
    }
    return c;
}

Criterion criterion_correlation_trend(const RadialNetwork& net) {
    Criterion c;
    const std::vector<double> eps = {0.0, 0.3, 0.6, 0.9};
    const int n = 40;
    std::vector<double> mean(eps.size()), sd(eps.size());
    for (std::size_t k = 0; k < eps.size(); ++k) {
        TrialConfig cfg;
        cfg.source.fixed = net;
        cfg.samples = 960;
        cfg.epsilon = eps[k];
        cfg.trials = n;
        cfg.seed = 808;
        TrialReport rep = run_trials(cfg);
        mean[k] = rep.mean_topology_error();
        double ss = 0.0;
        for (const auto& t : rep.trials) ss += (t.topology_error - mean[k]) * (t.topology_error - mean[k]);
        sd[k] = std::sqrt(ss / (n - 1));
    }

    int inversions = 0;
    bool beyond_se = false;
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
        if (mean[k + 1] < mean[k]) {
            ++inversions;
            double se = std::sqrt((sd[k] * sd[k] + sd[k + 1] * sd[k + 1]) / n);
            if (mean[k] - mean[k + 1] > se) beyond_se = true;
        }
    }
    c.pass = inversions <= 1 && !beyond_se;
    std::string means;
    for (std::size_t k = 0; k < eps.size(); ++k)
        means += (k ? ", " : "") + fmt(mean[k]);
    c.detail = "mean topology error over eps {0, 0.3, 0.6, 0.9} = {" + means + "}, " +
               std::to_string(inversions) + " inversions";
    return c;
}

Criterion criterion_estimator_convergence() {
    Criterion c;
    RadialNetwork net = toynet();
    InjectionSpec spec;
    PairScores want = pairwise_scores(analytic_cov(net, spec));
    spec.base = default_base(BlockIndex::reduced(net));

    const std::vector<int> durations = {1000, 10000, 100000};
    std::vector<double> err(durations.size(), 0.0);
    for (std::size_t ti = 0; ti < durations.size(); ++ti) {
        for (int s = 0; s < 5; ++s) {
            Panel p = simulate_panel(net, spec, durations[ti],
                                     derive_seed(909, static_cast<std::uint64_t>(ti) * 16 +
                                                          static_cast<std::uint64_t>(s)),
                                     PanelMode::phasor, 0.0);
            PairScores got = pairwise_scores(cov_from_panel(p, 0));
            double worst = 0.0;
            for (int i = 0; i < want.n; ++i)
                for (int j = 0; j < want.n; ++j) {
                    const auto& a = want.at(i, j);
                    const auto& b = got.at(i, j);
                    if (!a) continue;
                    worst = std::max({worst, std::abs(a->c - b->c), std::abs(a->d - b->d)});
                }
            err[ti] += worst / 5.0;
        }
    }
    double r1 = err[0] / err[1], r2 = err[1] / err[2];
    c.pass = r1 >= 2.5 && r2 >= 2.5;
    c.detail = "max |c,d| error " + fmt(err[0]) + " -> " + fmt(err[1]) + " -> " + fmt(err[2]) +
               " over T = 1e3, 1e4, 1e5 (5-seed means); shrink factors " + fmt(r1) + ", " +
               fmt(r2);
    return c;
}

Criterion criterion_recovery_speed() {
    Criterion c;
    RadialNetwork net = random_radial(37, 0, 0, ImpedanceParams{}, derive_seed(1010, 0));
    InjectionSpec spec;
    spec.base = default_base(BlockIndex::reduced(net));
    Panel p = simulate_panel(net, spec, 7200, 11, PanelMode::phasor, 0.0);

    std::vector<double> runs;
    double err = 0.0;
    for (int r = 0; r < 3; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        RecoveryResult res = recover_panel(p, net.reference);
        runs.push_back(seconds_since(t0));
        err += topology_error(res.edges, net).error;
    }
    std::sort(runs.begin(), runs.end());
    double median = runs[1];
    c.pass = median <= 2.0;
    c.detail = "37-node joint recovery at T=7200: median " + fmt(median) + "s of 3 runs" +
               (err == 0.0 ? "" : ", nonzero recovery error");
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

Criterion criterion_cli_determinism(const std::string& cli, const fs::path& work) {
    Criterion c;
    fs::create_directories(work);
    std::vector<std::string> mismatches;

    auto run = [&](const std::string& args) {
        std::string cmd = "\"" + cli + "\" " + args + " 2>>\"" + (work / "stderr.log").string() + "\"";
        return std::system(cmd.c_str());
    };
    auto check_pair = [&](const std::string& label, const std::string& args_tmpl,
                          const std::string& out_a, const std::string& out_b,
                          const std::vector<std::string>& extra = {}) {
        std::string a = (work / out_a).string(), b = (work / out_b).string();
        auto subst = [&](const std::string& out) {
            std::string s = args_tmpl;
            auto pos = s.find("@OUT@");
            s.replace(pos, 5, out);
            return s;
        };
        if (run(subst(a)) != 0 || run(subst(b)) != 0) {
            mismatches.push_back(label + " exited nonzero");
            return;
        }
        if (slurp(a) != slurp(b)) mismatches.push_back(label);
        for (const auto& suffix : extra)
            if (slurp(a + suffix) != slurp(b + suffix)) mismatches.push_back(label + suffix);
    };

    std::string net = (work / "net_a.json").string();
    check_pair("gen-net", "gen-net --n3 6 --n2 2 --n1 2 --seed 9 --name acc --out @OUT@",
               "net_a.json", "net_b.json");
    check_pair("simulate",
               "simulate --net " + net +
                   " --samples 240 --seed 7 --noise 0.01 --epsilon 0.2 --mode phasor --out @OUT@",
               "panel_a.csv", "panel_b.csv", {".json"});
    check_pair("simulate magnitude",
               "simulate --net " + net + " --samples 120 --seed 8 --mode magnitude --out @OUT@",
               "mpanel_a.csv", "mpanel_b.csv", {".json"});
    std::string panel = (work / "panel_a.csv").string();
    check_pair("recover", "recover --panel " + panel + " --reference 0 --out @OUT@",
               "rec_a.json", "rec_b.json");
    check_pair("recover topology",
               "recover --panel " + panel + " --variant topology --net " + net + " --out @OUT@",
               "rect_a.json", "rect_b.json");
    std::string result = (work / "rec_a.json").string();
    check_pair("eval", "eval --net " + net + " --result " + result + " --out @OUT@",
               "eval_a.json", "eval_b.json");
    check_pair("check-cond", "check-cond --net " + net + " --out @OUT@", "cond_a.json",
               "cond_b.json");

    json conf;
    conf["network"] = {{"file", net}};
    conf["samples"] = json::array({120, 240});
    conf["noise"] = 0.01;
    conf["trials"] = 2;
    conf["seed"] = 3;
    {
        std::ofstream f(work / "sweep.json", std::ios::binary);
        f << conf.dump(2) << "\n";
    }
    check_pair("sweep", "sweep --config " + (work / "sweep.json").string() + " --out @OUT@",
               "sweep_a.csv", "sweep_b.csv");

    c.pass = mismatches.empty();
    if (c.pass) {
        c.detail = "8 command pairs byte-identical";
    } else {
        c.detail = "mismatches:";
        for (const auto& m : mismatches) c.detail += " " + m;
    }
    return c;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cli-binary> <work-dir>\n";
        return 2;
    }

    auto guarded = [&](int number, const std::string& name, auto&& fn) {
        Criterion c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        report(number, name, c);
    };

    std::vector<RadialNetwork> corpus = matrix_corpus(100);
    double bta_worst = 1.0;
    guarded(1, "path-sum impedance matches the dense inverse",
            [&] { return criterion_impedance_oracles(corpus, &bta_worst); });
    guarded(2, "path matrix is an exact left inverse of the incidence",
            [&] { return criterion_path_inverse_identity(corpus.size(), bta_worst); });
    guarded(3, "analytic matching scores peak at the true ordering",
            [&] { return criterion_matching_argmax(); });
    guarded(4, "analytic distances are minimized by tree neighbors",
            [&] { return criterion_distance_neighbors(); });

    std::vector<RadialNetwork> recovery_corpus = sized_corpus(8, 2, 3, 513, 34);
    {
        auto mid = sized_corpus(26, 2, 6, 534, 34);
        auto big = sized_corpus(37, 0, 0, 537, 34);
        recovery_corpus.insert(recovery_corpus.end(), mid.begin(), mid.end());
        recovery_corpus.insert(recovery_corpus.end(), big.begin(), big.end());
    }
    RecoveryCorpusStats st;
    bool corpus_ok = true;
    try {
        st = run_recovery_corpus(recovery_corpus);
    } catch (const std::exception& e) {
        corpus_ok = false;
        Criterion c;
        c.detail = std::string("exception: ") + e.what();
        report(5, "noiseless panels recover exactly in both modes", c);
        report(6, "noise 0.001 leaves recovery nearly exact", c);
    }
    if (corpus_ok) {
        guarded(5, "noiseless panels recover exactly in both modes",
                [&] { return criterion_exact_recovery(st); });
        guarded(6, "noise 0.001 leaves recovery nearly exact",
                [&] { return criterion_low_noise(st); });
    }

    std::vector<RadialNetwork> trend_family = sized_corpus(8, 2, 3, 577, 3);
    guarded(7, "heavy noise hurts short panels more than long ones",
            [&] { return criterion_noise_trend(trend_family); });
    guarded(8, "correlated injections degrade recovery monotonically",
            [&] { return criterion_correlation_trend(trend_family[0]); });
    guarded(9, "empirical scores converge to the analytic values",
            [&] { return criterion_estimator_convergence(); });
    guarded(10, "37-node joint recovery stays under two seconds",
            [&] { return criterion_recovery_speed(); });
    guarded(11, "CLI output is byte-identical across reruns",
            [&] { return criterion_cli_determinism(argv[1], fs::path(argv[2])); });

    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << "\n";
    return g_failures;
}
