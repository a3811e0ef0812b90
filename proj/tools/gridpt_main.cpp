// gridpt command line: generate feeders, simulate measurement panels, run
// recovery, score results, check the line separation condition, run sweeps.
// Errors leave on stderr as one JSON object {"error": code, "message": ...}.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gridpt/gridpt.hpp"

namespace {

using namespace gridpt;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot open \"" + path + "\" for writing");
    f << text;
}

json load_json_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot open \"" + path + "\" for reading");
    try {
        json j;
        f >> j;
        return j;
    } catch (const json::exception& ex) {
        throw Error("io", "cannot parse \"" + path + "\": " + ex.what());
    }
}

struct SweepConfig {
    TrialConfig base;
    SweepGrid grid;
};

SweepConfig parse_sweep_config(const json& j) {
    SweepConfig sc;
    try {
        const auto& njson = j.at("network");
        if (njson.contains("file")) {
            sc.base.source.file = njson.at("file").get<std::string>();
        } else if (njson.contains("random")) {
            const auto& r = njson.at("random");
            RandomNetSpec spec;
            spec.n3 = r.value("n3", spec.n3);
            spec.n2 = r.value("n2", spec.n2);
            spec.n1 = r.value("n1", spec.n1);
            spec.impedance.dominance = r.value("dominance", spec.impedance.dominance);
            spec.impedance.diag_real_lo = r.value("diag_real_lo", spec.impedance.diag_real_lo);
            spec.impedance.diag_real_hi = r.value("diag_real_hi", spec.impedance.diag_real_hi);
            spec.impedance.diag_imag_lo = r.value("diag_imag_lo", spec.impedance.diag_imag_lo);
            spec.impedance.diag_imag_hi = r.value("diag_imag_hi", spec.impedance.diag_imag_hi);
            sc.base.source.random = spec;
        } else {
            throw Error("bad_argument", "sweep config network needs \"file\" or \"random\"");
        }

        if (j.contains("variant")) sc.base.variant = variant_from_name(j.at("variant").get<std::string>());
        sc.base.trials = j.value("trials", sc.base.trials);
        sc.base.seed = j.value("seed", sc.base.seed);
        sc.base.s2 = j.value("s2", sc.base.s2);

        if (j.contains("samples")) {
            if (j.at("samples").is_array())
                sc.grid.samples = j.at("samples").get<std::vector<int>>();
            else
                sc.base.samples = j.at("samples").get<int>();
        }
        if (j.contains("noise")) {
            if (j.at("noise").is_array())
                sc.grid.noise = j.at("noise").get<std::vector<double>>();
            else
                sc.base.noise = j.at("noise").get<double>();
        }
        if (j.contains("epsilon")) {
            if (j.at("epsilon").is_array())
                sc.grid.epsilon = j.at("epsilon").get<std::vector<double>>();
            else
                sc.base.epsilon = j.at("epsilon").get<double>();
        }
        if (j.contains("mode")) {
            if (j.at("mode").is_array()) {
                for (const auto& m : j.at("mode"))
                    sc.grid.modes.push_back(panel_mode_from_name(m.get<std::string>()));
            } else {
                sc.base.mode = panel_mode_from_name(j.at("mode").get<std::string>());
            }
        }
    } catch (const json::exception& ex) {
        throw Error("io", std::string("malformed sweep config: ") + ex.what());
    }
    return sc;
}

} // namespace

int main(int argc, char** argv) {
    using namespace gridpt;

    CLI::App app{"three-phase feeder panels and topology/phase recovery"};
    app.require_subcommand(1);

    int rc = 0;

    // gen-net
    auto* gen = app.add_subcommand("gen-net", "generate a random radial feeder");
    int gn3 = 13, gn2 = 0, gn1 = 0;
    std::uint64_t gseed = 1;
    std::string gname = "random", gout;
    ImpedanceParams gimp;
    gen->add_option("--n3", gn3, "three-phase node count (incl. reference)");
    gen->add_option("--n2", gn2, "two-phase node count");
    gen->add_option("--n1", gn1, "single-phase node count");
    gen->add_option("--seed", gseed, "generator seed");
    gen->add_option("--dominance", gimp.dominance, "diagonal dominance ratio");
    gen->add_option("--diag-real-lo", gimp.diag_real_lo, "diagonal resistance band, low");
    gen->add_option("--diag-real-hi", gimp.diag_real_hi, "diagonal resistance band, high");
    gen->add_option("--diag-imag-lo", gimp.diag_imag_lo, "diagonal reactance band, low");
    gen->add_option("--diag-imag-hi", gimp.diag_imag_hi, "diagonal reactance band, high");
    gen->add_option("--name", gname, "network name");
    gen->add_option("--out", gout, "output JSON path (default stdout)");
    gen->callback([&] {
        RadialNetwork net = random_radial(gn3, gn2, gn1, gimp, gseed);
        net.name = gname;
        write_text(gout, network_to_json(net).dump(2) + "\n");
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a voltage measurement panel");
    std::string snet, sout, smode = "phasor";
    int ssamples = 7200;
    std::uint64_t sseed = 1;
    double seps = 0.0, snoise = 0.0, ss2 = 1e-4, srate = 120.0;
    sim->add_option("--net", snet, "network JSON")->required();
    sim->add_option("--samples", ssamples, "number of samples");
    sim->add_option("--seed", sseed, "panel seed");
    sim->add_option("--epsilon", seps, "injection cross-correlation in [0,1)");
    sim->add_option("--noise", snoise, "noise variance as fraction of channel variance");
    sim->add_option("--mode", smode, "phasor or magnitude");
    sim->add_option("--s2", ss2, "injection fluctuation variance");
    sim->add_option("--rate", srate, "sampling rate in Hz (metadata only)");
    sim->add_option("--out", sout, "output CSV path; sidecar written next to it")->required();
    sim->callback([&] {
        RadialNetwork net = load_network(snet);
        Rooted tree = Rooted::build(net);
        BlockIndex red = BlockIndex::reduced(net);
        CMat z = impedance_by_paths(net, tree, red);
        InjectionSpec spec;
        spec.s2 = ss2;
        spec.epsilon = seps;
        spec.base = default_base(red);
        Panel p = simulate_panel(z, red, spec, ssamples, sseed, panel_mode_from_name(smode), snoise);
        p.rate_hz = srate;
        write_panel(p, sout, snet);
    });

    // recover
    auto* rec = app.add_subcommand("recover", "recover topology and phases from a panel");
    std::string rpanel, rnet, rout, rvariant = "joint";
    int rref = 0;
    rec->add_option("--panel", rpanel, "panel CSV")->required();
    rec->add_option("--reference", rref, "reference node id (joint variant)");
    rec->add_option("--variant", rvariant, "joint, phase (known topology) or topology (known phases)");
    rec->add_option("--net", rnet, "network JSON with the known side (phase/topology variants)");
    rec->add_option("--out", rout, "output JSON path (default stdout)");
    rec->callback([&] {
        Panel panel = read_panel_csv(rpanel);
        Variant var = variant_from_name(rvariant);
        RecoveryResult res;
        if (var == Variant::joint) {
            res = recover_panel(panel, rref);
        } else {
            if (rnet.empty())
                throw Error("bad_argument", "--net is required for variant " + rvariant);
            RadialNetwork net = load_network(rnet);
            CovTable table = cov_from_panel(panel, net.reference);
            if (var == Variant::phase) {
                std::vector<std::pair<int, int>> edges;
                for (const auto& e : net.edges) edges.push_back({e.from, e.to});
                res = phase_id_known_topology(table, edges, net.reference);
            } else {
                res = topology_known_phases(table, canonical_slot_phases(net), net.reference);
            }
        }
        write_text(rout, result_to_json(res).dump(2) + "\n");
    });

    // eval
    auto* ev = app.add_subcommand("eval", "score a recovery result against the true network");
    std::string enet, eres, eout;
    ev->add_option("--net", enet, "true network JSON")->required();
    ev->add_option("--result", eres, "recovery result JSON")->required();
    ev->add_option("--out", eout, "output JSON path (default stdout)");
    ev->callback([&] {
        RadialNetwork net = load_network(enet);
        RecoveryResult res = load_result(eres);
        auto topo = topology_error(res.edges, net);
        auto ph = phase_error(res.phases, canonical_slot_phases(net), net.reference);
        write_text(eout, metrics_to_json(topo, ph).dump(2) + "\n");
    });

    // check-cond
    auto* cc = app.add_subcommand("check-cond", "check the line separation condition");
    std::string cnet, cout_path;
    cc->add_option("--net", cnet, "network JSON")->required();
    cc->add_option("--out", cout_path, "output JSON path (default stdout)");
    cc->callback([&] {
        RadialNetwork net = load_network(cnet);
        ConditionReport rep = check_line_condition(net);
        write_text(cout_path, condition_report_to_json(rep).dump(2) + "\n");
    });

    // sweep
    auto* sw = app.add_subcommand("sweep", "run a parameter sweep from a JSON config");
    std::string wconf, wout;
    bool wtimings = false;
    sw->add_option("--config", wconf, "sweep config JSON")->required();
    sw->add_option("--out", wout, "output CSV path (default stdout)");
    sw->add_flag("--timings", wtimings, "include wall times (makes output non-reproducible)");
    sw->callback([&] {
        SweepConfig sc = parse_sweep_config(load_json_file(wconf));
        SweepOptions opt;
        opt.timings = wtimings;
        std::ostringstream rows;
        sweep(sc.base, sc.grid, rows, opt);
        write_text(wout, rows.str());
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << json{{"error", e.code()}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
    return rc;
}
