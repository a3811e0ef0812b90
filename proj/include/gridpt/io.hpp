#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridpt/condition.hpp"
#include "gridpt/metrics.hpp"
#include "gridpt/network.hpp"
#include "gridpt/recover.hpp"
#include "gridpt/simulate.hpp"

namespace gridpt {

using json = nlohmann::json;

// Shortest round-trip decimal form; identical output on every platform, so
// regenerated files compare byte for byte.
inline std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot open \"" + path + "\" for writing");
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("io", "cannot open \"" + path + "\" for reading");
    return f;
}

} // namespace detail

inline json network_to_json(const RadialNetwork& net) {
    json j;
    j["name"] = net.name;
    j["reference"] = net.reference;
    j["nodes"] = json::array();
    for (int i = 0; i < net.n(); ++i)
        j["nodes"].push_back(
            {{"id", i}, {"phases", net.node_phases[static_cast<std::size_t>(i)].to_string()}});
    j["edges"] = json::array();
    for (const auto& e : net.edges) {
        json z = json::array();
        for (std::size_t r = 0; r < e.z.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < e.z.cols(); ++c)
                row.push_back({e.z(r, c).real(), e.z(r, c).imag()});
            z.push_back(row);
        }
        j["edges"].push_back(
            {{"from", e.from}, {"to", e.to}, {"phases", e.phases.to_string()}, {"z", z}});
    }
    return j;
}

inline RadialNetwork network_from_json(const json& j) {
    RadialNetwork net;
    try {
        net.name = j.value("name", std::string{});
        net.reference = j.at("reference").get<int>();
        const auto& nodes = j.at("nodes");
        net.node_phases.assign(nodes.size(), PhaseSet{});
        std::vector<bool> seen(nodes.size(), false);
        for (const auto& nj : nodes) {
            int id = nj.at("id").get<int>();
            if (id < 0 || id >= static_cast<int>(nodes.size()) || seen[static_cast<std::size_t>(id)])
                throw Error("invalid_network", "node ids must be dense 0..n-1 without repeats");
            seen[static_cast<std::size_t>(id)] = true;
            net.node_phases[static_cast<std::size_t>(id)] =
                PhaseSet::from_string(nj.at("phases").get<std::string>());
        }
        for (const auto& ej : j.at("edges")) {
            LineModel e;
            e.from = ej.at("from").get<int>();
            e.to = ej.at("to").get<int>();
            e.phases = PhaseSet::from_string(ej.at("phases").get<std::string>());
            const auto& z = ej.at("z");
            std::size_t m = z.size();
            e.z = CMat(m, m);
            for (std::size_t r = 0; r < m; ++r) {
                if (z.at(r).size() != m)
                    throw Error("invalid_network", "impedance matrix is not square");
                for (std::size_t c = 0; c < m; ++c)
                    e.z(r, c) = cplx(z.at(r).at(c).at(0).get<double>(),
                                     z.at(r).at(c).at(1).get<double>());
            }
            net.edges.push_back(e);
        }
    } catch (const json::exception& ex) {
        throw Error("io", std::string("malformed network JSON: ") + ex.what());
    }
    return net;
}

inline void save_network(const RadialNetwork& net, const std::string& path) {
    auto f = detail::open_out(path);
    f << network_to_json(net).dump(2) << "\n";
}

inline RadialNetwork load_network(const std::string& path) {
    auto f = detail::open_in(path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& ex) {
        throw Error("io", "cannot parse \"" + path + "\": " + ex.what());
    }
    RadialNetwork net = network_from_json(j);
    auto rep = validate_network(net);
    if (!rep.ok()) throw Error("invalid_network", "\"" + path + "\": " + rep.joined());
    return net;
}

// Panel CSV: header `t,<node>_<phase>_re,<node>_<phase>_im,...` for phasor
// panels, `_mag` columns for magnitude panels; one row per sample.
inline void write_panel_csv(const Panel& p, const std::string& path) {
    auto f = detail::open_out(path);
    std::string header = "t";
    for (const auto& [node, ph] : p.channels) {
        std::string base = channel_name(node, ph);
        if (p.mode == PanelMode::phasor)
            header += "," + base + "_re," + base + "_im";
        else
            header += "," + base + "_mag";
    }
    f << header << "\n";
    for (int t = 0; t < p.samples; ++t) {
        std::string line = std::to_string(t);
        for (int ch = 0; ch < p.width(); ++ch) {
            if (p.mode == PanelMode::phasor) {
                line += "," + fmt_double(p.cat(t, ch).real());
                line += "," + fmt_double(p.cat(t, ch).imag());
            } else {
                line += "," + fmt_double(p.rat(t, ch));
            }
        }
        f << line << "\n";
    }
}

inline json panel_sidecar(const Panel& p, const std::string& network_path) {
    json j;
    j["network"] = network_path;
    j["mode"] = panel_mode_name(p.mode);
    j["distribution"] = p.distribution;
    j["seed"] = p.seed;
    j["s2"] = p.s2;
    j["epsilon"] = p.epsilon;
    j["noise_level"] = p.noise_level;
    j["rate_hz"] = p.rate_hz;
    j["samples"] = p.samples;
    json ch = json::array();
    for (const auto& [node, ph] : p.channels) ch.push_back(channel_name(node, ph));
    j["channels"] = ch;
    return j;
}

inline void write_panel(const Panel& p, const std::string& csv_path,
                        const std::string& network_path) {
    write_panel_csv(p, csv_path);
    auto f = detail::open_out(csv_path + ".json");
    f << panel_sidecar(p, network_path).dump(2) << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s) {
    const char* b = s.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (end == b || *end != '\0') throw Error("io", "malformed number \"" + s + "\"");
    return v;
}

} // namespace detail

inline Panel read_panel_csv(const std::string& path) {
    auto f = detail::open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw Error("io", "\"" + path + "\" is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto cols = detail::split_csv_line(line);
    if (cols.empty() || cols[0] != "t")
        throw Error("io", "\"" + path + "\" header must start with column t");

    Panel p;
    bool mode_set = false;
    for (std::size_t k = 1; k < cols.size(); ++k) {
        const std::string& name = cols[k];
        std::size_t u1 = name.find('_');
        std::size_t u2 = name.find('_', u1 == std::string::npos ? u1 : u1 + 1);
        if (u1 == std::string::npos || u2 == std::string::npos)
            throw Error("io", "bad channel column \"" + name + "\"");
        int node = 0;
        auto conv = std::from_chars(name.data(), name.data() + u1, node);
        if (conv.ec != std::errc{} || conv.ptr != name.data() + u1)
            throw Error("io", "bad node id in column \"" + name + "\"");
        if (u2 - u1 != 2) throw Error("io", "bad phase in column \"" + name + "\"");
        Phase ph = phase_from_char(name[u1 + 1]);
        std::string kind = name.substr(u2 + 1);
        if (kind == "mag") {
            if (mode_set && p.mode != PanelMode::magnitude)
                throw Error("io", "mixed phasor and magnitude columns");
            p.mode = PanelMode::magnitude;
            mode_set = true;
            p.channels.push_back({node, ph});
        } else if (kind == "re") {
            if (mode_set && p.mode != PanelMode::phasor)
                throw Error("io", "mixed phasor and magnitude columns");
            if (k + 1 >= cols.size() ||
                cols[k + 1] != name.substr(0, u2) + "_im")
                throw Error("io", "column \"" + name + "\" lacks its _im partner");
            p.mode = PanelMode::phasor;
            mode_set = true;
            p.channels.push_back({node, ph});
            ++k;
        } else {
            throw Error("io", "bad column suffix \"" + kind + "\"");
        }
    }
    if (p.channels.empty()) throw Error("io", "\"" + path + "\" has no channels");

    const int C = p.width();
    std::vector<double> row;
    int t = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto vals = detail::split_csv_line(line);
        std::size_t expect = 1 + static_cast<std::size_t>(C) * (p.mode == PanelMode::phasor ? 2 : 1);
        if (vals.size() != expect)
            throw Error("io", "row " + std::to_string(t) + " has " + std::to_string(vals.size()) +
                                  " fields, expected " + std::to_string(expect));
        if (p.mode == PanelMode::phasor) {
            for (int ch = 0; ch < C; ++ch)
                p.cdata.push_back(cplx(detail::parse_double(vals[1 + 2 * static_cast<std::size_t>(ch)]),
                                       detail::parse_double(vals[2 + 2 * static_cast<std::size_t>(ch)])));
        } else {
            for (int ch = 0; ch < C; ++ch)
                p.rdata.push_back(detail::parse_double(vals[1 + static_cast<std::size_t>(ch)]));
        }
        ++t;
    }
    p.samples = t;
    if (t < 1) throw Error("io", "\"" + path + "\" has no samples");
    return p;
}

inline std::string phases_to_string(const std::vector<Phase>& ph) {
    std::string s;
    for (Phase p : ph) s += phase_char(p);
    return s;
}

inline json result_to_json(const RecoveryResult& r) {
    json j;
    j["root"] = r.root;
    j["edges"] = json::array();
    for (const auto& [child, parent] : r.edges) j["edges"].push_back({child, parent});
    json ph = json::object();
    for (std::size_t i = 0; i < r.phases.size(); ++i)
        if (!r.phases[i].empty()) ph[std::to_string(i)] = phases_to_string(r.phases[i]);
    j["phases"] = ph;
    j["steps"] = json::array();
    for (const auto& s : r.steps)
        j["steps"].push_back({{"added", s.added},
                              {"parent", s.parent},
                              {"d", s.d},
                              {"margin", s.margin},
                              {"tie", s.tie},
                              {"match_tie", s.match_tie}});
    return j;
}

inline RecoveryResult result_from_json(const json& j) {
    RecoveryResult r;
    try {
        r.root = j.at("root").get<int>();
        int maxnode = r.root;
        for (const auto& e : j.at("edges")) {
            r.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
            maxnode = std::max({maxnode, r.edges.back().first, r.edges.back().second});
        }
        for (const auto& [key, val] : j.at("phases").items())
            maxnode = std::max(maxnode, std::stoi(key));
        r.phases.assign(static_cast<std::size_t>(maxnode) + 1, {});
        for (const auto& [key, val] : j.at("phases").items()) {
            std::vector<Phase> ph;
            for (char c : val.get<std::string>()) ph.push_back(phase_from_char(c));
            r.phases[static_cast<std::size_t>(std::stoi(key))] = ph;
        }
        if (j.contains("steps")) {
            for (const auto& sj : j.at("steps")) {
                RecoveryStep s;
                s.added = sj.at("added").get<int>();
                s.parent = sj.at("parent").get<int>();
                s.d = sj.at("d").get<double>();
                s.margin = sj.value("margin", 0.0);
                s.tie = sj.value("tie", false);
                s.match_tie = sj.value("match_tie", false);
                r.steps.push_back(s);
            }
        }
    } catch (const json::exception& ex) {
        throw Error("io", std::string("malformed result JSON: ") + ex.what());
    }
    return r;
}

inline void save_result(const RecoveryResult& r, const std::string& path) {
    auto f = detail::open_out(path);
    f << result_to_json(r).dump(2) << "\n";
}

inline RecoveryResult load_result(const std::string& path) {
    auto f = detail::open_in(path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& ex) {
        throw Error("io", "cannot parse \"" + path + "\": " + ex.what());
    }
    return result_from_json(j);
}

inline json metrics_to_json(const TopologyErrorReport& t, const PhaseErrorReport& p) {
    json j;
    j["topology_error"] = t.error;
    j["wrong_edges"] = t.wrong;
    j["missing_edges"] = t.missing;
    j["total_edges"] = t.total;
    j["phase_error"] = p.error;
    j["wrong_phases"] = p.wrong;
    j["total_phases"] = p.total;
    return j;
}

inline json condition_report_to_json(const ConditionReport& r) {
    json j;
    j["holds"] = r.holds;
    j["violations"] = json::array();
    for (const auto& v : r.violations)
        j["violations"].push_back({{"edge_a", v.edge_a},
                                   {"edge_b", v.edge_b},
                                   {"rows", v.rows.to_string()},
                                   {"ordering", v.ordering.to_string()},
                                   {"gap", v.gap},
                                   {"tie", v.tie}});
    return j;
}

// flat CSV dump of a complex matrix, for eyeballing in a spreadsheet
inline void write_cmat_csv(const CMat& m, const std::string& path) {
    auto f = detail::open_out(path);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::string line;
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) line += ",";
            line += fmt_double(m(r, c).real()) + ";" + fmt_double(m(r, c).imag());
        }
        f << line << "\n";
    }
}

// matrix as JSON rows of [re, im] pairs, for diffing against other tools
inline json cmat_to_json(const CMat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

inline CMat cmat_from_json(const json& j) {
    std::size_t rows = j.size();
    std::size_t cols = rows ? j.at(0).size() : 0;
    CMat m(rows, cols);
    try {
        for (std::size_t r = 0; r < rows; ++r) {
            if (j.at(r).size() != cols) throw Error("io", "ragged matrix JSON");
            for (std::size_t c = 0; c < cols; ++c)
                m(r, c) = cplx(j.at(r).at(c).at(0).get<double>(),
                               j.at(r).at(c).at(1).get<double>());
        }
    } catch (const json::exception& ex) {
        throw Error("io", std::string("malformed matrix JSON: ") + ex.what());
    }
    return m;
}

// Pair score dump, one row per admissible ordered pair. The ordering column
// lists the target slot of each source slot, so "021" maps slots 0,1,2 of i
// to slots 0,2,1 of j.
inline std::string pair_scores_csv(const PairScores& ps) {
    std::string out = "i,j,ordering,c,d,cross_set\n";
    for (int i = 0; i < ps.n; ++i) {
        for (int j = 0; j < ps.n; ++j) {
            const auto& cell = ps.at(i, j);
            if (!cell) continue;
            std::string ord;
            for (int a = 0; a < cell->map.size; ++a)
                ord += static_cast<char>('0' + cell->map[a]);
            out += std::to_string(i) + "," + std::to_string(j) + "," + ord + "," +
                   fmt_double(cell->c) + "," + fmt_double(cell->d) + "," +
                   (cell->cross_set ? "1" : "0") + "\n";
        }
    }
    return out;
}

inline void write_pair_scores_csv(const PairScores& ps, const std::string& path) {
    auto f = detail::open_out(path);
    f << pair_scores_csv(ps);
}

} // namespace gridpt
