// scatterid: simulate MSR data, reconstruct scattering coefficients, build
// descriptor dictionaries and run identification experiments.
//
// Every numeric parameter lives in a JSON config (--config); flags override
// it. Data goes to files, logs go to stderr as key=value lines.
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scatterid/io.hpp"

namespace fs = std::filesystem;
using namespace scatterid;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

void log_kv(const std::string& event, const std::vector<std::pair<std::string, std::string>>& kv = {}) {
    std::ostringstream os;
    os << "event=" << event;
    for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
    std::cerr << os.str() << '\n';
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

// Config ---------------------------------------------------------------------

struct Options {
    std::string config_path;
    std::string out;
    std::string input;
    std::string dictionary;
    std::string target;
    std::vector<std::string> targets;
    std::vector<double> sigma0;
    long long seed = -1;
    int K = -1;
    int n_v = -1;
    int n_nodes = -1;
    int trials = -1;
};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

json load_config(const Options& o) {
    json cfg = json::object();
    if (!o.config_path.empty()) cfg = io::read_json(o.config_path);
    if (!cfg.is_object()) throw ConfigError("config root must be an object");
    if (!o.out.empty()) cfg["out"] = o.out;
    if (!o.input.empty()) cfg["input"] = o.input;
    if (!o.dictionary.empty()) cfg["dictionary"] = o.dictionary;
    if (!o.target.empty()) cfg["target"] = o.target;
    if (!o.targets.empty()) cfg["targets"] = o.targets;
    if (!o.sigma0.empty()) cfg["sigma0"] = o.sigma0;
    if (o.K >= 0) cfg["K"] = o.K;
    if (o.n_v >= 0) cfg["n_v"] = o.n_v;
    if (o.n_nodes >= 0) cfg["n_nodes"] = o.n_nodes;
    if (o.trials >= 0) cfg["trials"] = o.trials;
    // flag > environment > file
    if (o.seed >= 0) {
        cfg["seed"] = static_cast<std::uint64_t>(o.seed);
    } else if (const char* env = std::getenv("SCATTERID_SEED")) {
        try {
            cfg["seed"] = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("SCATTERID_SEED is not an unsigned integer");
        }
    }
    return cfg;
}

template <class T>
T get(const json& cfg, const std::string& key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
        return cfg.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

std::string require_string(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) throw ConfigError("missing required key '" + key + "'");
    return get<std::string>(cfg, key, "");
}

UniformGrid parse_grid(const json& cfg, const std::string& key, UniformGrid fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& j = cfg.at(key);
    check_keys(j, {"lo", "hi", "lo_pi", "hi_pi", "intervals"}, key);
    UniformGrid g = fallback;
    if (j.contains("lo") && j.contains("lo_pi")) throw ConfigError(key + ": give lo or lo_pi, not both");
    if (j.contains("hi") && j.contains("hi_pi")) throw ConfigError(key + ": give hi or hi_pi, not both");
    g.lo = j.contains("lo_pi") ? j.at("lo_pi").get<double>() * std::numbers::pi : j.value("lo", g.lo);
    g.hi = j.contains("hi_pi") ? j.at("hi_pi").get<double>() * std::numbers::pi : j.value("hi", g.hi);
    g.intervals = j.value("intervals", g.intervals);
    g.validate(key);
    return g;
}

std::vector<double> parse_sigma0(const json& cfg, std::vector<double> fallback) {
    if (!cfg.contains("sigma0")) return fallback;
    const json& j = cfg.at("sigma0");
    std::vector<double> s = j.is_array() ? j.get<std::vector<double>>() : std::vector<double>{j.get<double>()};
    for (double v : s)
        if (!(v >= 0.0)) throw ConfigError("sigma0 must be nonnegative");
    return s;
}

RigidMotion parse_motion(const json& cfg) {
    if (!cfg.contains("motion")) return ExperimentPlan{}.motion;
    const json& j = cfg.at("motion");
    check_keys(j, {"z", "s", "theta"}, "motion");
    try {
        return j.get<RigidMotion>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad motion: ") + e.what());
    }
}

AcquisitionGeometry parse_geometry(const json& cfg) {
    if (!cfg.contains("geometry")) return AcquisitionGeometry{};
    check_keys(cfg.at("geometry"), {"R", "Ns", "Nr", "z0"}, "geometry");
    AcquisitionGeometry g = io::geometry_from_json(cfg.at("geometry"));
    if (!(g.R > 0.0 && g.Ns > 0 && g.Nr > 0)) throw ConfigError("geometry needs R > 0, Ns > 0, Nr > 0");
    return g;
}

std::vector<TargetConfig> load_catalog(const json& cfg) {
    if (!cfg.contains("catalog")) return catalog();
    return catalog_from_json(io::read_json(get<std::string>(cfg, "catalog", "")));
}

/// "target" is a catalog id or an inline target description.
TargetConfig parse_target(const json& cfg, const std::vector<TargetConfig>& cat) {
    if (!cfg.contains("target")) throw ConfigError("missing required key 'target'");
    const json& j = cfg.at("target");
    if (j.is_string()) return find_target(cat, j.get<std::string>());
    try {
        return target_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad target description: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid target: ") + e.what());
    }
}

struct Scale {
    int dic_intervals = 26;
    int n_v = 128;
    int K = 20;
    int n_nodes = 256;
    int trials = 100;
};

Scale defaults(bool full) {
    if (full) return {78, 512, 25, 512, 1000};
    return {};
}

std::string freq_file(const std::string& stem, int k, const std::string& ext) {
    std::ostringstream os;
    os << stem << '_' << std::setw(3) << std::setfill('0') << k << ext;
    return os.str();
}

void require_order(int K, const AcquisitionGeometry& g) {
    if (K < 0 || 2 * K + 1 > std::min(g.Nr, g.Ns))
        throw ConfigError("order K = " + std::to_string(K) + " exceeds (min(Nr, Ns) - 1)/2 = " +
                          std::to_string((std::min(g.Nr, g.Ns) - 1) / 2));
}

// Commands -------------------------------------------------------------------

int cmd_simulate(const json& cfg, const Scale& sc) {
    check_keys(cfg, {"target", "catalog", "motion", "geometry", "operating", "n_nodes", "K_src", "sigma0", "seed", "out"},
               "simulate config");
    const auto cat = load_catalog(cfg);
    const TargetConfig base = parse_target(cfg, cat);
    const RigidMotion motion = parse_motion(cfg);
    const TargetConfig moved = apply_motion(base, motion);
    const AcquisitionGeometry geom = parse_geometry(cfg);
    const UniformGrid op = parse_grid(cfg, "operating", ExperimentPlan{}.operating);
    const int n_nodes = get(cfg, "n_nodes", sc.n_nodes);
    const int K_src = get(cfg, "K_src", -1);
    const auto sig = parse_sigma0(cfg, {0.0});
    if (sig.size() != 1) throw ConfigError("simulate takes a single sigma0");
    const auto seed = get<std::uint64_t>(cfg, "seed", 0);
    const fs::path out = require_string(cfg, "out");
    if (n_nodes < 16 || n_nodes % 2) throw ConfigError("n_nodes must be even and >= 16");
    try {
        moved.validate();
        check_receivers(moved, geom);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    log_kv("simulate_start", {{"target", base.id}, {"frequencies", std::to_string(op.size())}, {"n_nodes", std::to_string(n_nodes)}});
    json files = json::array();
    for (int k = 0; k < op.size(); ++k) {
        MSRMatrix m = msr_simulate(moved, geom, op[k], K_src, n_nodes);
        m = add_noise(m, sig[0], derive_seed(seed, static_cast<std::uint64_t>(k)));
        m.seed = seed;
        const std::string name = freq_file("msr", k, ".msr");
        io::save_msr(out / name, m, base.id);
        files.push_back(json{{"omega", op[k]}, {"file", name}});
        log_kv("simulate_frequency", {{"k", std::to_string(k)}, {"omega", num(op[k])}});
    }
    json geom_j;
    io::to_json(geom_j, geom);
    io::write_json(out / "manifest.json", json{{"command", "simulate"},
                                               {"config", cfg},
                                               {"target_id", base.id},
                                               {"base_target", base},
                                               {"motion", motion},
                                               {"geometry", geom_j},
                                               {"operating", op},
                                               {"n_nodes", n_nodes},
                                               {"sigma0", sig[0]},
                                               {"seed", seed},
                                               {"files", files}});
    log_kv("simulate_done", {{"files", std::to_string(files.size())}, {"out", out.string()}});
    return 0;
}

struct SimulationDir {
    json manifest;
    UniformGrid operating;
    AcquisitionGeometry geom;
    std::vector<fs::path> files;
};

SimulationDir read_simulation(const fs::path& dir) {
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath)) throw ConfigError("measurement manifest not found: " + mpath.string());
    SimulationDir s;
    s.manifest = io::read_json(mpath);
    try {
        s.operating = s.manifest.at("operating").get<UniformGrid>();
        s.geom = io::geometry_from_json(s.manifest.at("geometry"));
        for (const auto& f : s.manifest.at("files")) s.files.push_back(dir / f.at("file").get<std::string>());
    } catch (const json::exception& e) {
        throw ConfigError("malformed measurement manifest: " + std::string(e.what()));
    }
    if (static_cast<int>(s.files.size()) != s.operating.size()) throw ConfigError("manifest file count does not match grid");
    return s;
}

TargetConfig simulated_target(const SimulationDir& s) {
    try {
        return apply_motion(target_from_json(s.manifest.at("base_target")), s.manifest.at("motion").get<RigidMotion>());
    } catch (const json::exception& e) {
        throw ConfigError("measurement manifest lacks the target description: " + std::string(e.what()));
    }
}

int cmd_reconstruct(const json& cfg, const Scale& sc) {
    check_keys(cfg, {"input", "K", "out", "truth", "n_nodes", "sweep", "seed"}, "reconstruct config");
    const SimulationDir sim = read_simulation(require_string(cfg, "input"));
    const int K = get(cfg, "K", sc.K);
    require_order(K, sim.geom);
    const fs::path out = require_string(cfg, "out");
    const bool truth = get(cfg, "truth", false);
    const int n_nodes = get(cfg, "n_nodes", sim.manifest.value("n_nodes", sc.n_nodes));
    const auto seed = get<std::uint64_t>(cfg, "seed", 0);

    std::ofstream err;
    TargetConfig moved;
    if (truth) {
        moved = simulated_target(sim);
        fs::create_directories(out);
        err.open(out / "errors.csv");
        err << "omega,K,rel_error\n";
        err.precision(12);
    }
    json files = json::array();
    for (int k = 0; k < sim.operating.size(); ++k) {
        const MSRMatrix m = io::load_msr(sim.files[static_cast<std::size_t>(k)]);
        ScatteringMatrix w = reconstruct_w(m, K);
        w.target_id = sim.manifest.value("target_id", std::string());
        const std::string name = freq_file("w", k, ".wmat");
        io::save_wmat(out / name, w);
        files.push_back(json{{"omega", m.omega}, {"file", name}});
        if (truth) {
            const auto ref = scattering_matrix(moved, m.omega, K, n_nodes);
            err << m.omega << ',' << K << ',' << rel_error(w, ref) << '\n';
        }
        log_kv("reconstruct_frequency", {{"k", std::to_string(k)}, {"omega", num(m.omega)}});
    }

    if (cfg.contains("sweep")) {
        // error-vs-order curves at one frequency, one curve per noise level
        const json& sw = cfg.at("sweep");
        check_keys(sw, {"omega_index", "K", "sigma0", "trials"}, "sweep");
        const int k = sw.value("omega_index", 0);
        if (k < 0 || k >= sim.operating.size()) throw ConfigError("sweep.omega_index out of range");
        const auto orders = sw.value("K", std::vector<int>{K});
        const auto levels = sw.value("sigma0", std::vector<double>{0.2, 0.4, 0.6, 0.8, 1.0});
        const int trials = sw.value("trials", sc.trials);
        const MSRMatrix clean = io::load_msr(sim.files[static_cast<std::size_t>(k)]);
        if (clean.noise_level != 0.0) throw ConfigError("sweep needs noiseless measurements");
        int kmax = 0;
        for (int o : orders) {
            require_order(o, sim.geom);
            kmax = std::max(kmax, o);
        }
        const auto ref = scattering_matrix(simulated_target(sim), clean.omega, kmax, n_nodes);
        std::ofstream csv(out / "sweep.csv");
        csv.precision(12);
        csv << "omega,K,sigma0,trials,median_rel_error,mean_rel_error\n";
        for (int o : orders) {
            const Reconstructor rec(clean.geom, clean.omega, o);
            const auto truthK = ref.truncated(o);
            for (std::size_t si = 0; si < levels.size(); ++si) {
                std::vector<double> e(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(static)
                for (int t = 0; t < trials; ++t)
                    e[static_cast<std::size_t>(t)] =
                        rel_error(rec(add_noise(clean, levels[si], trial_seed(seed, static_cast<std::size_t>(o), si, t))), truthK);
                double mean = 0.0;
                for (double v : e) mean += v / trials;
                std::nth_element(e.begin(), e.begin() + trials / 2, e.end());
                csv << clean.omega << ',' << o << ',' << levels[si] << ',' << trials << ',' << e[static_cast<std::size_t>(trials / 2)]
                    << ',' << mean << '\n';
            }
        }
    }
    io::write_json(out / "manifest.json", json{{"command", "reconstruct"},
                                               {"config", cfg},
                                               {"K", K},
                                               {"target_id", sim.manifest.value("target_id", std::string())},
                                               {"files", files}});
    log_kv("reconstruct_done", {{"files", std::to_string(files.size())}, {"out", out.string()}});
    return 0;
}

UniformGrid dictionary_grid_of(const json& cfg, const Scale& sc) {
    if (cfg.contains("grid")) return parse_grid(cfg, "grid", {});
    const UniformGrid op = parse_grid(cfg, "operating", ExperimentPlan{}.operating);
    const UniformGrid scales = parse_grid(cfg, "scales", ExperimentPlan{}.scales);
    return dictionary_grid(op, scales, get(cfg, "dictionary_intervals", sc.dic_intervals));
}

int cmd_dict_build(const json& cfg, const Scale& sc) {
    check_keys(cfg, {"catalog", "grid", "operating", "scales", "dictionary_intervals", "n_v", "K", "n_nodes", "out"},
               "dict build config");
    const auto cat = load_catalog(cfg);
    const UniformGrid grid = dictionary_grid_of(cfg, sc);
    const int n_v = get(cfg, "n_v", sc.n_v);
    const int K = get(cfg, "K", sc.K);
    const int n_nodes = get(cfg, "n_nodes", sc.n_nodes);
    const fs::path out = require_string(cfg, "out");
    if (n_v < 2 * K + 2) throw ConfigError("n_v must be at least 2K + 2");
    if (n_nodes < 16 || n_nodes % 2) throw ConfigError("n_nodes must be even and >= 16");
    log_kv("dict_start", {{"targets", std::to_string(cat.size())},
                          {"frequencies", std::to_string(grid.size())},
                          {"N_v", std::to_string(n_v)},
                          {"K", std::to_string(K)},
                          {"n_nodes", std::to_string(n_nodes)}});
    const Dictionary d = io::build_dictionary_to(out, cat, grid, n_v, K, n_nodes);
    log_kv("dict_done", {{"hash", io::hex64(d.hash)}, {"out", out.string()}});
    return 0;
}

void write_reports(const fs::path& out, const ExperimentReport& rep, const json& cfg) {
    fs::create_directories(out);
    const auto probs = recognition_probability(rep);
    {
        std::ofstream csv(out / "probability.csv");
        csv << "target_id,sigma0,trials,successes,prob\n";
        for (const auto& r : probs) csv << r.target_id << ',' << r.sigma0 << ',' << r.trials << ',' << r.successes << ',' << r.prob() << '\n';
    }
    {
        std::ofstream csv(out / "errorbars.csv");
        csv.precision(12);
        csv << "target_id,sigma0,candidate_id,eps_mean,eps_std\n";
        for (const auto& e : error_bars(rep))
            csv << e.target_id << ',' << e.sigma0 << ',' << e.candidate_id << ',' << e.mean << ',' << e.std << '\n';
    }
    json targets = json::array();
    for (const auto& te : rep.targets) {
        json trials = json::array();
        for (const auto& o : te.trials) {
            const std::string who = o.identified >= 0 ? rep.dictionary_ids[static_cast<std::size_t>(o.identified)] : "";
            trials.push_back(json{{"sigma0", o.sigma0}, {"trial", o.trial}, {"seed", o.seed}, {"identified", who},
                                  {"s_est", o.s_est}, {"eps", o.eps}});
        }
        targets.push_back(json{{"target_id", te.target_id}, {"trials", trials}});
    }
    json summary = json::array();
    for (const auto& r : probs) summary.push_back(json{{"target_id", r.target_id}, {"sigma0", r.sigma0}, {"prob", r.prob()}});
    io::write_json(out / "report.json", json{{"config", cfg},
                                             {"dictionary_ids", rep.dictionary_ids},
                                             {"dictionary_hash", io::hex64(rep.dictionary_hash)},
                                             {"summary", summary},
                                             {"targets", targets}});
}

int cmd_identify(const json& cfg, const Scale&) {
    check_keys(cfg, {"dictionary", "input", "scales", "sigma0", "trials", "seed", "K", "n_v", "out"}, "identify config");
    const fs::path dict_dir = require_string(cfg, "dictionary");
    const Dictionary dict = io::load_dictionary(dict_dir);
    const SimulationDir sim = read_simulation(require_string(cfg, "input"));
    ExperimentPlan plan;
    plan.operating = sim.operating;
    plan.geom = sim.geom;
    plan.scales = parse_grid(cfg, "scales", plan.scales);
    plan.sigma0 = parse_sigma0(cfg, {0.0});
    plan.trials = get(cfg, "trials", 1);
    plan.seed = get<std::uint64_t>(cfg, "seed", 0);
    plan.K = get(cfg, "K", dict.K);
    plan.n_v = get(cfg, "n_v", dict.n_v);
    require_order(plan.K, plan.geom);
    if (plan.trials < 1) throw ConfigError("trials must be >= 1");
    if (plan.n_v < 2 * plan.K + 2) throw ConfigError("n_v must be at least 2K + 2");
    const fs::path out = require_string(cfg, "out");

    Measurements meas;
    meas.target_id = sim.manifest.value("target_id", std::string());
    plan.targets = {meas.target_id};
    for (const auto& f : sim.files) {
        meas.msr.push_back(io::load_msr(f));
        if (meas.msr.back().noise_level != 0.0 && plan.sigma0 != std::vector<double>{0.0})
            throw ConfigError("identify adds noise itself; use noiseless measurements or sigma0 = 0");
    }
    const auto it = std::find(dict.ids.begin(), dict.ids.end(), meas.target_id);
    const int true_index = it == dict.ids.end() ? -1 : static_cast<int>(it - dict.ids.begin());
    log_kv("identify_start", {{"target", meas.target_id}, {"trials", std::to_string(plan.trials)}});
    ExperimentReport rep;
    rep.plan = plan;
    rep.dictionary_ids = dict.ids;
    rep.dictionary_hash = dict.hash;
    rep.targets.push_back(run_target(meas, 0, true_index, make_reconstructors(plan), dict, plan));
    write_reports(out, rep, cfg);
    for (const auto& r : recognition_probability(rep))
        log_kv("identify_result", {{"target", r.target_id}, {"sigma0", num(r.sigma0)}, {"prob", num(r.prob())}});
    return 0;
}

int cmd_experiment(const json& cfg, const Scale& sc) {
    check_keys(cfg, {"catalog", "targets", "motion", "geometry", "operating", "scales", "dictionary_intervals", "dictionary",
                     "sigma0", "trials", "seed", "K", "n_v", "n_nodes", "out"},
               "experiment config");
    const auto cat = load_catalog(cfg);
    ExperimentPlan plan;
    plan.targets = get(cfg, "targets", std::vector<std::string>{});
    if (plan.targets.empty())
        for (const auto& t : cat)
            if (!t.inclusions.empty()) plan.targets.push_back(t.id);
    for (const auto& id : plan.targets) find_target(cat, id);
    plan.motion = parse_motion(cfg);
    plan.geom = parse_geometry(cfg);
    plan.operating = parse_grid(cfg, "operating", plan.operating);
    plan.scales = parse_grid(cfg, "scales", plan.scales);
    plan.sigma0 = parse_sigma0(cfg, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
    plan.trials = get(cfg, "trials", sc.trials);
    plan.seed = get<std::uint64_t>(cfg, "seed", 0);
    plan.K = get(cfg, "K", sc.K);
    plan.n_v = get(cfg, "n_v", sc.n_v);
    plan.n_nodes = get(cfg, "n_nodes", sc.n_nodes);
    require_order(plan.K, plan.geom);
    if (plan.trials < 1) throw ConfigError("trials must be >= 1");
    if (plan.n_v < 2 * plan.K + 2) throw ConfigError("n_v must be at least 2K + 2");
    const fs::path out = require_string(cfg, "out");

    Dictionary dict;
    const fs::path dict_dir = get<std::string>(cfg, "dictionary", (out / "dictionary").string());
    if (fs::exists(dict_dir / "manifest.json")) {
        dict = io::load_dictionary(dict_dir);
        log_kv("dict_loaded", {{"dir", dict_dir.string()}, {"hash", io::hex64(dict.hash)}});
    } else {
        const UniformGrid grid = dictionary_grid(plan.operating, plan.scales, get(cfg, "dictionary_intervals", sc.dic_intervals));
        log_kv("dict_start", {{"targets", std::to_string(cat.size())}, {"frequencies", std::to_string(grid.size())}});
        dict = io::build_dictionary_to(dict_dir, cat, grid, plan.n_v, plan.K, plan.n_nodes);
        log_kv("dict_done", {{"hash", io::hex64(dict.hash)}});
    }
    const auto rec = make_reconstructors(plan);
    ExperimentReport rep;
    rep.plan = plan;
    rep.dictionary_ids = dict.ids;
    rep.dictionary_hash = dict.hash;
    for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
        const auto& id = plan.targets[ti];
        log_kv("experiment_target", {{"target", id}});
        const auto meas = simulate_measurements(apply_motion(find_target(cat, id), plan.motion), plan);
        const auto it = std::find(dict.ids.begin(), dict.ids.end(), id);
        rep.targets.push_back(run_target(meas, ti, it == dict.ids.end() ? -1 : static_cast<int>(it - dict.ids.begin()), rec, dict, plan));
    }
    write_reports(out, rep, cfg);
    for (const auto& r : recognition_probability(rep))
        log_kv("experiment_result", {{"target", r.target_id}, {"sigma0", num(r.sigma0)}, {"prob", num(r.prob())}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scattering-coefficient target identification"};
    app.require_subcommand(1);
    Options o;
    int threads = 0;
    bool full_scale = false;
    app.add_option("--threads", threads, "Worker threads (default: SCATTERID_THREADS or all logical cores)");
    app.add_flag("--paper-scale", full_scale, "Full-size defaults: 78 dictionary intervals, N_v=512, K=25, 512 nodes, 1000 trials");

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "JSON config file");
        sub->add_option("-o,--out", o.out, "Output directory (config key: out)");
        sub->add_option("--seed", o.seed, "Master seed (overrides SCATTERID_SEED and config)");
    };
    auto* sim = app.add_subcommand("simulate", "Simulate MSR matrices over the operating frequencies");
    common(sim);
    sim->add_option("--target", o.target, "Catalog target id");
    sim->add_option("--n-nodes", o.n_nodes, "Boundary nodes per curve");
    sim->add_option("--sigma0", o.sigma0, "Noise level");

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct scattering coefficients from MSR files");
    common(rec);
    rec->add_option("-i,--input", o.input, "Directory written by simulate");
    rec->add_option("--K", o.K, "Reconstruction order");
    rec->add_option("--n-nodes", o.n_nodes, "Boundary nodes for ground-truth solves");

    auto* dict = app.add_subcommand("dict", "Descriptor dictionary");
    dict->require_subcommand(1);
    auto* build = dict->add_subcommand("build", "Build the descriptor dictionary of the catalog");
    common(build);
    build->add_option("--K", o.K, "Order of the scattering coefficients");
    build->add_option("--n-v", o.n_v, "Descriptor grid size");
    build->add_option("--n-nodes", o.n_nodes, "Boundary nodes per curve");

    auto* ident = app.add_subcommand("identify", "Identify a simulated target against a dictionary");
    common(ident);
    ident->add_option("-i,--input", o.input, "Directory written by simulate (noiseless)");
    ident->add_option("-d,--dictionary", o.dictionary, "Dictionary directory");
    ident->add_option("--sigma0", o.sigma0, "Noise levels");
    ident->add_option("--trials", o.trials, "Trials per noise level");
    ident->add_option("--K", o.K, "Reconstruction order");

    auto* exp = app.add_subcommand("experiment", "Dictionary + simulation + repeated identification trials");
    common(exp);
    exp->add_option("-d,--dictionary", o.dictionary, "Dictionary directory (built there if missing)");
    exp->add_option("--targets", o.targets, "Target ids (default: all inhomogeneous)");
    exp->add_option("--sigma0", o.sigma0, "Noise levels");
    exp->add_option("--trials", o.trials, "Trials per noise level");
    exp->add_option("--K", o.K, "Reconstruction order");
    exp->add_option("--n-v", o.n_v, "Descriptor grid size");
    exp->add_option("--n-nodes", o.n_nodes, "Boundary nodes per curve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (threads <= 0)
            if (const char* env = std::getenv("SCATTERID_THREADS")) threads = std::atoi(env);
        if (threads > 0) omp_set_num_threads(threads);
        const Scale sc = defaults(full_scale);
        const json cfg = load_config(o);
        if (full_scale) log_kv("full_scale", {{"dictionary_intervals", "78"}, {"N_v", "512"}, {"K", "25"}, {"n_nodes", "512"}});
        if (*sim) return cmd_simulate(cfg, sc);
        if (*rec) return cmd_reconstruct(cfg, sc);
        if (*build) return cmd_dict_build(cfg, sc);
        if (*ident) return cmd_identify(cfg, sc);
        if (*exp) return cmd_experiment(cfg, sc);
    } catch (const ConfigError& e) {
        log_kv("error", {{"kind", "config"}, {"message", '"' + std::string(e.what()) + '"'}});
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        log_kv("error", {{"kind", "config"}, {"message", '"' + std::string(e.what()) + '"'}});
        return kExitConfig;
    } catch (const json::exception& e) {
        log_kv("error", {{"kind", "config"}, {"message", '"' + std::string(e.what()) + '"'}});
        return kExitConfig;
    } catch (const NumericError& e) {
        log_kv("error", {{"kind", "numeric"}, {"message", '"' + std::string(e.what()) + '"'}});
        return kExitNumeric;
    } catch (const DomainError& e) {
        log_kv("error", {{"kind", "numeric"}, {"message", '"' + std::string(e.what()) + '"'}});
        return kExitNumeric;
    }
    return 1;
}
