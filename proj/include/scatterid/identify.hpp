#pragma once

// Frequency-dependent descriptor dictionary and the matching functional
//   J(t) = sum_k sum_{l in I_k(s_t)} (sum_ij S^D_ijk - S^B_ijl)^2,
//   I_k(s) = { l : w_{l-1} <= s w_k <= w_l }.
// Only the total mass of each descriptor enters J, so dictionaries keep the
// per-frequency masses in memory and the full grids are optional.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scatterid/acquisition.hpp"
#include "scatterid/farfield.hpp"

namespace scatterid {

/// intervals + 1 uniform points on [lo, hi].
struct UniformGrid {
    double lo = 0.0;
    double hi = 1.0;
    int intervals = 1;

    int size() const { return intervals + 1; }
    double step() const { return (hi - lo) / intervals; }
    double operator[](int i) const { return i == intervals ? hi : lo + i * step(); }
    std::vector<double> points() const {
        std::vector<double> p;
        for (int i = 0; i < size(); ++i) p.push_back((*this)[i]);
        return p;
    }
    void validate(const std::string& what) const {
        if (!(lo > 0.0 && hi > lo && intervals >= 1))
            throw ConfigError(what + ": need 0 < lo < hi and intervals >= 1");
    }
};

inline void to_json(json& j, const UniformGrid& g) { j = json{{"lo", g.lo}, {"hi", g.hi}, {"intervals", g.intervals}}; }
inline void from_json(const json& j, UniformGrid& g) {
    g.lo = j.at("lo").get<double>();
    g.hi = j.at("hi").get<double>();
    g.intervals = j.at("intervals").get<int>();
}

/// Dictionary grid covering [w_min s_min, w_max s_max].
inline UniformGrid dictionary_grid(const UniformGrid& operating, const UniformGrid& scales, int intervals) {
    return {operating.lo * scales.lo, operating.hi * scales.hi, intervals};
}

/// Dictionary frequency index sampled for s w_k: the upper end l of the
/// bracketing interval, or the node itself when s w_k lands on one. Empty
/// outside the grid.
inline std::optional<int> dictionary_index(double freq, const UniformGrid& dic) {
    const double x = (freq - dic.lo) / dic.step();
    const double tol = 1e-12 * std::max(1.0, std::abs(x));
    const double j = std::round(x);
    if (std::abs(x - j) <= tol) {
        if (j < 0 || j > dic.intervals) return std::nullopt;
        return static_cast<int>(j);
    }
    if (x < 0.0 || x > dic.intervals) return std::nullopt;
    return static_cast<int>(std::ceil(x));
}

inline double cost_j(double s, const std::vector<double>& mass_d, const std::vector<double>& mass_b,
                     const UniformGrid& operating, const UniformGrid& dic) {
    detail::require(static_cast<int>(mass_d.size()) == operating.size(), "target masses do not match the operating grid");
    detail::require(static_cast<int>(mass_b.size()) == dic.size(), "dictionary masses do not match the dictionary grid");
    double J = 0.0;
    for (int k = 0; k < operating.size(); ++k) {
        const auto l = dictionary_index(s * operating[k], dic);
        if (!l) continue;
        const double d = mass_d[static_cast<std::size_t>(k)] - mass_b[static_cast<std::size_t>(*l)];
        J += d * d;
    }
    return J;
}

struct EpsilonResult {
    double cost = 0.0;
    double s_at_min = 1.0;
    int t_at_min = 0;
};

/// min over the scale grid of cost_j; lowest index wins ties.
inline EpsilonResult epsilon(const std::vector<double>& mass_d, const std::vector<double>& mass_b,
                             const UniformGrid& operating, const UniformGrid& dic, const UniformGrid& scales) {
    EpsilonResult best{std::numeric_limits<double>::infinity(), scales[0], 0};
    for (int t = 0; t < scales.size(); ++t) {
        const double J = cost_j(scales[t], mass_d, mass_b, operating, dic);
        if (J < best.cost) best = {J, scales[t], t};
    }
    return best;
}

struct Dictionary {
    std::vector<std::string> ids;
    UniformGrid grid;
    int n_v = 0;
    int K = 0;
    int n_nodes = 0;
    std::vector<std::vector<double>> masses;              // [target][l]
    std::vector<std::vector<DescriptorGrid>> descriptors;  // optional, [target][l]
    std::uint64_t hash = 0;

    std::size_t size() const { return ids.size(); }
};

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t dictionary_hash(const Dictionary& d) {
    const json cfg{{"ids", d.ids}, {"grid", d.grid}, {"n_v", d.n_v}, {"K", d.K}, {"n_nodes", d.n_nodes}};
    const std::string s = cfg.dump();
    std::uint64_t h = fnv1a(s.data(), s.size());
    for (const auto& m : d.masses) h = fnv1a(m.data(), m.size() * sizeof(double), h);
    return h;
}

using DescriptorSink = std::function<void(std::size_t target, int l, const DescriptorGrid&)>;

/// Descriptors of every catalog element at every dictionary frequency. A
/// resonant (target, frequency) pair aborts the build.
inline Dictionary build_dictionary(const std::vector<TargetConfig>& cat, const UniformGrid& dic, int n_v, int K,
                                   int n_nodes, bool keep_descriptors = true, const DescriptorSink& sink = {}) {
    detail::require(!cat.empty(), "empty catalog");
    dic.validate("dictionary grid");
    Dictionary d;
    d.grid = dic;
    d.n_v = n_v;
    d.K = K;
    d.n_nodes = n_nodes;
    for (const auto& t : cat) d.ids.push_back(t.id);
    const int nl = dic.size();
    const int total = static_cast<int>(cat.size()) * nl;
    d.masses.assign(cat.size(), std::vector<double>(static_cast<std::size_t>(nl), 0.0));
    if (keep_descriptors) d.descriptors.assign(cat.size(), std::vector<DescriptorGrid>(static_cast<std::size_t>(nl)));
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int job = 0; job < total; ++job) {
        const auto ti = static_cast<std::size_t>(job / nl);
        const int l = job % nl;
        try {
            const auto w = scattering_matrix(cat[ti], dic[l], K, n_nodes);
            DescriptorGrid s = descriptor(w, n_v);
            d.masses[ti][static_cast<std::size_t>(l)] = s.mass();
            if (sink) {
#pragma omp critical(scatterid_dict_sink)
                sink(ti, l, s);
            }
            if (keep_descriptors) d.descriptors[ti][static_cast<std::size_t>(l)] = std::move(s);
        } catch (const std::exception& e) {
#pragma omp critical(scatterid_dict_fail)
            if (failure.empty())
                failure = "dictionary build failed for target '" + cat[ti].id + "' at omega=" +
                          std::to_string(dic[l]) + ": " + e.what();
        }
    }
    if (!failure.empty()) throw NumericError(failure);
    d.hash = dictionary_hash(d);
    return d;
}

struct MatchReport {
    std::vector<double> eps;
    std::vector<double> s_at_min;
    int best = -1;
    double s_est = 0.0;
};

/// Matches descriptor masses of the unknown target over the operating grid.
inline MatchReport identify(const std::vector<double>& mass_d, const Dictionary& dict, const UniformGrid& operating,
                            const UniformGrid& scales) {
    detail::require(dict.size() > 0, "empty dictionary");
    MatchReport r;
    for (std::size_t n = 0; n < dict.size(); ++n) {
        const auto e = epsilon(mass_d, dict.masses[n], operating, dict.grid, scales);
        r.eps.push_back(e.cost);
        r.s_at_min.push_back(e.s_at_min);
        if (r.best < 0 || e.cost < r.eps[static_cast<std::size_t>(r.best)]) r.best = static_cast<int>(n);
    }
    r.s_est = r.s_at_min[static_cast<std::size_t>(r.best)];
    return r;
}

inline std::vector<double> masses_of(const std::vector<DescriptorGrid>& g) {
    std::vector<double> m;
    for (const auto& s : g) m.push_back(s.mass());
    return m;
}

// Experiments ------------------------------------------------------------------

struct ExperimentPlan {
    std::vector<std::string> targets;
    RigidMotion motion{{-0.5, 0.5}, 1.2, std::numbers::pi / 3};
    std::vector<double> sigma0{0.0};
    int trials = 1;
    std::uint64_t seed = 0;
    AcquisitionGeometry geom;
    UniformGrid operating{0.5 * std::numbers::pi, std::numbers::pi, 52};
    UniformGrid scales{0.5, 1.5, 250};
    int K = 20;
    int n_v = 128;
    int n_nodes = 256;
};

/// Clean measurements of one moved target over the operating grid.
struct Measurements {
    std::string target_id;
    std::vector<MSRMatrix> msr;
};

inline Measurements simulate_measurements(const TargetConfig& moved, const ExperimentPlan& plan) {
    Measurements m;
    m.target_id = moved.id;
    m.msr.resize(static_cast<std::size_t>(plan.operating.size()));
    std::string failure;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < plan.operating.size(); ++k) {
        try {
            m.msr[static_cast<std::size_t>(k)] = msr_simulate(moved, plan.geom, plan.operating[k], -1, plan.n_nodes);
        } catch (const std::exception& e) {
#pragma omp critical(scatterid_sim_fail)
            if (failure.empty()) failure = "simulation failed at omega=" + std::to_string(plan.operating[k]) + ": " + e.what();
        }
    }
    if (!failure.empty()) throw NumericError(failure);
    return m;
}

/// Reconstruction operators for every operating frequency.
inline std::vector<Reconstructor> make_reconstructors(const ExperimentPlan& plan) {
    std::vector<Reconstructor> out;
    for (int k = 0; k < plan.operating.size(); ++k) out.emplace_back(plan.geom, plan.operating[k], plan.K);
    return out;
}

/// Descriptor masses from (noisy) measurements: msr -> noise -> W -> A -> S.
inline std::vector<double> measured_masses(const Measurements& meas, const std::vector<Reconstructor>& rec,
                                           double sigma0, std::uint64_t trial_seed, int n_v) {
    std::vector<double> out;
    for (std::size_t k = 0; k < meas.msr.size(); ++k) {
        const MSRMatrix noisy = add_noise(meas.msr[k], sigma0, derive_seed(trial_seed, k));
        out.push_back(descriptor(rec[k](noisy), n_v).mass());
    }
    return out;
}

struct TrialOutcome {
    double sigma0 = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    int identified = -1;
    double s_est = 0.0;
    std::vector<double> eps;
};

struct TargetExperiment {
    std::string target_id;
    int true_index = -1;
    std::vector<TrialOutcome> trials;  // ordered by (sigma0, trial)
};

struct ExperimentReport {
    ExperimentPlan plan;
    std::vector<std::string> dictionary_ids;
    std::uint64_t dictionary_hash = 0;
    std::vector<TargetExperiment> targets;
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t target, std::size_t sigma, int trial) {
    return derive_seed(derive_seed(derive_seed(master, target), sigma), static_cast<std::uint64_t>(trial));
}

inline TargetExperiment run_target(const Measurements& meas, std::size_t target_slot, int true_index,
                                   const std::vector<Reconstructor>& rec, const Dictionary& dict,
                                   const ExperimentPlan& plan) {
    TargetExperiment te;
    te.target_id = meas.target_id;
    te.true_index = true_index;
    const int nt = plan.trials;
    te.trials.resize(plan.sigma0.size() * static_cast<std::size_t>(nt));
#pragma omp parallel for schedule(dynamic)
    for (int job = 0; job < static_cast<int>(te.trials.size()); ++job) {
        const auto si = static_cast<std::size_t>(job / nt);
        const int t = job % nt;
        TrialOutcome& o = te.trials[static_cast<std::size_t>(job)];
        o.sigma0 = plan.sigma0[si];
        o.trial = t;
        o.seed = trial_seed(plan.seed, target_slot, si, t);
        const auto m = measured_masses(meas, rec, o.sigma0, o.seed, plan.n_v);
        const auto r = identify(m, dict, plan.operating, plan.scales);
        o.identified = r.best;
        o.s_est = r.s_est;
        o.eps = r.eps;
    }
    return te;
}

inline ExperimentReport run_experiment(const ExperimentPlan& plan, const std::vector<TargetConfig>& cat,
                                       const Dictionary& dict) {
    detail::require(plan.trials >= 1, "trials must be >= 1");
    detail::require(plan.n_v >= 2 * plan.K + 2, "n_v too small for K");
    ExperimentReport rep;
    rep.plan = plan;
    rep.dictionary_ids = dict.ids;
    rep.dictionary_hash = dict.hash;
    const auto rec = make_reconstructors(plan);
    for (std::size_t ti = 0; ti < plan.targets.size(); ++ti) {
        const auto& id = plan.targets[ti];
        const TargetConfig moved = apply_motion(find_target(cat, id), plan.motion);
        const auto it = std::find(dict.ids.begin(), dict.ids.end(), id);
        const int true_index = it == dict.ids.end() ? -1 : static_cast<int>(it - dict.ids.begin());
        rep.targets.push_back(run_target(simulate_measurements(moved, plan), ti, true_index, rec, dict, plan));
    }
    return rep;
}

struct ProbabilityRow {
    std::string target_id;
    double sigma0;
    int trials;
    int successes;
    double prob() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

inline std::vector<ProbabilityRow> recognition_probability(const ExperimentReport& rep) {
    std::vector<ProbabilityRow> rows;
    for (const auto& te : rep.targets)
        for (double s0 : rep.plan.sigma0) {
            ProbabilityRow row{te.target_id, s0, 0, 0};
            for (const auto& o : te.trials)
                if (o.sigma0 == s0) {
                    ++row.trials;
                    row.successes += o.identified == te.true_index;
                }
            rows.push_back(row);
        }
    return rows;
}

struct ErrorBar {
    std::string target_id;
    double sigma0;
    std::string candidate_id;
    double mean;
    double std;
};

inline std::vector<ErrorBar> error_bars(const ExperimentReport& rep) {
    std::vector<ErrorBar> out;
    for (const auto& te : rep.targets)
        for (double s0 : rep.plan.sigma0)
            for (std::size_t c = 0; c < rep.dictionary_ids.size(); ++c) {
                double sum = 0.0, sq = 0.0;
                int n = 0;
                for (const auto& o : te.trials)
                    if (o.sigma0 == s0) {
                        sum += o.eps[c];
                        sq += o.eps[c] * o.eps[c];
                        ++n;
                    }
                const double mean = n ? sum / n : 0.0;
                const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1)) : 0.0;
                out.push_back({te.target_id, s0, rep.dictionary_ids[c], mean, std::sqrt(var)});
            }
    return out;
}

}  // namespace scatterid
