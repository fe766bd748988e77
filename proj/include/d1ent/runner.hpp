// runner.hpp: scenario sweeps, deterministic parallel execution and CSV output.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "d1ent/composer.hpp"
#include "d1ent/config.hpp"
#include "d1ent/entanglement.hpp"
#include "d1ent/oracle.hpp"

namespace d1ent {

struct ResultRow {
    double alpha;
    double a_squared;
    double time;
    double concurrence;
    double norm_drift;
    double energy_drift;
    bool x_form_valid;
    bool ok;
};

/// All rows for one (alpha, method) pair, sorted by (a^2, time).
struct ScenarioResult {
    double alpha;
    Method method;
    std::vector<ResultRow> rows;
    std::size_t aborted_cells{0};
    std::string first_error;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// claimed exactly once; callers write into preallocated slot i.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
}

namespace detail {

inline std::vector<double> scenario_times(const ScenarioConfig& cfg) {
    return make_output_grid(cfg.model.t_max, cfg.output_every);
}

inline InitialSpec cell_spec(const ScenarioConfig& cfg, double a) {
    InitialSpec spec = cfg.initial;
    spec.a_param = a;
    return spec;
}

inline void append_error_rows(std::vector<ResultRow>& rows, double alpha, double a2, const std::vector<double>& times) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double t : times) rows.push_back({alpha, a2, t, nan, nan, nan, false, false});
}

// Sweep order by (a^2, original index) so equal values keep config order.
inline std::vector<std::size_t> sweep_order(const std::vector<double>& a_values) {
    std::vector<std::size_t> order(a_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a_values[i] < a_values[j]; });
    return order;
}

}  // namespace detail

/// One (alpha, method) job: evolves the distinct spinors once, then contracts
/// every a cell. Solver failures become error rows instead of exceptions.
inline ScenarioResult run_job(const ScenarioConfig& cfg, double alpha, Method method) {
    ScenarioResult res{alpha, method, {}, 0, {}};
    const auto times = detail::scenario_times(cfg);
    const auto order = detail::sweep_order(cfg.a_values);
    ModelParams params = cfg.model;
    params.alpha = alpha;

    std::vector<std::vector<EnsembleMember>> ensembles;
    std::vector<Spinor> spinors;
    for (std::size_t idx : order) {
        ensembles.push_back(to_ensemble(detail::cell_spec(cfg, cfg.a_values[idx])));
        for (const auto& s : spinors_of(ensembles.back()))
            if (std::none_of(spinors.begin(), spinors.end(), [&](const Spinor& e) { return (e - s).cwiseAbs().maxCoeff() < 1e-14; }))
                spinors.push_back(s);
    }

    auto note = [&](const std::string& what) {
        ++res.aborted_cells;
        if (res.first_error.empty()) res.first_error = what;
    };

    std::optional<TwoQubitPropagator> prop;
    try {
        const BathModes bath = discretize_bath(params);
        const QubitSetup q{params, bath};
        prop.emplace(q, q, cfg.initial.frame, method, times, spinors);
    } catch (const SolverError& e) {
        for (std::size_t k = 0; k < order.size(); ++k) {
            const double a = cfg.a_values[order[k]];
            detail::append_error_rows(res.rows, alpha, a * a, times);
            note(e.what());
        }
        return res;
    }

    for (std::size_t k = 0; k < order.size(); ++k) {
        const double a = cfg.a_values[order[k]];
        const double a2 = a * a;
        try {
            const auto series = prop->densities(ensembles[k]);
            for (std::size_t t = 0; t < times.size(); ++t) {
                const auto& rho = series.rhos[t];
                const double c = concurrence_general(rho);
                res.rows.push_back({alpha, a2, times[t], c, series.norm_drift[t], series.energy_drift[t], is_x_form(rho), true});
            }
        } catch (const SolverError& e) {
            detail::append_error_rows(res.rows, alpha, a2, times);
            note(e.what());
        }
    }
    return res;
}

/// Every (alpha, method) job of the config, in config order
/// (alpha-major, then method). Output is independent of `workers`.
inline std::vector<ScenarioResult> compute_scenario(const ScenarioConfig& cfg, std::size_t workers) {
    const auto methods = cfg.methods();
    std::vector<ScenarioResult> results(cfg.alphas.size() * methods.size());
    parallel_for(results.size(), workers, [&](std::size_t i) {
        results[i] = run_job(cfg, cfg.alphas[i / methods.size()], methods[i % methods.size()]);
    });
    return results;
}

inline constexpr const char* kCsvHeader = "alpha,a_squared,time,concurrence,norm_drift,energy_drift,x_form_valid,status\n";

inline std::string format_csv(const ScenarioResult& res) {
    std::string out = kCsvHeader;
    char buf[256];
    for (const auto& r : res.rows) {
        std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e,%d,%s\n", r.alpha, r.a_squared, r.time,
                      r.concurrence, r.norm_drift, r.energy_drift, r.x_form_valid ? 1 : 0, r.ok ? "ok" : "solver_abort");
        out += buf;
    }
    return out;
}

inline std::string csv_file_name(const std::string& prefix, double alpha, Method method) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "_alpha%g_%s.csv", alpha, to_string(method));
    return prefix + buf;
}

struct RunSummary {
    std::vector<std::filesystem::path> files;
    std::size_t aborted_cells{0};
    std::string first_error;
};

/// Computes the scenario and writes one CSV per (alpha, method) under `dir`.
/// Throws std::ios_base::failure on I/O problems.
inline RunSummary run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& dir, std::size_t workers) {
    const auto results = compute_scenario(cfg, workers);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create output directory '" + dir.string() + "': " + ec.message());
    RunSummary summary;
    for (const auto& res : results) {
        const auto path = dir / csv_file_name(cfg.output, res.alpha, res.method);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::ios_base::failure("cannot open '" + path.string() + "' for writing");
        out << format_csv(res);
        out.close();
        if (!out) throw std::ios_base::failure("write failed for '" + path.string() + "'");
        summary.files.push_back(path);
        summary.aborted_cells += res.aborted_cells;
        if (summary.first_error.empty()) summary.first_error = res.first_error;
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Oracle comparison on a small bath.

struct OracleCheckRow {
    double alpha;
    double time;
    double c_exact;
    double c_d1;
    double c_exact_rwa;  // NaN in the SB frame
    double c_rwa;
};

struct OracleCheck {
    std::vector<OracleCheckRow> rows;
    double max_d1_deviation{0.0};
    double max_rwa_deviation{0.0};
    double max_ladder_change{0.0};
};

/// Exact truncated-Fock dynamics against D1 (and RWA in the rotated frame)
/// for the first a value of the sweep, on the [oracle] bath and window.
inline OracleCheck oracle_check(const ScenarioConfig& cfg) {
    OracleCheck out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto times = make_output_grid(cfg.oracle.t_max, cfg.output_every);
    const auto ens = to_ensemble(detail::cell_spec(cfg, cfg.a_values.front()));
    for (double alpha : cfg.alphas) {
        ModelParams p = cfg.model;
        p.alpha = alpha;
        p.n_modes = cfg.oracle.n_modes;
        p.t_max = cfg.oracle.t_max;
        const BathModes bath = discretize_bath(p);
        const auto exact = oracle::exact_densities(ens, cfg.initial.frame, false, p.delta, bath, cfg.oracle.n_max, times,
                                                   std::min(cfg.oracle.n_max + 1, oracle::kMaxOccupation));
        out.max_ladder_change = std::max(out.max_ladder_change, exact.ladder_change);
        const auto d1 = evolve_initial(detail::cell_spec(cfg, cfg.a_values.front()), Method::D1, p, bath, times);
        const bool rsb = cfg.initial.frame == Frame::RSB;
        std::vector<TwoQubitDensity> exact_rwa, rwa;
        if (rsb) {
            exact_rwa = oracle::exact_densities(ens, Frame::RSB, true, p.delta, bath, cfg.oracle.n_max, times).rhos;
            rwa = evolve_initial(detail::cell_spec(cfg, cfg.a_values.front()), Method::RWA, p, bath, times).rhos;
        }
        for (std::size_t t = 0; t < times.size(); ++t) {
            OracleCheckRow row{alpha, times[t], concurrence_general(exact.rhos[t]), concurrence_general(d1.rhos[t]), nan, nan};
            out.max_d1_deviation = std::max(out.max_d1_deviation, std::abs(row.c_exact - row.c_d1));
            if (rsb) {
                row.c_exact_rwa = concurrence_general(exact_rwa[t]);
                row.c_rwa = concurrence_general(rwa[t]);
                out.max_rwa_deviation = std::max(out.max_rwa_deviation, std::abs(row.c_exact_rwa - row.c_rwa));
            }
            out.rows.push_back(row);
        }
    }
    return out;
}

inline std::string format_oracle_csv(const OracleCheck& chk) {
    std::string out = "alpha,time,c_exact,c_d1,c_exact_rwa,c_rwa\n";
    char buf[192];
    for (const auto& r : chk.rows) {
        std::snprintf(buf, sizeof buf, "%.11e,%.11e,%.11e,%.11e,%.11e,%.11e\n", r.alpha, r.time, r.c_exact, r.c_d1,
                      r.c_exact_rwa, r.c_rwa);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Presets for the standard parameter grids.

inline const std::map<std::string, std::string>& presets() {
    static const std::map<std::string, std::string> table{
        {"fig1", R"(# Mixed initial state, D1 against RWA.
[model]
delta = 0.2
s = 1
omega_c = 1
n_modes = 400
dt = 0.02
t_max = 100
output_every = 0.2

[initial]
kind = mixed
frame = RSB

[sweep]
alpha = 0.01, 0.05, 0.1, 0.2
a = 0:1:0.02

[run]
method = both
output = fig1
)"},
        {"fig2-anti", R"(# Anti-Bell initial state, D1 in the rotated frame.
[model]
delta = 0.2
s = 1
omega_c = 1
n_modes = 400
dt = 0.02
t_max = 100
output_every = 0.2

[initial]
kind = anti_bell
frame = RSB

[sweep]
alpha = 0.01, 0.1, 0.2
a_squared = 0:1:0.02

[run]
method = D1
output = fig2-anti
)"},
        {"fig2-bell", R"(# Bell initial state, D1 in the rotated frame.
[model]
delta = 0.2
s = 1
omega_c = 1
n_modes = 400
dt = 0.02
t_max = 100
output_every = 0.2

[initial]
kind = bell
frame = RSB

[sweep]
alpha = 0.01, 0.1, 0.2
a_squared = 0:1:0.02

[run]
method = D1
output = fig2-bell
)"},
        {"fig3", R"(# Anti-Bell initial state in the untransformed frame.
[model]
delta = 0.2
s = 1
omega_c = 1
n_modes = 400
dt = 0.02
t_max = 100
output_every = 0.2

[initial]
kind = anti_bell
frame = SB

[sweep]
alpha = 0.03, 0.05, 0.1, 0.2
a = 0:1:0.02

[run]
method = D1
output = fig3
)"},
    };
    return table;
}

}  // namespace d1ent
