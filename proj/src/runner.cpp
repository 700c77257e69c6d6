#include "qhd/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "qhd/errors.hpp"
#include "qhd/nonequilibrium.hpp"
#include "qhd/permutation.hpp"
#include "qhd/verify.hpp"

namespace fs = std::filesystem;

namespace qhd {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- deterministic job pool ------------------------------------------------

void run_jobs(std::vector<std::function<void()>>& jobs, int threads) {
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    std::vector<std::exception_ptr> errors(jobs.size());
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            try {
                jobs[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                try {
                    jobs[i]();
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)  // first by job order, independent of scheduling
        if (e) std::rethrow_exception(e);
}

// ---- tolerance access ------------------------------------------------------

bool tol_has(const json& tolerances, const std::string& check) {
    return tolerances.contains(check) && tolerances[check].is_object();
}

double tol_num(const json& tolerances, const std::string& check, const char* key,
               double fallback) {
    if (!tol_has(tolerances, check)) return fallback;
    const json& t = tolerances[check];
    auto it = t.find(key);
    if (it == t.end() || !it->is_number()) return fallback;
    return it->get<double>();
}

bool tol_has_key(const json& tolerances, const std::string& check, const char* key) {
    return tol_has(tolerances, check) && tolerances[check].contains(key);
}

// ---- accumulated output rows -------------------------------------------------

struct ResidualRow {
    std::string equation;
    int level = 0;
    ResidualReport rep;
};

struct DeviationRow {
    std::string run_id;
    DeviationEntry entry;
};

struct MetricRow {
    std::string check, metric;
    double value = 0.0;
};

struct Collected {
    std::vector<ResidualRow> residuals;
    std::vector<DeviationRow> deviations;
    std::vector<MetricRow> metrics;
    std::vector<CheckOutcome> outcomes;

    void metric(const std::string& check, const std::string& name, double value) {
        metrics.push_back({check, name, value});
    }
};

// ---- per-refinement-level computation ---------------------------------------

struct LevelResult {
    int level = 0;
    int n = 0;
    double dx = 0.0, dt = 0.0;
    std::map<std::string, ResidualReport> eq_reports;
    double mixed_velocity = -1.0;
    ClassicalityMetric classicality_metric;
    bool has_classicality = false;
    std::pair<ResidualReport, ResidualReport> uniqueness;
    bool has_uniqueness = false;
};

struct EvolvedLevel {
    QuantumState state;
    double dt = 0.0;
};

EvolvedLevel evolve_level(const Scenario& s, const Grid& g, const Potential& pot) {
    const double dx = g.axis(0).dx();
    const double dt = s.evolution.courant * dx;
    const int steps = static_cast<int>(std::round(s.evolution.t_eval / dt));
    EvolveOptions vo;
    vo.method = s.evolution.method;
    QuantumState st = make_initial_state(s, g, pot);
    if (steps > 0) st = evolve(st, pot, dt, steps, vo);
    return {std::move(st), dt};
}

LevelResult compute_level(const Scenario& s, int level_index, int n,
                          const std::vector<EquationId>& eqs, bool is_final,
                          bool want_mixed, bool want_classicality, bool want_uniqueness) {
    LevelResult out;
    out.level = level_index;
    out.n = n;

    Grid g = make_grid(s.space, n);
    Potential pot = make_potential(s.potential);
    out.dx = g.axis(0).dx();
    EvolvedLevel ev = evolve_level(s, g, pot);
    out.dt = ev.dt;

    ExtractOptions eo;
    eo.scheme = s.scheme;
    AssemblyOptions ao;
    ao.scheme = s.scheme;
    EvolveOptions vo;
    vo.method = s.evolution.method;

    if (s.space.dim == 1) {
        HydroSlabs slabs = extract_slabs_1p(ev.state, pot, ev.dt, eo, vo);
        for (EquationId eq : eqs)
            out.eq_reports.emplace(to_string(eq), residual(eq, slabs, pot, ao));
        if (is_final && want_uniqueness) {
            const double c = tol_num(s.tolerances, "uniqueness", "c", 0.1);
            out.uniqueness = velocity_uniqueness_probe(slabs, pot, c, ao);
            out.has_uniqueness = true;
        }
    } else {
        TwoBodySlabs slabs = extract_slabs_2p(ev.state, pot, ev.dt, eo, vo);
        for (EquationId eq : eqs)
            out.eq_reports.emplace(to_string(eq), residual(eq, slabs, pot, ao));
        if (is_final && want_mixed)
            out.mixed_velocity = mixed_velocity_residual(
                slabs.curr, tol_num(s.tolerances, "mixed_velocity", "interior_rel", 1e-10));
        if (is_final && want_classicality) {
            out.classicality_metric = classicality(slabs, ao);
            out.has_classicality = true;
        }
    }
    return out;
}

// ---- check evaluation --------------------------------------------------------

void finish_equation_checks(const Scenario& s, const std::vector<std::string>& eq_names,
                            const std::vector<LevelResult>& levels, Collected& col) {
    for (const std::string& name : eq_names) {
        std::vector<ResidualReport> reports;
        for (const LevelResult& lv : levels) {
            auto it = lv.eq_reports.find(name);
            if (it == lv.eq_reports.end()) continue;
            ResidualReport r = it->second;
            r.scenario_id = s.id;
            reports.push_back(r);
            col.residuals.push_back({name, lv.level, r});
        }
        auto table = convergence_table(reports);

        json rows = json::array();
        for (const auto& row : table) {
            rows.push_back({{"n", row.n},
                            {"dx", row.dx},
                            {"dt", row.dt},
                            {"l1", row.norms.l1},
                            {"l2", row.norms.l2},
                            {"linf", row.norms.linf},
                            {"observed_order_l2", row.observed_order_l2},
                            {"monotone", row.monotone}});
        }

        CheckOutcome oc;
        oc.name = name;
        oc.details["rows"] = rows;
        const double final_linf = table.empty() ? 0.0 : table.back().norms.linf;
        oc.details["final_linf"] = final_linf;
        col.metric(name, "final_linf", final_linf);
        if (!table.empty()) col.metric(name, "final_l2", table.back().norms.l2);

        if (!tol_has(s.tolerances, name)) {
            oc.status = "info";
        } else {
            const double order_min = tol_num(s.tolerances, name, "order_min", 0.0);
            const double linf_max = tol_num(s.tolerances, name, "linf_max", 0.0);
            const double l2_floor = tol_num(s.tolerances, name, "l2_floor", 0.0);
            bool ok = true;
            // order asserted per refinement pair unless the finer level
            // already sits at/below the recorded numerical floor
            if (order_min > 0.0) {
                for (std::size_t i = 1; i < table.size(); ++i) {
                    const bool at_floor = table[i].norms.l2 <= l2_floor;
                    const bool order_ok = table[i].observed_order_l2 >= order_min;
                    if (!(order_ok || at_floor)) ok = false;
                    col.metric(name, "order_" + std::to_string(i), table[i].observed_order_l2);
                }
            }
            if (tol_has_key(s.tolerances, name, "linf_max") && final_linf > linf_max) ok = false;
            oc.status = ok ? "pass" : "fail";
        }
        col.outcomes.push_back(std::move(oc));
    }
}

void finish_scalar_checks(const Scenario& s, const std::vector<LevelResult>& levels,
                          bool want_mixed, bool want_classicality, bool want_uniqueness,
                          Collected& col) {
    const LevelResult* fin = levels.empty() ? nullptr : &levels.back();
    if (want_mixed) {
        CheckOutcome oc;
        oc.name = "mixed_velocity";
        const double v = fin ? fin->mixed_velocity : -1.0;
        oc.details["linf"] = v;
        col.metric("mixed_velocity", "linf", v);
        if (tol_has_key(s.tolerances, "mixed_velocity", "linf_max"))
            oc.status = v >= 0 && v <= tol_num(s.tolerances, "mixed_velocity", "linf_max", 0.0)
                            ? "pass"
                            : "fail";
        else
            oc.status = "info";
        col.outcomes.push_back(std::move(oc));
    }
    if (want_classicality) {
        CheckOutcome oc;
        oc.name = "classicality";
        ClassicalityMetric m = fin ? fin->classicality_metric : ClassicalityMetric{};
        oc.details = {{"cross_norm", m.cross_norm},
                      {"total_norm", m.total_norm},
                      {"ratio", m.ratio}};
        col.metric("classicality", "cross_norm", m.cross_norm);
        col.metric("classicality", "total_norm", m.total_norm);
        col.metric("classicality", "ratio", m.ratio);
        if (tol_has_key(s.tolerances, "classicality", "cross_norm_min"))
            oc.status = m.cross_norm >
                                tol_num(s.tolerances, "classicality", "cross_norm_min", 0.0)
                            ? "pass"
                            : "fail";
        else
            oc.status = "info";
        col.outcomes.push_back(std::move(oc));
    }
    if (want_uniqueness) {
        CheckOutcome oc;
        oc.name = "uniqueness";
        if (fin && fin->has_uniqueness) {
            const auto& [clean, corrupted] = fin->uniqueness;
            const double factor =
                clean.norms.linf > 0 ? corrupted.norms.linf / clean.norms.linf : 0.0;
            oc.details = {{"c", tol_num(s.tolerances, "uniqueness", "c", 0.1)},
                          {"clean_linf", clean.norms.linf},
                          {"corrupted_linf", corrupted.norms.linf},
                          {"factor", factor}};
            ResidualReport rc = clean, rx = corrupted;
            rc.scenario_id = s.id;
            rx.scenario_id = s.id;
            col.residuals.push_back({"uniqueness_clean", fin->level, rc});
            col.residuals.push_back({"uniqueness_corrupted", fin->level, rx});
            col.metric("uniqueness", "clean_linf", clean.norms.linf);
            col.metric("uniqueness", "corrupted_linf", corrupted.norms.linf);
            col.metric("uniqueness", "factor", factor);
            bool ok = true;
            if (tol_has_key(s.tolerances, "uniqueness", "clean_linf_max") &&
                clean.norms.linf > tol_num(s.tolerances, "uniqueness", "clean_linf_max", 0.0))
                ok = false;
            if (tol_has_key(s.tolerances, "uniqueness", "factor_min") &&
                factor < tol_num(s.tolerances, "uniqueness", "factor_min", 0.0))
                ok = false;
            oc.status = tol_has(s.tolerances, "uniqueness") ? (ok ? "pass" : "fail") : "info";
        } else {
            oc.status = "fail";
            oc.details["error"] = "uniqueness probe not computed";
        }
        col.outcomes.push_back(std::move(oc));
    }
}

CheckOutcome run_permutation_check(const Scenario& s, Collected& col) {
    if (s.space.dim != 2)
        throw SchemaError("checks: 'permutation' requires a two-body scenario");
    Grid g = make_grid(s.space);
    Potential pot = make_potential(s.potential);
    SwapMap map = SwapMap::create(g.as_2d());
    ExtractOptions eo;
    eo.scheme = s.scheme;
    AssemblyOptions ao;
    ao.scheme = s.scheme;
    EvolveOptions vo;
    vo.method = s.evolution.method;

    const double dx = g.axis(0).dx();
    const double dt = s.evolution.courant * dx;

    QuantumState initial = make_initial_state(s, g, pot);
    BornPermutationReport born =
        born_permutation_test(initial, pot, dt, s.perm.snapshots, s.perm.stride, eo, vo, ao);

    // operator-level diagnostics at the evaluation time
    EvolvedLevel ev = evolve_level(s, g, pot);
    TwoBodySlabs slabs = extract_slabs_2p(ev.state, pot, ev.dt, eo, vo);
    LambdaOperator op(slabs, ao);

    auto probes = random_probe_densities(g, std::max(2, s.perm.probes), s.seed);
    MaskField excl = dilate(op.node_mask(), ao.halo + 2);
    double linearity_worst = 0.0;
    for (std::size_t k = 0; k + 1 < probes.size(); k += 2) {
        const double al = 0.6 + 0.01 * static_cast<double>(k % 7), be = -1.1;
        RealField combo(g);
        for (std::size_t i = 0; i < combo.size(); ++i)
            combo[i] = al * probes[k][i] + be * probes[k + 1][i];
        RealField lhs = op.apply(combo);
        RealField ra = op.apply(probes[k]);
        RealField rb = op.apply(probes[k + 1]);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            if (excl[i]) continue;
            worst = std::max(worst, std::abs(lhs[i] - al * ra[i] - be * rb[i]));
            scale = std::max(scale, std::abs(lhs[i]));
        }
        if (scale > 0) linearity_worst = std::max(linearity_worst, worst / scale);
    }

    std::vector<RealField> defect_probes(probes.begin(),
                                         probes.begin() + std::min<std::size_t>(8, probes.size()));
    defect_probes.emplace_back(g, 1.0);  // constant probe
    const double defect = lambda_symmetry_defect(op, defect_probes, map);

    // equivalence of the two wave-equation assemblies
    RealField d2t = second_time_derivative(
        make_time_slabs(slabs.prev.rho, slabs.curr.rho, slabs.next.rho, slabs.dt));
    RealField lr = op.apply(slabs.curr.rho);
    RealField via_lambda = d2t - lr;
    MaskField rexcl = interior_exclusion(slabs, ao);
    const double n_lambda = masked_norm(via_lambda, rexcl, NormKind::L2, true);
    ResidualReport wave = residual(EquationId::wave_2p, slabs, pot, ao);
    const double equiv_rel =
        wave.norms.l2 > 0 ? std::abs(n_lambda / wave.norms.l2 - 1.0) : 0.0;

    CheckOutcome oc;
    oc.name = "permutation";
    double delta_initial_frac = 0.0, delta_final_frac = 0.0;
    if (!born.entries.empty()) {
        delta_initial_frac = born.entries.front().delta_linf / born.entries.front().rho_linf;
        delta_final_frac = born.entries.back().delta_linf / born.entries.back().rho_linf;
    }
    json entries = json::array();
    for (const auto& e : born.entries)
        entries.push_back({{"t", e.t},
                           {"delta_linf", e.delta_linf},
                           {"delta_l2", e.delta_l2},
                           {"rho_linf", e.rho_linf},
                           {"eq21_linf", e.eq21_linf},
                           {"eq21_l2", e.eq21_l2}});
    oc.details = {{"born_entries", entries},
                  {"max_delta_linf", born.max_delta_linf},
                  {"max_eq21_linf", born.max_eq21_linf},
                  {"delta_initial_frac", delta_initial_frac},
                  {"delta_final_frac", delta_final_frac},
                  {"linearity_rel", linearity_worst},
                  {"swap_defect", defect},
                  {"defect_over_dx2", defect / (dx * dx)},
                  {"lambda_equivalence_rel", equiv_rel}};
    col.metric("permutation", "max_delta_linf", born.max_delta_linf);
    col.metric("permutation", "max_eq21_linf", born.max_eq21_linf);
    col.metric("permutation", "delta_initial_frac", delta_initial_frac);
    col.metric("permutation", "delta_final_frac", delta_final_frac);
    col.metric("permutation", "linearity_rel", linearity_worst);
    col.metric("permutation", "swap_defect", defect);
    col.metric("permutation", "lambda_equivalence_rel", equiv_rel);

    if (!tol_has(s.tolerances, "permutation")) {
        oc.status = "info";
        return oc;
    }
    bool ok = true;
    auto check_max = [&](const char* key, double value) {
        if (tol_has_key(s.tolerances, "permutation", key) &&
            value > tol_num(s.tolerances, "permutation", key, 0.0))
            ok = false;
    };
    auto check_min = [&](const char* key, double value) {
        if (tol_has_key(s.tolerances, "permutation", key) &&
            value < tol_num(s.tolerances, "permutation", key, 0.0))
            ok = false;
    };
    check_max("delta_linf_max", born.max_delta_linf);
    check_max("linearity_max", linearity_worst);
    check_max("eq21_linf_max", born.max_eq21_linf);
    check_max("equivalence_rel_max", equiv_rel);
    if (tol_has_key(s.tolerances, "permutation", "defect_coeff_max") &&
        defect > tol_num(s.tolerances, "permutation", "defect_coeff_max", 0.0) * dx * dx)
        ok = false;
    check_min("defect_min", defect);
    check_min("delta_initial_min_frac", delta_initial_frac);
    check_min("delta_final_min_frac", delta_final_frac);
    oc.status = ok ? "pass" : "fail";
    return oc;
}

RealField perturbed_density(const RealField& rho, double amplitude) {
    const Grid& g = rho.grid();
    const double L = g.axis(0).length();
    RealField out(g);
    double sum = 0.0;
    for (int i = 0; i < g.extent(0); ++i) {
        const double x = g.axis(0).point(i);
        out.at(i) = rho.at(i) *
                    (1.0 + amplitude * std::sin(2.0 * std::numbers::pi * x / L));
        sum += out.at(i);
    }
    const double inv = 1.0 / (sum * g.cell_volume());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
    return out;
}

CheckOutcome run_noneq_guided(const Scenario& s, Collected& col) {
    if (s.space.dim != 1)
        throw SchemaError("checks: 'noneq_guided' requires a single-particle scenario");
    Grid g = make_grid(s.space);
    Potential pot = make_potential(s.potential);
    ExtractOptions eo;
    eo.scheme = s.scheme;
    EvolveOptions vo;
    vo.method = s.evolution.method;

    const double dx = g.axis(0).dx();
    const double dt = s.noneq.courant * dx;
    const int steps =
        s.noneq.t_final > 0 ? static_cast<int>(std::round(s.noneq.t_final / dt)) : s.noneq.steps;

    auto transport = [&](double perturbation, const std::string& run_id, json& detail) {
        QuantumState psi = make_initial_state(s, g, pot);
        RealField rho0 = density(psi);
        if (perturbation > 0) rho0 = perturbed_density(rho0, perturbation);
        NoneqState st = noneq_from_density(rho0, NoneqMode::guided_transport, s.noneq.floor_rel);
        DeviationTrace trace;
        DeviationEntry last{};
        for (int k = 0; k < steps; ++k) {
            HydroFields h = extract_1p(psi, pot, eo);
            st = step_guided(st, h.v, dt);
            psi = evolve(psi, pot, dt, 1, vo);
            if ((k + 1) % s.noneq.trace_stride == 0 || k + 1 == steps) {
                trace.append(deviation(st, density(psi), psi.t));
                last = trace.entries.back();
                col.deviations.push_back({run_id, last});
            }
        }
        detail["l1_final"] = last.l1;
        detail["ratio_final"] = last.ratio;
        detail["linf_final"] = last.linf;
        detail["mass_drift"] = std::abs(noneq_mass(st) - 1.0);
        detail["steps"] = steps;
        detail["dt"] = dt;
        return last;
    };

    CheckOutcome oc;
    oc.name = "noneq_guided";
    json main_detail;
    DeviationEntry last = transport(0.0, s.id, main_detail);
    oc.details["equilibrium"] = main_detail;
    col.metric("noneq_guided", "l1_final", last.l1);
    col.metric("noneq_guided", "mass_drift", main_detail["mass_drift"].get<double>());

    bool ok = main_detail["mass_drift"].get<double>() < 1e-6;  // monitored invariant
    if (tol_has_key(s.tolerances, "noneq_guided", "l1_max") &&
        last.l1 > tol_num(s.tolerances, "noneq_guided", "l1_max", 0.0))
        ok = false;

    if (s.noneq.perturbation > 0) {
        json pert_detail;
        try {
            transport(s.noneq.perturbation, s.id + "-perturbed", pert_detail);
            pert_detail["completed"] = true;
        } catch (const NumericalAbort& e) {
            pert_detail["completed"] = false;
            pert_detail["rejection"] = e.what();
        }
        oc.details["perturbed"] = pert_detail;
    }

    oc.status = tol_has(s.tolerances, "noneq_guided") ? (ok ? "pass" : "fail") : "info";
    return oc;
}

CheckOutcome run_noneq_selfconsistent(const Scenario& s, Collected& col) {
    if (s.space.dim != 1)
        throw SchemaError("checks: 'noneq_selfconsistent' requires a single-particle scenario");
    Grid g = make_grid(s.space);
    Potential pot = make_potential(s.potential);
    EvolveOptions vo;
    vo.method = s.evolution.method;

    const double dx = g.axis(0).dx();
    const double dt = s.noneq.dt_factor * dx * dx * s.physics.m / s.physics.hbar;
    const int steps =
        s.noneq.t_final > 0 ? static_cast<int>(std::round(s.noneq.t_final / dt)) : s.noneq.steps;

    QuantumState psi0 = make_initial_state(s, g, pot);

    auto integrate = [&](double perturbation, const std::string& run_id, json& detail) {
        RealField rho0 = density(psi0);
        if (perturbation > 0) rho0 = perturbed_density(rho0, perturbation);
        NoneqState st = noneq_from_density(rho0, NoneqMode::self_consistent, s.noneq.floor_rel);
        DeviationTrace trace;
        for (int k = 0; k < steps; ++k) {
            st = step_self_consistent(st, pot, s.physics, dt);
            if ((k + 1) % (s.noneq.trace_stride * 50) == 0 || k + 1 == steps) {
                // reference density at matching time from the exact layer
                const int ref_steps = 2048;
                QuantumState ref = evolve(psi0, pot, st.t / ref_steps, ref_steps, vo);
                trace.append(deviation(st, density(ref), ref.t));
                const DeviationEntry& e = trace.entries.back();
                col.deviations.push_back({run_id, e});
                detail["l1_final"] = e.l1;
                detail["linf_final"] = e.linf;
                detail["ratio_final"] = e.ratio;
            }
        }
        detail["mass_drift"] = std::abs(noneq_mass(st) - 1.0);
        detail["steps"] = steps;
        detail["dt"] = dt;
        detail["t_final"] = st.t;
    };

    CheckOutcome oc;
    oc.name = "noneq_selfconsistent";
    json main_detail;
    integrate(0.0, s.id, main_detail);
    oc.details["equilibrium"] = main_detail;
    const double l1 = main_detail.value("l1_final", 0.0);
    col.metric("noneq_selfconsistent", "l1_final", l1);
    col.metric("noneq_selfconsistent", "mass_drift", main_detail["mass_drift"].get<double>());

    bool ok = main_detail["mass_drift"].get<double>() < 1e-6;
    if (tol_has_key(s.tolerances, "noneq_selfconsistent", "l1_max") &&
        l1 > tol_num(s.tolerances, "noneq_selfconsistent", "l1_max", 0.0))
        ok = false;

    if (s.noneq.perturbation > 0) {
        json pert_detail;
        try {
            integrate(s.noneq.perturbation, s.id + "-perturbed", pert_detail);
            pert_detail["completed"] = true;
        } catch (const NumericalAbort& e) {
            pert_detail["completed"] = false;
            pert_detail["rejection"] = e.what();
        }
        oc.details["perturbed"] = pert_detail;
    }

    oc.status = tol_has(s.tolerances, "noneq_selfconsistent") ? (ok ? "pass" : "fail") : "info";
    return oc;
}

CheckOutcome run_literal_discrepancy(const Scenario& s, Collected& col) {
    Grid g = make_grid(s.space);
    Potential pot = make_potential(s.potential);
    ExtractOptions eo;
    eo.scheme = s.scheme;
    AssemblyOptions derived;
    derived.scheme = s.scheme;
    AssemblyOptions literal = derived;
    literal.printed_forms = true;
    EvolveOptions vo;
    vo.method = s.evolution.method;
    EvolvedLevel ev = evolve_level(s, g, pot);

    CheckOutcome oc;
    oc.name = "literal_discrepancy";
    oc.status = "info";

    if (s.space.dim == 1) {
        HydroSlabs slabs = extract_slabs_1p(ev.state, pot, ev.dt, eo, vo);
        const double derived_linf =
            residual(EquationId::momentum_1p, slabs, pot, derived).norms.linf;
        const double literal_linf =
            residual(EquationId::momentum_1p, slabs, pot, literal).norms.linf;

        ExtractOptions eo_lit = eo;
        eo_lit.pi_form = PiForm::printed;
        HydroSlabs slabs_lit = extract_slabs_1p(ev.state, pot, ev.dt, eo_lit, vo);
        const double pi_literal_linf =
            residual(EquationId::momentum_1p, slabs_lit, pot, derived).norms.linf;

        oc.details = {{"momentum_derived_linf", derived_linf},
                      {"momentum_literal_factor_linf", literal_linf},
                      {"momentum_literal_pi_form_linf", pi_literal_linf},
                      {"note", "literal forms reproduce the derived ones only at m = 1; "
                               "the printed stress form is adjudicated by this residual"}};
        col.metric("literal_discrepancy", "momentum_derived_linf", derived_linf);
        col.metric("literal_discrepancy", "momentum_literal_factor_linf", literal_linf);
        col.metric("literal_discrepancy", "momentum_literal_pi_form_linf", pi_literal_linf);
    } else {
        TwoBodySlabs slabs = extract_slabs_2p(ev.state, pot, ev.dt, eo, vo);
        MaskField excl = interior_exclusion(slabs, derived);
        json d;
        for (int which : {1, 2}) {
            RealField rd = velocity_equation_residual(which, slabs, pot, false, derived);
            RealField rl = velocity_equation_residual(which, slabs, pot, true, derived);
            const double nd = masked_norm(rd, excl, NormKind::Linf, false);
            const double nl = masked_norm(rl, excl, NormKind::Linf, false);
            const std::string tag = "velocity_eq" + std::to_string(which);
            d[tag + "_derived_linf"] = nd;
            d[tag + "_literal_linf"] = nl;
            col.metric("literal_discrepancy", tag + "_derived_linf", nd);
            col.metric("literal_discrepancy", tag + "_literal_linf", nl);
        }
        d["note"] = "printed velocity-equation advection terms and mass factors hold for "
                    "equal masses only";
        oc.details = d;
    }
    return oc;
}

// ---- bundle IO ----------------------------------------------------------------

void write_bundle_files(const fs::path& dir, const Scenario& s, const RunBundle& bundle,
                        const Collected& col) {
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "bundle.json");
        json doc;
        doc["scenario"] = bundle.scenario_echo;
        doc["provenance"] = bundle.provenance;
        json checks = json::array();
        for (const CheckOutcome& oc : bundle.checks)
            checks.push_back({{"name", oc.name}, {"status", oc.status}, {"details", oc.details}});
        doc["checks"] = checks;
        out << doc.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "residuals.csv");
        out << "scenario_id,equation,level,n,dx,dt,L1,L2,Linf,interior_fraction\n";
        for (const ResidualRow& r : col.residuals)
            out << s.id << ',' << r.equation << ',' << r.level << ',' << r.rep.n << ','
                << fmt(r.rep.dx) << ',' << fmt(r.rep.dt) << ',' << fmt(r.rep.norms.l1) << ','
                << fmt(r.rep.norms.l2) << ',' << fmt(r.rep.norms.linf) << ','
                << fmt(r.rep.interior_fraction) << '\n';
    }
    {
        std::ofstream out(dir / "deviation.csv");
        out << "scenario_id,time,L1,Linf\n";
        for (const DeviationRow& r : col.deviations)
            out << r.run_id << ',' << fmt(r.entry.time) << ',' << fmt(r.entry.l1) << ','
                << fmt(r.entry.linf) << '\n';
    }
    {
        std::ofstream out(dir / "metrics.csv");
        out << "scenario_id,check,metric,value\n";
        for (const MetricRow& r : col.metrics)
            out << s.id << ',' << r.check << ',' << r.metric << ',' << fmt(r.value) << '\n';
    }
}

std::string default_out_root() {
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
    return "runs";
}

}  // namespace

RunBundle run_scenario(const Scenario& s, const RunOptions& opts) {
    // split requested checks
    std::vector<std::string> eq_names;
    bool want_mixed = false, want_classicality = false, want_uniqueness = false;
    bool want_perm = false, want_guided = false, want_selfcons = false, want_literal = false;
    for (const std::string& c : s.checks) {
        if (auto eq = equation_from_string(c)) {
            if (is_two_body(*eq) != (s.space.dim == 2))
                throw SchemaError("checks: '" + c + "' does not match space.dim");
            eq_names.push_back(c);
        } else if (c == "mixed_velocity") {
            if (s.space.dim != 2) throw SchemaError("checks: 'mixed_velocity' requires dim 2");
            want_mixed = true;
        } else if (c == "classicality") {
            if (s.space.dim != 2) throw SchemaError("checks: 'classicality' requires dim 2");
            want_classicality = true;
        } else if (c == "uniqueness") {
            if (s.space.dim != 1) throw SchemaError("checks: 'uniqueness' requires dim 1");
            want_uniqueness = true;
        } else if (c == "permutation") {
            want_perm = true;
        } else if (c == "noneq_guided") {
            want_guided = true;
        } else if (c == "noneq_selfconsistent") {
            want_selfcons = true;
        } else if (c == "literal_discrepancy") {
            want_literal = true;
        }
    }

    Collected col;
    std::vector<EquationId> eqs;
    for (const auto& name : eq_names) eqs.push_back(*equation_from_string(name));

    const bool need_levels =
        !eqs.empty() || want_mixed || want_classicality || want_uniqueness;
    std::vector<LevelResult> levels(need_levels ? s.refinements.size() : 0);

    // level jobs + suite jobs, fanned out across the worker pool; results
    // land in fixed slots so the merge order never depends on scheduling
    std::vector<std::function<void()>> jobs;
    if (need_levels) {
        for (std::size_t li = 0; li < s.refinements.size(); ++li) {
            const bool is_final = li + 1 == s.refinements.size();
            jobs.push_back([&, li, is_final] {
                levels[li] = compute_level(s, static_cast<int>(li), s.refinements[li], eqs,
                                           is_final, want_mixed, want_classicality,
                                           want_uniqueness);
            });
        }
    }
    CheckOutcome perm_oc, guided_oc, selfcons_oc, literal_oc;
    Collected perm_col, guided_col, selfcons_col, literal_col;
    if (want_perm) jobs.push_back([&] { perm_oc = run_permutation_check(s, perm_col); });
    if (want_guided) jobs.push_back([&] { guided_oc = run_noneq_guided(s, guided_col); });
    if (want_selfcons)
        jobs.push_back([&] { selfcons_oc = run_noneq_selfconsistent(s, selfcons_col); });
    if (want_literal)
        jobs.push_back([&] { literal_oc = run_literal_discrepancy(s, literal_col); });

    run_jobs(jobs, opts.threads);

    // deterministic merge in the order checks were requested
    Collected eq_col;
    finish_equation_checks(s, eq_names, levels, eq_col);
    finish_scalar_checks(s, levels, want_mixed, want_classicality, want_uniqueness, eq_col);

    RunBundle bundle;
    for (const std::string& c : s.checks) {
        const Collected* src = nullptr;
        const CheckOutcome* oc = nullptr;
        if (equation_from_string(c) || c == "mixed_velocity" || c == "classicality" ||
            c == "uniqueness") {
            for (const CheckOutcome& k : eq_col.outcomes)
                if (k.name == c) oc = &k;
        } else if (c == "permutation") {
            oc = &perm_oc;
            src = &perm_col;
        } else if (c == "noneq_guided") {
            oc = &guided_oc;
            src = &guided_col;
        } else if (c == "noneq_selfconsistent") {
            oc = &selfcons_oc;
            src = &selfcons_col;
        } else if (c == "literal_discrepancy") {
            oc = &literal_oc;
            src = &literal_col;
        }
        if (oc) {
            bundle.checks.push_back(*oc);
            if (oc->status == "fail") bundle.all_passed = false;
        }
        if (src) {
            col.residuals.insert(col.residuals.end(), src->residuals.begin(),
                                 src->residuals.end());
            col.deviations.insert(col.deviations.end(), src->deviations.begin(),
                                  src->deviations.end());
            col.metrics.insert(col.metrics.end(), src->metrics.begin(), src->metrics.end());
        }
    }
    col.residuals.insert(col.residuals.end(), eq_col.residuals.begin(), eq_col.residuals.end());
    col.deviations.insert(col.deviations.end(), eq_col.deviations.begin(),
                          eq_col.deviations.end());
    col.metrics.insert(col.metrics.end(), eq_col.metrics.begin(), eq_col.metrics.end());

    bundle.scenario_echo = scenario_to_json(s);
    const auto now = std::chrono::system_clock::now();
    const auto t_c = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t_c));
    bundle.provenance = {{"version", kVersion},
                         {"scheme", to_string(s.scheme)},
                         {"pi_form", "quantum_stress"},
                         {"printed_forms", false},
                         {"threads", opts.threads},
                         {"seed", s.seed},
                         {"timestamp", stamp}};

    const fs::path dir =
        fs::path(opts.out_root.empty() ? default_out_root() : opts.out_root) / s.output;
    write_bundle_files(dir, s, bundle, col);
    bundle.dir = dir.string();
    return bundle;
}

// ---- CLI commands ---------------------------------------------------------------

namespace {

const BundledScenario* find_bundled(const std::string& id) {
    for (const BundledScenario& b : bundled_scenarios())
        if (id == b.id) return &b;
    return nullptr;
}

json load_scenario_ref(const std::string& ref) {
    if (const BundledScenario* b = find_bundled(ref)) return json::parse(b->text);
    std::ifstream in(ref);
    if (!in) throw SchemaError("scenario '" + ref + "' is neither a bundled id nor a readable file");
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception& e) {
        throw SchemaError("scenario JSON parse error in " + ref + ": " + e.what());
    }
}

}  // namespace

int cmd_run(const std::string& scenario_ref, const std::vector<std::string>& overrides,
            const RunOptions& opts, std::ostream& out) {
    try {
        json doc = apply_overrides(load_scenario_ref(scenario_ref), overrides);
        Scenario s = parse_scenario(doc);
        RunBundle bundle = run_scenario(s, opts);
        if (opts.json_output) {
            json summary;
            summary["dir"] = bundle.dir;
            summary["all_passed"] = bundle.all_passed;
            json checks = json::array();
            for (const CheckOutcome& oc : bundle.checks)
                checks.push_back({{"name", oc.name}, {"status", oc.status}});
            summary["checks"] = checks;
            out << summary.dump(2) << "\n";
        } else {
            out << "scenario " << s.id << " -> " << bundle.dir << "\n";
            for (const CheckOutcome& oc : bundle.checks)
                out << "  " << oc.name << ": " << oc.status << "\n";
            out << (bundle.all_passed ? "all checks passed" : "TOLERANCE FAILURE") << "\n";
        }
        return bundle.all_passed ? 0 : 1;
    } catch (const SchemaError& e) {
        out << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalAbort& e) {
        out << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        out << "schema error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_list(const std::string& filter, bool as_json, std::ostream& out) {
    json arr = json::array();
    for (const BundledScenario& b : bundled_scenarios()) {
        if (!filter.empty() && std::string(b.id).find(filter) == std::string::npos) continue;
        arr.push_back({{"id", b.id}, {"description", b.description}});
    }
    if (as_json) {
        out << arr.dump(2) << "\n";
        return 0;
    }
    for (const auto& e : arr)
        out << e["id"].get<std::string>() << "\t" << e["description"].get<std::string>() << "\n";
    return 0;
}

int cmd_report(const std::string& dir, bool as_json, std::ostream& out) {
    const fs::path root(dir);
    if (!fs::exists(root / "bundle.json")) {
        out << "no bundle found in '" << dir << "'\n";
        return 1;
    }
    std::vector<std::string> missing;
    for (const char* f : {"residuals.csv", "deviation.csv", "metrics.csv"})
        if (!fs::exists(root / f)) missing.emplace_back(f);
    if (!missing.empty()) {
        out << "partial bundle, missing:";
        for (const auto& m : missing) out << " " << m;
        out << "\n";
        return 1;
    }

    json doc;
    {
        std::ifstream in(root / "bundle.json");
        in >> doc;
    }

    // residual rows from the CSV (the summary prints CSV-backed numbers)
    struct Row {
        std::string eq;
        int level, n;
        double dx, dt, l1, l2, linf, frac;
    };
    std::vector<Row> rows;
    {
        std::ifstream in(root / "residuals.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string cell;
            Row r;
            std::getline(ss, cell, ',');  // scenario id
            std::getline(ss, r.eq, ',');
            std::getline(ss, cell, ',');
            r.level = std::stoi(cell);
            std::getline(ss, cell, ',');
            r.n = std::stoi(cell);
            auto num = [&] {
                std::getline(ss, cell, ',');
                return std::stod(cell);
            };
            r.dx = num();
            r.dt = num();
            r.l1 = num();
            r.l2 = num();
            r.linf = num();
            r.frac = num();
            rows.push_back(r);
        }
    }

    if (as_json) {
        json res;
        res["bundle"] = doc;
        json table = json::array();
        for (const Row& r : rows)
            table.push_back({{"equation", r.eq},
                             {"level", r.level},
                             {"n", r.n},
                             {"dx", r.dx},
                             {"dt", r.dt},
                             {"L1", r.l1},
                             {"L2", r.l2},
                             {"Linf", r.linf},
                             {"interior_fraction", r.frac}});
        res["residual_rows"] = table;
        out << res.dump(2) << "\n";
        return 0;
    }

    // per-check scalar metrics, so the summary prints CSV-backed numbers
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> metrics;
    {
        std::ifstream in(root / "metrics.csv");
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string sid, check, metric, value;
            std::getline(ss, sid, ',');
            std::getline(ss, check, ',');
            std::getline(ss, metric, ',');
            std::getline(ss, value, ',');
            metrics[check].emplace_back(metric, value);
        }
    }

    const json& scn = doc["scenario"];
    out << "scenario " << scn.value("id", "?") << "  (scheme "
        << doc["provenance"].value("scheme", "?") << ", threads "
        << doc["provenance"].value("threads", 0) << ")\n";
    out << "  " << scn.value("description", "") << "\n\n";

    // convergence tables grouped by equation, orders from successive rows
    std::map<std::string, std::vector<Row>> by_eq;
    for (const Row& r : rows) by_eq[r.eq].push_back(r);
    for (auto& [eq, list] : by_eq) {
        out << eq << "\n";
        out << "    n        dx           dt           L2           Linf        order\n";
        for (std::size_t i = 0; i < list.size(); ++i) {
            char line[160];
            if (i == 0 || list[i - 1].l2 <= 0 || list[i].l2 <= 0)
                std::snprintf(line, sizeof line,
                              "    %-8d %-12.4e %-12.4e %-12.4e %-12.4e -\n", list[i].n,
                              list[i].dx, list[i].dt, list[i].l2, list[i].linf);
            else
                std::snprintf(line, sizeof line,
                              "    %-8d %-12.4e %-12.4e %-12.4e %-12.4e %.2f\n", list[i].n,
                              list[i].dx, list[i].dt, list[i].l2, list[i].linf,
                              observed_order(list[i - 1].l2, list[i].l2,
                                             list[i - 1].dx / list[i].dx));
            out << line;
        }
    }
    out << "\nchecks:\n";
    for (const json& c : doc["checks"]) {
        const std::string name = c.value("name", "?");
        out << "  " << name << ": " << c.value("status", "?") << "\n";
        auto it = metrics.find(name);
        if (it == metrics.end()) continue;
        for (const auto& [metric, value] : it->second)
            out << "      " << metric << " = " << value << "\n";
    }
    return 0;
}

}  // namespace qhd
