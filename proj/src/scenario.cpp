#include "qhd/scenario.hpp"

#include <fstream>
#include <set>

#include "qhd/errors.hpp"
#include "qhd/verify.hpp"

namespace qhd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw SchemaError("scenario field '" + field + "': " + why);
}

const json& need(const json& doc, const char* field) {
    auto it = doc.find(field);
    if (it == doc.end()) fail(field, "missing");
    return *it;
}

double need_num(const json& doc, const char* field) {
    const json& v = need(doc, field);
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

double opt_num(const json& doc, const char* field, double fallback) {
    auto it = doc.find(field);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) fail(field, "expected a number");
    return it->get<double>();
}

std::string need_str(const json& doc, const char* field) {
    const json& v = need(doc, field);
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
}

GaussianSpec parse_gaussian(const json& doc, const std::string& field) {
    GaussianSpec g;
    g.x0 = opt_num(doc, "x0", 0.0);
    g.sigma = opt_num(doc, "sigma", 1.0);
    g.k0 = opt_num(doc, "k0", 0.0);
    if (!(g.sigma > 0)) fail(field + ".sigma", "must be positive");
    return g;
}

}  // namespace

bool is_known_check(const std::string& name) {
    static const std::set<std::string> suites = {
        "mixed_velocity", "uniqueness", "classicality", "permutation",
        "noneq_guided", "noneq_selfconsistent", "literal_discrepancy"};
    return equation_from_string(name).has_value() || suites.contains(name);
}

Scenario parse_scenario(const json& doc) {
    Scenario s;
    if (!doc.is_object()) throw SchemaError("scenario: top-level JSON object expected");
    const json& ver = need(doc, "schema_version");
    if (!ver.is_number_integer() || ver.get<int>() != 1)
        fail("schema_version", "expected the integer 1");
    s.schema_version = 1;
    s.id = need_str(doc, "id");
    s.description = doc.value("description", std::string{});
    if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();
    const std::string scheme = doc.value("scheme", "spectral");
    if (scheme == "spectral")
        s.scheme = DiffScheme::spectral;
    else if (scheme == "fd2")
        s.scheme = DiffScheme::fd2;
    else if (scheme == "fd4")
        s.scheme = DiffScheme::fd4;
    else
        fail("scheme", "unknown scheme '" + scheme + "'");

    const json& sp = need(doc, "space");
    s.space.dim = static_cast<int>(opt_num(sp, "dim", 1));
    if (s.space.dim != 1 && s.space.dim != 2) fail("space.dim", "must be 1 or 2");
    s.space.n = static_cast<int>(need_num(sp, "n"));
    if (s.space.n < 8) fail("space.n", "must be at least 8");
    s.space.x_min = need_num(sp, "x_min");
    s.space.x_max = need_num(sp, "x_max");
    if (!(s.space.x_max > s.space.x_min)) fail("space.x_max", "must exceed x_min");
    const std::string b = sp.value("boundary", "periodic");
    if (b == "periodic")
        s.space.boundary = Boundary::periodic;
    else if (b == "dirichlet_zero")
        s.space.boundary = Boundary::dirichlet_zero;
    else
        fail("space.boundary", "unknown boundary '" + b + "'");

    const json& ph = need(doc, "physics");
    s.physics.hbar = opt_num(ph, "hbar", 1.0);
    s.physics.m = opt_num(ph, "m", 1.0);
    s.physics.m1 = opt_num(ph, "m1", 1.0);
    s.physics.m2 = opt_num(ph, "m2", 1.0);
    try {
        s.physics.validate();
    } catch (const std::invalid_argument& e) {
        fail("physics", e.what());
    }

    const json& pot = need(doc, "potential");
    s.potential.kind = need_str(pot, "kind");
    s.potential.omega = opt_num(pot, "omega", 0.0);
    s.potential.center = opt_num(pot, "center", 0.0);
    s.potential.kappa = opt_num(pot, "kappa", 0.0);
    s.potential.height = opt_num(pot, "height", 0.0);
    s.potential.width = opt_num(pot, "width", 0.0);
    if (s.potential.kind != "free" && s.potential.kind != "harmonic" &&
        s.potential.kind != "barrier" && s.potential.kind != "coupled_harmonic")
        fail("potential.kind", "unknown kind '" + s.potential.kind + "'");

    const json& ini = need(doc, "initial_state");
    s.initial.kind = need_str(ini, "kind");
    if (s.initial.kind == "gaussian") {
        s.initial.a = parse_gaussian(ini, "initial_state");
    } else if (s.initial.kind == "ho_ground") {
        // parameters come from the potential
    } else if (s.initial.kind == "product" || s.initial.kind == "symmetrized") {
        s.initial.a = parse_gaussian(need(ini, "a"), "initial_state.a");
        s.initial.b = parse_gaussian(need(ini, "b"), "initial_state.b");
        if (s.initial.kind == "symmetrized") {
            s.initial.sign = static_cast<int>(opt_num(ini, "sign", 1.0));
            if (s.initial.sign != 1 && s.initial.sign != -1)
                fail("initial_state.sign", "must be +1 or -1");
        }
    } else if (s.initial.kind == "coupled_mode_superposition") {
        s.initial.alpha_im = opt_num(ini, "alpha_im", 0.5);
    } else {
        fail("initial_state.kind", "unknown kind '" + s.initial.kind + "'");
    }

    const json& ev = need(doc, "evolution");
    const std::string method = ev.value("method", "split_step_spectral");
    if (method == "split_step_spectral")
        s.evolution.method = EvolveMethod::split_step_spectral;
    else if (method == "crank_nicolson")
        s.evolution.method = EvolveMethod::crank_nicolson;
    else
        fail("evolution.method", "unknown method '" + method + "'");
    s.evolution.courant = opt_num(ev, "courant", 0.2);
    if (!(s.evolution.courant > 0)) fail("evolution.courant", "must be positive");
    s.evolution.t_eval = opt_num(ev, "t_eval", 0.5);
    if (!(s.evolution.t_eval >= 0)) fail("evolution.t_eval", "must be non-negative");
    s.evolution.snapshot_stride = static_cast<int>(opt_num(ev, "snapshot_stride", 10));

    const json& checks = need(doc, "checks");
    if (!checks.is_array() || checks.empty()) fail("checks", "expected a non-empty array");
    for (const json& c : checks) {
        if (!c.is_string()) fail("checks", "entries must be strings");
        const std::string name = c.get<std::string>();
        if (!is_known_check(name)) fail("checks", "unknown check '" + name + "'");
        s.checks.push_back(name);
    }

    if (doc.contains("refinements")) {
        const json& refs = doc["refinements"];
        if (!refs.is_array()) fail("refinements", "expected an array");
        int prev = 0;
        for (const json& r : refs) {
            const int n = r.get<int>();
            if (n <= prev) fail("refinements", "must be strictly increasing");
            s.refinements.push_back(n);
            prev = n;
        }
    }
    if (s.refinements.empty()) s.refinements.push_back(s.space.n);

    if (doc.contains("noneq")) {
        const json& nq = doc["noneq"];
        s.noneq.steps = static_cast<int>(opt_num(nq, "steps", 1000));
        s.noneq.t_final = opt_num(nq, "t_final", 0.0);
        s.noneq.courant = opt_num(nq, "courant", 0.4);
        s.noneq.dt_factor = opt_num(nq, "dt_factor", 0.05);
        s.noneq.perturbation = opt_num(nq, "perturbation", 0.0);
        s.noneq.floor_rel = opt_num(nq, "floor_rel", 1e-14);
        s.noneq.trace_stride = static_cast<int>(opt_num(nq, "trace_stride", 10));
    }
    if (doc.contains("permutation")) {
        const json& pm = doc["permutation"];
        s.perm.snapshots = static_cast<int>(opt_num(pm, "snapshots", 3));
        s.perm.stride = static_cast<int>(opt_num(pm, "stride", 20));
        s.perm.probes = static_cast<int>(opt_num(pm, "probes", 100));
    }

    s.tolerances = doc.value("tolerances", json::object());
    if (!s.tolerances.is_object()) fail("tolerances", "expected an object");
    s.output = doc.value("output", s.id);
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open scenario file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("scenario JSON parse error in " + path + ": " + e.what());
    }
    return parse_scenario(doc);
}

nlohmann::json apply_overrides(json doc, const std::vector<std::string>& overrides) {
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw SchemaError("override '" + ov + "' is not of the form key=value");
        const std::string path = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // plain string
        }
        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = path.find('.', start);
            const std::string key = path.substr(start, dot - start);
            if (key.empty()) throw SchemaError("override path '" + path + "' has an empty key");
            if (dot == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            node = &(*node)[key];
            start = dot + 1;
        }
    }
    return doc;
}

nlohmann::json scenario_to_json(const Scenario& s) {
    json doc;
    doc["schema_version"] = s.schema_version;
    doc["id"] = s.id;
    doc["description"] = s.description;
    doc["seed"] = s.seed;
    doc["space"] = {
        {"dim", s.space.dim},
        {"n", s.space.n},
        {"x_min", s.space.x_min},
        {"x_max", s.space.x_max},
        {"boundary", s.space.boundary == Boundary::periodic ? "periodic" : "dirichlet_zero"}};
    doc["physics"] = {{"hbar", s.physics.hbar},
                      {"m", s.physics.m},
                      {"m1", s.physics.m1},
                      {"m2", s.physics.m2}};
    json pot{{"kind", s.potential.kind}};
    if (s.potential.kind == "harmonic") {
        pot["omega"] = s.potential.omega;
        pot["center"] = s.potential.center;
    } else if (s.potential.kind == "coupled_harmonic") {
        pot["omega"] = s.potential.omega;
        pot["kappa"] = s.potential.kappa;
    } else if (s.potential.kind == "barrier") {
        pot["height"] = s.potential.height;
        pot["width"] = s.potential.width;
        pot["center"] = s.potential.center;
    }
    doc["potential"] = pot;
    json ini{{"kind", s.initial.kind}};
    auto gspec = [](const GaussianSpec& g) {
        return json{{"x0", g.x0}, {"sigma", g.sigma}, {"k0", g.k0}};
    };
    if (s.initial.kind == "gaussian") {
        ini.update(gspec(s.initial.a));
    } else if (s.initial.kind == "product" || s.initial.kind == "symmetrized") {
        ini["a"] = gspec(s.initial.a);
        ini["b"] = gspec(s.initial.b);
        if (s.initial.kind == "symmetrized") ini["sign"] = s.initial.sign;
    } else if (s.initial.kind == "coupled_mode_superposition") {
        ini["alpha_im"] = s.initial.alpha_im;
    }
    doc["initial_state"] = ini;
    doc["evolution"] = {
        {"method",
         s.evolution.method == EvolveMethod::split_step_spectral ? "split_step_spectral"
                                                                 : "crank_nicolson"},
        {"courant", s.evolution.courant},
        {"t_eval", s.evolution.t_eval},
        {"snapshot_stride", s.evolution.snapshot_stride}};
    doc["checks"] = s.checks;
    doc["refinements"] = s.refinements;
    doc["scheme"] = to_string(s.scheme);
    doc["noneq"] = {{"steps", s.noneq.steps},
                    {"t_final", s.noneq.t_final},
                    {"courant", s.noneq.courant},
                    {"dt_factor", s.noneq.dt_factor},
                    {"perturbation", s.noneq.perturbation},
                    {"floor_rel", s.noneq.floor_rel},
                    {"trace_stride", s.noneq.trace_stride}};
    doc["permutation"] = {{"snapshots", s.perm.snapshots},
                          {"stride", s.perm.stride},
                          {"probes", s.perm.probes}};
    doc["tolerances"] = s.tolerances;
    doc["output"] = s.output;
    return doc;
}

Grid make_grid(const SpaceSpec& space, int n_override) {
    const int n = n_override > 0 ? n_override : space.n;
    Grid1D ax{n, space.x_min, space.x_max, space.boundary};
    if (space.dim == 1) return Grid(ax);
    return Grid(Grid2D{ax, ax});
}

Potential make_potential(const PotentialSpec& spec) {
    if (spec.kind == "free") return Potential::free_space();
    if (spec.kind == "harmonic") return Potential::harmonic(spec.omega, spec.center);
    if (spec.kind == "barrier")
        return Potential::barrier(spec.height, spec.width, spec.center);
    return Potential::coupled_harmonic(spec.omega, spec.kappa);
}

QuantumState make_initial_state(const Scenario& s, const Grid& g, const Potential& pot) {
    if (s.initial.kind == "gaussian") return make_gaussian(g, s.physics, s.initial.a);
    if (s.initial.kind == "ho_ground") return make_ho_ground(g, s.physics, pot);
    if (s.initial.kind == "product") return make_product(g, s.physics, s.initial.a, s.initial.b);
    if (s.initial.kind == "symmetrized")
        return make_symmetrized(g, s.physics, s.initial.a, s.initial.b, s.initial.sign);
    return make_coupled_mode_superposition(g, s.physics, s.potential.omega, s.potential.kappa,
                                           std::complex<double>(0.0, s.initial.alpha_im));
}

}  // namespace qhd
