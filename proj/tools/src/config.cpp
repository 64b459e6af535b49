#include "exitlab_app/config.hpp"

#include "exitlab/sde.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace exitlab::app {

using json = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

/// Walks one JSON object, recording violations under a dotted key path.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {}

    void allow(std::initializer_list<const char*> keys) {
        if (!obj_.is_object()) {
            fail(path_.empty() ? "(root)" : path_, "must be an object");
            return;
        }
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : obj_.items())
            if (!ok.count(k)) fail(at(k), "unknown key");
    }

    [[nodiscard]] bool has(const char* key) const { return obj_.is_object() && obj_.contains(key); }
    [[nodiscard]] const json& get(const char* key) const { return obj_.at(key); }
    [[nodiscard]] std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void fail(const std::string& path, const std::string& msg) { errors_.push_back(path + ": " + msg); }

    void positive(const char* key, double& out) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number()) return fail(at(key), "must be a number");
        const double x = v.get<double>();
        if (!(x > 0.0) || !std::isfinite(x)) return fail(at(key), "must be positive and finite");
        out = x;
    }

    void fraction(const char* key, double& out) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number()) return fail(at(key), "must be a number");
        const double x = v.get<double>();
        if (!(x > 0.0 && x < 1.0)) return fail(at(key), "must lie in (0,1)");
        out = x;
    }

    void number(const char* key, double& out) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) return fail(at(key), "must be a finite number");
        out = v.get<double>();
    }

    void count(const char* key, std::uint64_t& out, std::uint64_t min = 1) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            return fail(at(key), "must be a non-negative integer");
        const auto x = v.get<std::uint64_t>();
        if (x < min) return fail(at(key), "must be at least " + std::to_string(min));
        out = x;
    }

    void integer(const char* key, int& out) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_number_integer()) return fail(at(key), "must be an integer");
        out = v.get<int>();
    }

    void string(const char* key, std::string& out) {
        if (!has(key)) return;
        const json& v = get(key);
        if (!v.is_string()) return fail(at(key), "must be a string");
        out = v.get<std::string>();
    }

    bool numbers(const char* key, std::vector<double>& out, bool require_positive) {
        if (!has(key)) return false;
        const json& v = get(key);
        if (!v.is_array()) {
            fail(at(key), "must be an array of numbers");
            return false;
        }
        std::vector<double> xs;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = at(key) + "[" + std::to_string(i) + "]";
            if (!v[i].is_number()) {
                fail(p, "must be a number");
                return false;
            }
            const double x = v[i].get<double>();
            if (!std::isfinite(x) || (require_positive && !(x > 0.0))) {
                fail(p, require_positive ? "must be positive and finite" : "must be finite");
                return false;
            }
            xs.push_back(x);
        }
        out = std::move(xs);
        return true;
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
};

std::vector<Monomial> read_terms(const json& arr, const std::string& path, int dim, std::vector<std::string>& errors) {
    std::vector<Monomial> terms;
    if (!arr.is_array()) {
        errors.push_back(path + ": must be an array of terms");
        return terms;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader r(arr[i], path + "[" + std::to_string(i) + "]", errors);
        r.allow({"coeff", "px", "py"});
        Monomial m;
        r.number("coeff", m.coeff);
        r.integer("px", m.px);
        r.integer("py", m.py);
        if (m.px < 0 || m.py < 0) r.fail(r.at("px"), "exponents must be non-negative");
        if (dim == 1 && m.py != 0) r.fail(r.at("py"), "must be 0 for a one-dimensional potential");
        terms.push_back(m);
    }
    return terms;
}

void read_potential(const json& root, ExperimentConfig& c, std::vector<std::string>& errors) {
    if (!root.contains("potential")) {
        errors.push_back("potential: required");
        return;
    }
    const json& v = root.at("potential");
    if (v.is_string()) {
        c.potential.catalog = v.get<std::string>();
        const auto ids = catalog::ids();
        if (std::find(ids.begin(), ids.end(), c.potential.catalog) == ids.end()) {
            errors.push_back("potential: unknown catalog id '" + c.potential.catalog + "'");
            return;
        }
        c.potential.dim = catalog::by_id(c.potential.catalog).dimension();
        return;
    }
    Reader r(v, "potential", errors);
    r.allow({"polynomial", "gaussian_sum"});
    if (!v.is_object()) return;
    if (r.has("polynomial") == r.has("gaussian_sum")) {
        r.fail("potential", "needs exactly one of 'polynomial' or 'gaussian_sum'");
        return;
    }
    const bool gaussian = r.has("gaussian_sum");
    const char* kind = gaussian ? "gaussian_sum" : "polynomial";
    Reader body(r.get(kind), r.at(kind), errors);
    c.potential.gaussian = gaussian;
    if (gaussian)
        body.allow({"dim", "base", "bumps"});
    else
        body.allow({"dim", "terms"});
    body.integer("dim", c.potential.dim);
    if (c.potential.dim != 1 && c.potential.dim != 2) body.fail(body.at("dim"), "must be 1 or 2");
    const char* terms_key = gaussian ? "base" : "terms";
    if (body.has(terms_key)) c.potential.terms = read_terms(body.get(terms_key), body.at(terms_key), c.potential.dim, errors);
    if (!gaussian && c.potential.terms.empty()) body.fail(body.at("terms"), "at least one term required");
    if (!gaussian || !body.has("bumps")) return;
    const json& bumps = body.get("bumps");
    if (!bumps.is_array()) {
        body.fail(body.at("bumps"), "must be an array");
        return;
    }
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        Reader b(bumps[i], body.at("bumps") + "[" + std::to_string(i) + "]", errors);
        b.allow({"amplitude", "center", "width"});
        GaussianBump g;
        b.number("amplitude", g.amplitude);
        std::vector<double> center, width;
        if (b.numbers("center", center, false)) {
            if (static_cast<int>(center.size()) != c.potential.dim)
                b.fail(b.at("center"), "needs one entry per dimension");
            else
                for (int a = 0; a < c.potential.dim; ++a) g.center(a) = center[a];
        }
        if (b.numbers("width", width, true)) {
            if (static_cast<int>(width.size()) != c.potential.dim)
                b.fail(b.at("width"), "needs one entry per dimension");
            else
                for (int a = 0; a < c.potential.dim; ++a) g.width(a) = width[a];
        }
        c.potential.bumps.push_back(g);
    }
}

void read_domain(const json& v, ExperimentConfig& c, std::vector<std::string>& errors) {
    Reader r(v, "domain", errors);
    r.allow({"interval", "rectangle"});
    if (!v.is_object()) return;
    if (r.has("interval") == r.has("rectangle")) {
        r.fail("domain", "needs exactly one of 'interval' or 'rectangle'");
        return;
    }
    if (r.has("interval")) {
        std::vector<double> ab;
        if (!r.numbers("interval", ab, false)) return;
        if (ab.size() != 2 || !(ab[0] < ab[1])) return r.fail("domain.interval", "must be [a, b] with a < b");
        if (c.potential.dim != 1) r.fail("domain.interval", "potential is two-dimensional");
        c.domain = Domain::interval(ab[0], ab[1]);
        return;
    }
    Reader rect(r.get("rectangle"), "domain.rectangle", errors);
    rect.allow({"x", "y"});
    std::vector<double> x, y;
    const bool okx = rect.numbers("x", x, false);
    const bool oky = rect.numbers("y", y, false);
    if (!okx || x.size() != 2 || !(x[0] < x[1])) return rect.fail("domain.rectangle.x", "must be [a, b] with a < b");
    if (!oky || y.size() != 2 || !(y[0] < y[1])) return rect.fail("domain.rectangle.y", "must be [a, b] with a < b");
    if (c.potential.dim != 2) rect.fail("domain.rectangle", "potential is one-dimensional");
    c.domain = Domain::rectangle(x[0], x[1], y[0], y[1]);
}

void read_kmc(const json& v, KmcBlock& k, std::vector<std::string>& errors) {
    Reader r(v, "kmc", errors);
    r.allow({"rates", "rate_table_file", "n_samples", "states", "absorbing", "start", "horizon"});
    if (!v.is_object()) return;
    if (r.has("rates")) {
        r.numbers("rates", k.rates, false);
        for (double x : k.rates)
            if (x < 0.0) r.fail("kmc.rates", "rates must be non-negative");
    }
    r.string("rate_table_file", k.rate_table_file);
    r.count("n_samples", k.n_samples);
    r.integer("start", k.start);
    r.positive("horizon", k.horizon);
    if (r.has("states")) {
        const json& st = r.get("states");
        if (!st.is_array()) {
            r.fail("kmc.states", "must be an array");
        } else {
            for (std::size_t i = 0; i < st.size(); ++i) {
                Reader s(st[i], "kmc.states[" + std::to_string(i) + "]", errors);
                s.allow({"rates", "targets"});
                KmcState state;
                s.numbers("rates", state.rates, false);
                if (s.has("targets")) {
                    const json& t = s.get("targets");
                    if (!t.is_array()) {
                        s.fail(s.at("targets"), "must be an array of state indices");
                    } else {
                        for (const auto& x : t) {
                            if (!x.is_number_integer() || x.get<long long>() < 0 ||
                                x.get<std::size_t>() >= st.size()) {
                                s.fail(s.at("targets"), "entries must be state indices");
                                break;
                            }
                            state.targets.push_back(x.get<int>());
                        }
                    }
                }
                if (state.rates.size() != state.targets.size())
                    s.fail(s.at("targets"), "needs one target per rate");
                k.states.push_back(std::move(state));
            }
        }
    }
    if (r.has("absorbing")) {
        const json& a = r.get("absorbing");
        if (!a.is_array()) {
            r.fail("kmc.absorbing", "must be an array of state indices");
        } else {
            for (const auto& x : a) {
                if (!x.is_number_integer() || x.get<long long>() < 0) {
                    r.fail("kmc.absorbing", "entries must be state indices");
                    break;
                }
                k.absorbing.push_back(x.get<int>());
            }
        }
    }
    if (!k.states.empty() && (k.start < 0 || k.start >= static_cast<int>(k.states.size())))
        r.fail("kmc.start", "must index a state");
}

json terms_json(const std::vector<Monomial>& terms) {
    json a = json::array();
    for (const auto& m : terms) a.push_back({{"coeff", m.coeff}, {"px", m.px}, {"py", m.py}});
    return a;
}

json vec_json(const Vec& v, int dim) {
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(v(i));
    return a;
}

}  // namespace

SchemaError::SchemaError(std::vector<std::string> violations)
    : Error(ErrorCode::SchemaError, join(violations)), violations_(std::move(violations)) {}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError({std::string("(root): invalid JSON: ") + e.what()});
    }
    std::vector<std::string> errors;
    ExperimentConfig c;
    Reader r(root, "", errors);
    r.allow({"potential", "domain", "grid", "h", "h_list", "sim", "windows", "tad", "kmc", "seed"});
    if (!root.is_object()) throw SchemaError(std::move(errors));

    read_potential(root, c, errors);
    if (r.has("domain")) {
        read_domain(r.get("domain"), c, errors);
    } else if (c.potential.catalog.empty()) {
        errors.push_back("domain: required for user potentials");
    }

    if (r.has("grid")) {
        Reader g(r.get("grid"), "grid", errors);
        g.allow({"nodes"});
        g.integer("nodes", c.grid_nodes);
        if (g.has("nodes") && c.grid_nodes < 3) g.fail("grid.nodes", "must be at least 3");
    }

    double h = 0.0;
    r.positive("h", h);
    if (h > 0.0) c.h = h;
    r.numbers("h_list", c.h_list, true);

    if (r.has("sim")) {
        Reader s(r.get("sim"), "sim", errors);
        s.allow({"dt", "max_steps", "n_replicas", "x0"});
        s.positive("dt", c.sim.dt);
        s.count("max_steps", c.sim.max_steps);
        s.count("n_replicas", c.sim.n_replicas);
        std::vector<double> x0;
        if (s.numbers("x0", x0, false)) {
            if (static_cast<int>(x0.size()) != c.potential.dim)
                s.fail("sim.x0", "needs one entry per dimension");
            else
                c.sim.x0 = x0;
        }
    }

    if (r.has("windows")) {
        Reader w(r.get("windows"), "windows", errors);
        w.allow({"radius"});
        w.positive("radius", c.window_radius);
    }

    if (r.has("tad")) {
        Reader t(r.get("tad"), "tad", errors);
        t.allow({"h_low", "h_high", "alpha", "nu_min", "restart_mode", "burn_in", "dt", "max_high_exits"});
        t.positive("h_low", c.tad.h_low);
        t.positive("h_high", c.tad.h_high);
        t.fraction("alpha", c.tad.alpha);
        t.positive("nu_min", c.tad.nu_min);
        t.string("restart_mode", c.tad.restart_mode);
        t.positive("burn_in", c.tad.burn_in);
        t.positive("dt", c.tad.dt);
        t.count("max_high_exits", c.tad.max_high_exits);
        if (c.tad.restart_mode != "spectral_qsd" && c.tad.restart_mode != "reflected_equilibration")
            t.fail("tad.restart_mode", "must be 'spectral_qsd' or 'reflected_equilibration'");
        if (!(c.tad.h_low < c.tad.h_high)) t.fail("tad.h_low", "must be below tad.h_high");
    }

    if (r.has("kmc")) read_kmc(r.get("kmc"), c.kmc, errors);
    r.count("seed", c.seed, 0);

    if (!errors.empty()) throw SchemaError(std::move(errors));
    return c;
}

std::string emit(const ExperimentConfig& c) {
    json j;
    if (!c.potential.catalog.empty()) {
        j["potential"] = c.potential.catalog;
    } else if (c.potential.gaussian) {
        json bumps = json::array();
        for (const auto& b : c.potential.bumps)
            bumps.push_back({{"amplitude", b.amplitude},
                             {"center", vec_json(b.center, c.potential.dim)},
                             {"width", vec_json(b.width, c.potential.dim)}});
        j["potential"] = {{"gaussian_sum",
                           {{"dim", c.potential.dim}, {"base", terms_json(c.potential.terms)}, {"bumps", bumps}}}};
    } else {
        j["potential"] = {{"polynomial", {{"dim", c.potential.dim}, {"terms", terms_json(c.potential.terms)}}}};
    }
    if (c.domain) {
        const Domain& d = *c.domain;
        if (d.dim == 1)
            j["domain"] = {{"interval", {d.lo[0], d.hi[0]}}};
        else
            j["domain"] = {{"rectangle", {{"x", {d.lo[0], d.hi[0]}}, {"y", {d.lo[1], d.hi[1]}}}}};
    }
    if (c.grid_nodes > 0) j["grid"] = {{"nodes", c.grid_nodes}};
    if (c.h) j["h"] = *c.h;
    if (!c.h_list.empty()) j["h_list"] = c.h_list;
    json sim = {{"max_steps", c.sim.max_steps}, {"n_replicas", c.sim.n_replicas}};
    if (c.sim.dt > 0.0) sim["dt"] = c.sim.dt;
    if (c.sim.x0) sim["x0"] = *c.sim.x0;
    j["sim"] = sim;
    j["windows"] = {{"radius", c.window_radius}};
    j["tad"] = {{"h_low", c.tad.h_low},       {"h_high", c.tad.h_high},   {"alpha", c.tad.alpha},
                {"nu_min", c.tad.nu_min},     {"restart_mode", c.tad.restart_mode},
                {"burn_in", c.tad.burn_in},   {"dt", c.tad.dt},           {"max_high_exits", c.tad.max_high_exits}};
    json kmc = {{"n_samples", c.kmc.n_samples}, {"start", c.kmc.start}, {"horizon", c.kmc.horizon}};
    if (!c.kmc.rates.empty()) kmc["rates"] = c.kmc.rates;
    if (!c.kmc.rate_table_file.empty()) kmc["rate_table_file"] = c.kmc.rate_table_file;
    if (!c.kmc.states.empty()) {
        json states = json::array();
        for (const auto& s : c.kmc.states) states.push_back({{"rates", s.rates}, {"targets", s.targets}});
        kmc["states"] = states;
    }
    if (!c.kmc.absorbing.empty()) kmc["absorbing"] = c.kmc.absorbing;
    j["kmc"] = kmc;
    j["seed"] = c.seed;
    return j.dump(2);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return emit(a) == emit(b); }

std::string config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : emit(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PotentialField ExperimentConfig::field() const {
    if (!potential.catalog.empty()) return catalog::by_id(potential.catalog);
    if (potential.gaussian) return make_gaussian_sum(potential.dim, potential.terms, potential.bumps);
    return make_polynomial(potential.dim, potential.terms);
}

Domain ExperimentConfig::resolved_domain() const {
    if (domain) return *domain;
    return default_domain(potential.catalog);
}

DomainGrid ExperimentConfig::grid() const {
    const Domain d = resolved_domain();
    const int n = grid_nodes > 0 ? grid_nodes : (d.dim == 1 ? 2048 : 256);
    return DomainGrid::uniform(d, n);
}

double ExperimentConfig::temperature() const {
    if (h) return *h;
    if (!h_list.empty()) return h_list.front();
    throw SchemaError({"h: required by this command"});
}

TadConfig ExperimentConfig::tad_config() const {
    TadConfig t;
    t.h_low = tad.h_low;
    t.h_high = tad.h_high;
    t.alpha = tad.alpha;
    t.nu_min = tad.nu_min;
    t.restart = tad.restart_mode == "reflected_equilibration" ? RestartMode::ReflectedEquilibration
                                                              : RestartMode::SpectralQsd;
    t.burn_in = tad.burn_in;
    t.max_high_exits = tad.max_high_exits;
    t.sim.h = tad.h_high;
    t.sim.dt = tad.dt;
    t.sim.max_steps = sim.max_steps;
    t.sim.seed = seed;
    return t;
}

}  // namespace exitlab::app
