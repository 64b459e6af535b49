#include "exitlab_app/commands.hpp"

#include "exitlab/agmon.hpp"
#include "exitlab/harness.hpp"
#include "exitlab/kmc.hpp"
#include "exitlab/landscape.hpp"
#include "exitlab/parallel.hpp"
#include "exitlab/rates.hpp"
#include "exitlab/sde.hpp"
#include "exitlab/spectral.hpp"
#include "exitlab/tad.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace exitlab::app {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Context {
    const std::string& command;
    const ExperimentConfig& cfg;
    const RunOptions& opt;
    std::ostream& out;
};

json header(const Context& c) {
    return {{"tool", "exitlab"},
            {"version", kToolVersion},
            {"command", c.command},
            {"config_hash", config_hash(c.cfg)},
            {"seed", c.cfg.seed}};
}

std::ofstream open_output(const Context& c, const std::string& name) {
    fs::create_directories(c.opt.out_dir);
    const fs::path path = c.opt.out_dir / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    return os;
}

/// Canonical config next to every artifact, so hash + seed + file replay the run.
void write_config(const Context& c) {
    auto os = open_output(c, "config.json");
    os << emit(c.cfg) << '\n';
}

void write_json(const Context& c, const std::string& name, json body) {
    json doc;
    doc["header"] = header(c);
    for (auto& [k, v] : body.items()) doc[k] = std::move(v);
    auto os = open_output(c, name);
    os << doc.dump(2) << '\n';
    write_config(c);
}

/// CSV with the header block as leading '#' comment lines.
std::ofstream open_csv(const Context& c, const std::string& name) {
    auto os = open_output(c, name);
    os << "# tool=exitlab version=" << kToolVersion << " command=" << c.command
       << " config_hash=" << config_hash(c.cfg) << " seed=" << c.cfg.seed << '\n';
    os << std::setprecision(17);
    write_config(c);
    return os;
}

json point_json(const Vec& x, int dim) {
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(x(i));
    return a;
}

json rate_table_json(const RateTable& t) {
    json entries = json::array();
    for (const auto& e : t.entries)
        entries.push_back({{"channel", e.channel}, {"rate", e.rate}, {"provenance", std::string(to_string(e.provenance))}});
    return {{"h", t.h}, {"total", t.total()}, {"entries", entries}};
}

RateTable rate_table_from_json(const json& j) {
    const json& t = j.contains("rate_table") ? j.at("rate_table") : j;
    if (!t.contains("entries") || !t.at("entries").is_array())
        throw Error(ErrorCode::InvalidArgument, "rate table JSON needs an 'entries' array");
    RateTable table;
    table.h = t.value("h", 0.0);
    for (const auto& e : t.at("entries")) {
        RateEntry r;
        r.channel = e.value("channel", static_cast<int>(table.entries.size()));
        r.rate = e.at("rate").get<double>();
        r.provenance = provenance_from_string(e.value("provenance", std::string("user")));
        table.entries.push_back(r);
    }
    table.validate();
    return table;
}

json hypotheses_json(const HypothesisReport& r) {
    return {{"h1", r.h1},       {"h2", r.h2}, {"h3", r.h3}, {"h_morse", r.h_morse}, {"h_min", r.h_min},
            {"n", r.n},         {"n0", r.n0}, {"k0", r.k0}, {"failure_reasons", r.failure_reasons}};
}

json th1_json(const Th1Report& r) {
    json da2 = json::array();
    for (std::size_t i = 0; i < r.da2.size(); ++i)
        da2.push_back({{"i", i + 1}, {"pass", static_cast<bool>(r.da2[i])}, {"lhs", r.da2_lhs[i]}, {"rhs", r.da2_rhs[i]}});
    return {{"da1", {{"pass", r.da1}, {"lhs", r.da1_lhs}, {"rhs", r.da1_rhs}}}, {"da2", da2}, {"all", r.all()}};
}

int cmd_landscape(const Context& c) {
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), true);
    const int dim = l.grid.dim();
    json cps = json::array();
    for (const auto& cp : l.critical_points)
        cps.push_back({{"location", point_json(cp.location, dim)},
                       {"f_value", cp.f_value},
                       {"index", cp.index},
                       {"hess_eigenvalues", cp.hess_eigenvalues}});
    json zs = json::array();
    for (const auto& z : l.zs)
        zs.push_back({{"rank", z.rank},
                      {"location", point_json(z.location, dim)},
                      {"f_value", z.f_value},
                      {"normal_derivative", z.normal_derivative},
                      {"tangential_hess_det", z.tangential_hess_det},
                      {"coordinate", z.coordinate},
                      {"at_corner", z.at_corner},
                      {"basin", {z.basin.begin, z.basin.end}}});
    json body = {{"dim", dim}, {"critical_points", cps}, {"boundary_minima", zs}, {"n0", l.n0()}};
    if (l.report) body["hypotheses"] = hypotheses_json(*l.report);
    write_json(c, "landscape.json", body);
    c.out << body.dump(2) << '\n';
    return 0;
}

int cmd_agmon(const Context& c) {
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), true);
    const AgmonGraph graph(l.potential, l.grid);
    const Th1Report r = check_th1_conditions(l, graph);
    {
        auto os = open_csv(c, "agmon.csv");
        write_pairwise_csv(os, r);
    }
    write_json(c, "agmon.json", {{"connected", graph.connected()}, {"conditions", th1_json(r)}});
    c.out << std::left << std::setw(12) << "condition" << std::setw(8) << "result" << std::setw(24) << "lhs"
          << "rhs\n";
    auto row = [&](const std::string& name, bool pass, double lhs, double rhs) {
        c.out << std::setw(12) << name << std::setw(8) << (pass ? "PASS" : "FAIL") << std::setw(24)
              << std::setprecision(10) << lhs << rhs << '\n';
    };
    row("da1", r.da1, r.da1_lhs, r.da1_rhs);
    for (std::size_t i = 0; i < r.da2.size(); ++i)
        row("da2[" + std::to_string(i + 1) + "]", r.da2[i], r.da2_lhs[i], r.da2_rhs[i]);
    return 0;
}

int cmd_qsd(const Context& c) {
    const double h = c.cfg.temperature();
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), false);
    const GeneratorMatrix a = assemble_generator(l.potential, l.grid, h);
    const SpectralSolution sol = principal_eigenpair(a);
    const auto windows = make_windows(l, c.cfg.window_radius);
    const ExitLaw law = exit_law(sol, windows);
    double consistency = 0.0;
    const RateTable rates = transition_rates(sol, windows, &consistency);
    json body = {{"h", h},
                 {"lambda_h", sol.lambda_h},
                 {"lambda_rayleigh", sol.lambda_rayleigh},
                 {"residual", sol.residual},
                 {"iterations", sol.iterations},
                 {"uh_integral", sol.uh_integral()},
                 {"flux_balance", sol.flux_balance()},
                 {"probabilities", law.probabilities},
                 {"remainder", law.remainder},
                 {"rate_consistency_error", consistency},
                 {"rate_table", rate_table_json(rates)}};
    write_json(c, "qsd.json", body);
    if (c.opt.dump) {
        auto os = open_csv(c, "qsd_fields.csv");
        const int dim = sol.grid.dim();
        os << (dim == 1 ? "x" : "x,y") << ",f,u_h,nu_h\n";
        for (std::size_t k = 0; k < sol.grid.size(); ++k) {
            const Vec x = sol.grid.point(k);
            os << x(0);
            if (dim == 2) os << ',' << x(1);
            os << ',' << sol.f[k] << ',' << sol.u[k] << ',' << sol.qsd[k] << '\n';
        }
    }
    c.out << body.dump(2) << '\n';
    return 0;
}

int cmd_rates(const Context& c) {
    const double h = c.cfg.temperature();
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), true);
    const RateTable table = ek_rate_table(l, h);
    const ExitWeights w = exit_weights(l, h);
    json validity = {{"weight_mode", w.mode == WeightMode::GlobalMinima ? "global_minima" : "contact_set"},
                     {"hypothesis_violation", w.hypothesis_violation}};
    if (l.report) {
        validity["hypotheses"] = hypotheses_json(*l.report);
        const AgmonGraph graph(l.potential, l.grid);
        validity["agmon_conditions"] = th1_json(check_th1_conditions(l, graph));
    }
    json body = {{"rate_table", rate_table_json(table)},
                 {"lambda_asymptotic", lambda_asymptotic(l, h)},
                 {"exit_weights", w.weights},
                 {"validity", validity}};
    write_json(c, "rates.json", body);
    c.out << body.dump(2) << '\n';
    return 0;
}

int cmd_exit_mc(const Context& c) {
    const double h = c.cfg.temperature();
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), false);
    SimConfig sim;
    sim.h = h;
    sim.dt = c.cfg.sim.dt > 0.0 ? c.cfg.sim.dt : default_dt(l.grid, h);
    sim.max_steps = c.cfg.sim.max_steps;
    sim.seed = c.cfg.seed;
    const int dim = l.grid.dim();

    std::optional<SpectralSolution> sol;
    Vec fixed = Vec::Zero();
    if (c.cfg.sim.x0) {
        for (int a = 0; a < dim; ++a) fixed(a) = (*c.cfg.sim.x0)[a];
    } else {
        sol = principal_eigenpair(assemble_generator(l.potential, l.grid, h));
    }
    const std::size_t n = c.cfg.sim.n_replicas;
    std::vector<Vec> starts(n, Vec::Zero());
    auto x0 = [&](std::size_t i, Rng& rng) {
        starts[i] = sol ? sample_qsd(*sol, rng) : fixed;
        return starts[i];
    };
    const auto events = run_exit_batch(n, x0, l.potential, l.grid.domain(), landscape_channels(l), sim);

    auto os = open_csv(c, "exit_mc.csv");
    os << (dim == 1 ? "seed,replica,x0,tau,exit_x,channel\n" : "seed,replica,x0,y0,tau,exit_x,exit_y,channel\n");
    for (std::size_t i = 0; i < n; ++i) {
        const ExitEvent& e = events[i];
        os << c.cfg.seed << ',' << i << ',' << starts[i](0);
        if (dim == 2) os << ',' << starts[i](1);
        os << ',' << e.tau << ',' << e.exit_point(0);
        if (dim == 2) os << ',' << e.exit_point(1);
        os << ',' << (e.channel ? *e.channel : -1) << '\n';
    }
    double mean = 0.0;
    for (const auto& e : events) mean += e.tau;
    c.out << "exit-mc: " << n << " exits, mean tau " << std::setprecision(8) << mean / std::max<std::size_t>(n, 1)
          << ", written to " << (c.opt.out_dir / "exit_mc.csv").string() << '\n';
    return 0;
}

RateTable load_rate_table(const Context& c) {
    std::string path = c.opt.rates_file.empty() ? c.cfg.kmc.rate_table_file : c.opt.rates_file;
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw Error(ErrorCode::InvalidArgument, "cannot read rate table " + path);
        json j;
        try {
            j = json::parse(is);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidArgument, "rate table " + path + ": " + e.what());
        }
        return rate_table_from_json(j);
    }
    if (c.cfg.kmc.rates.empty()) throw SchemaError({"kmc: needs 'rates', 'rate_table_file' or --rates"});
    const RateTable t = RateTable::from_rates(c.cfg.kmc.rates, Provenance::User);
    t.validate();
    return t;
}

int cmd_kmc(const Context& c) {
    const KmcBlock& k = c.cfg.kmc;
    if (!k.states.empty()) {
        StateGraph g;
        for (const auto& s : k.states) {
            g.rates.push_back(RateTable::from_rates(s.rates, Provenance::User));
            g.targets.push_back(s.targets);
        }
        g.absorbing.insert(k.absorbing.begin(), k.absorbing.end());
        g.validate();
        Rng rng = Rng::stream(c.cfg.seed, 0);
        const auto steps = simulate_chain(g, k.start, k.horizon, rng);
        auto os = open_csv(c, "kmc.csv");
        os << "step,state,entry_time\n";
        for (std::size_t i = 0; i < steps.size(); ++i)
            os << i << ',' << steps[i].state << ',' << steps[i].entry_time << '\n';
        c.out << "kmc: " << steps.size() << " states visited, written to " << (c.opt.out_dir / "kmc.csv").string()
              << '\n';
        return 0;
    }
    const RateTable table = load_rate_table(c);
    auto os = open_csv(c, "kmc.csv");
    os << "sample,T,Y\n";
    for (std::uint64_t i = 0; i < k.n_samples; ++i) {
        Rng rng = Rng::stream(c.cfg.seed, i);
        const JumpSample s = sample_jump(table, rng);
        os << i << ',' << s.T << ',' << table.entries[s.Y].channel << '\n';
    }
    c.out << "kmc: " << k.n_samples << " jumps from a " << table.size() << "-channel table (total rate "
          << std::setprecision(10) << table.total() << "), written to " << (c.opt.out_dir / "kmc.csv").string()
          << '\n';
    return 0;
}

int cmd_tad(const Context& c) {
    const TadConfig tcfg = c.cfg.tad_config();
    tcfg.validate();
    const Landscape l = analyze(c.cfg.field(), c.cfg.grid(), false);
    const Equilibrator eq(l, tcfg);
    const std::size_t n = c.cfg.sim.n_replicas;
    const auto results = parallel_map(n, [&](std::size_t i) {
        Rng rng = Rng::stream(c.cfg.seed, i);
        return tad_run(l, tcfg, eq, rng);
    });
    json replicas = json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const TadResult& r = results[i];
        json table = json::array();
        for (const auto& t : r.tau_table)
            table.push_back({{"channel", t.channel}, {"tau_high", t.tau_high}, {"tau_low", t.tau_low}});
        replicas.push_back({{"replica", i},
                            {"T", r.T},
                            {"Y", r.Y},
                            {"n_high_T_exits", r.n_high_exits},
                            {"T_sim", r.T_sim},
                            {"T_stop", r.T_stop},
                            {"tau_table", table},
                            {"speedup_estimate", r.speedup},
                            {"speedup_reference", r.speedup_reference}});
    }
    write_json(c, "tad.json", {{"replicas", replicas}});
    auto os = open_csv(c, "tad.csv");
    os << "replica,T,Y,n_high_T_exits,T_sim,T_stop,speedup_estimate\n";
    double mean_T = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const TadResult& r = results[i];
        os << i << ',' << r.T << ',' << r.Y << ',' << r.n_high_exits << ',' << r.T_sim << ',' << r.T_stop << ','
           << r.speedup << '\n';
        mean_T += r.T;
    }
    c.out << "tad: " << n << " replicas, mean T " << std::setprecision(8) << mean_T / std::max<std::size_t>(n, 1)
          << ", written to " << (c.opt.out_dir / "tad.json").string() << '\n';
    return 0;
}

int cmd_validate(const Context& c) {
    if (c.opt.args.empty()) throw Error(ErrorCode::UnknownSuite, "validate needs a suite name");
    const std::string& suite = c.opt.args.front();
    const harness::TestReport report = harness::run_suite(suite, c.cfg.seed);
    json body = json::parse(report.json());
    write_json(c, "validate_" + suite + ".json", {{"report", body}});
    c.out << report.table() << '\n' << body.dump(2) << '\n';
    return report.pass() ? 0 : 1;
}

}  // namespace

std::vector<std::string> command_names() {
    return {"landscape", "agmon", "qsd", "rates", "exit-mc", "kmc", "tad", "validate"};
}

bool is_command(const std::string& name) {
    const auto names = command_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string usage() {
    std::ostringstream os;
    os << "usage: exitlab <command> [args] [--config <path>] [--seed <u64>] [--out <dir>] [--threads <n>] [--grid <n>]\n"
       << "commands:\n"
       << "  landscape          critical points, boundary minima, hypothesis report\n"
       << "  agmon              pairwise Agmon distances and the distance conditions\n"
       << "  qsd [solve]        principal eigenpair, exit law and rates (--dump for grid fields)\n"
       << "  rates              Eyring-Kramers boundary rate table and validity report\n"
       << "  exit-mc            Euler-Maruyama exit events\n"
       << "  kmc                jump samples or chain trajectory from a rate table (--rates <json>)\n"
       << "  tad                temperature-accelerated replicas\n"
       << "  validate <suite>   statistical validation suite; suites:";
    for (const auto& s : harness::suite_names()) os << ' ' << s;
    os << "\n"
       << "default output directory: $EXITLAB_OUT_DIR, else the working directory\n";
    return os.str();
}

int dispatch(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out) {
    const Context c{command, cfg, opt, out};
    if (command == "landscape") return cmd_landscape(c);
    if (command == "agmon") return cmd_agmon(c);
    if (command == "qsd") return cmd_qsd(c);
    if (command == "rates") return cmd_rates(c);
    if (command == "exit-mc") return cmd_exit_mc(c);
    if (command == "kmc") return cmd_kmc(c);
    if (command == "tad") return cmd_tad(c);
    if (command == "validate") return cmd_validate(c);
    return 2;
}

std::string error_json(const std::exception& e) {
    json j;
    if (const auto* s = dynamic_cast<const SchemaError*>(&e)) {
        j["error"] = "SchemaError";
        j["message"] = s->what();
        j["violations"] = s->violations();
    } else if (const auto* x = dynamic_cast<const Error*>(&e)) {
        j["error"] = std::string(to_string(x->code()));
        j["message"] = x->what();
    } else {
        j["error"] = "InternalError";
        j["message"] = e.what();
    }
    return j.dump();
}

}  // namespace exitlab::app
