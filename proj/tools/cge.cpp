// Command-line front end: cge <command> [options].
// Exit status: 0 success, 2 a PASS criterion failed, 1 any error.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "cge/besov_analysis.hpp"
#include "cge/coarse_grain.hpp"
#include "cge/field_generators.hpp"
#include "cge/field_io.hpp"
#include "cge/regularity_harness.hpp"
#include "cge/report.hpp"

namespace {

constexpr int kExitFail = 2;

const std::vector<std::string> kCommonKeys = {"threads", "cache_dir", "seed", "out", "cg_rel_tol",
                                              "cg_max_iter", "discretization", "preconditioner"};

struct Command {
    std::string name;
    std::string help;
    std::vector<std::string> keys;
    std::function<int(cge::RunConfig&)> run;
};

void write_output(const cge::RunConfig& cfg, const std::string& text) {
    const std::string out = cfg.get("out");
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw cge::Error("cannot write " + out);
    f << text;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw cge::Error("cannot write " + path);
    f << text;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

cge::SolveConfig solve_config(cge::RunConfig& cfg, cge::Discretization fallback) {
    cge::SolveConfig c;
    c.discretization = cge::parse_discretization(cfg.get("discretization", cge::to_string(fallback)));
    c.cg_rel_tol = cfg.get_double("cg_rel_tol", c.cg_rel_tol);
    if (cfg.has("cg_max_iter")) c.cg_max_iter = cfg.get_int("cg_max_iter", 0);
    c.preconditioner = cge::parse_preconditioner(cfg.get("preconditioner", "diagonal"));
    c.validate();
    cfg.set("discretization", cge::to_string(c.discretization));
    cfg.set("cg_rel_tol", fmt(c.cg_rel_tol));
    cfg.set("preconditioner", cge::to_string(c.preconditioner));
    return c;
}

cge::SweepOptions sweep_options(cge::RunConfig& cfg) {
    cge::SweepOptions o;
    o.solve = solve_config(cfg, cge::Discretization::q1fem);
    o.threads = static_cast<int>(cfg.get_int("threads", 1));
    if (cfg.has("cache_dir")) o.cache_dir = cfg.get("cache_dir");
    return o;
}

cge::CoefficientField load_field(const cge::RunConfig& cfg) {
    if (!cfg.has("field")) throw cge::ConfigError("--field is required");
    return cge::read_field(cfg.get("field"));
}

cge::ReportMeta meta(const std::string& command, const cge::RunConfig& cfg, const cge::CoefficientField* field) {
    cge::ReportMeta m;
    m.command = command;
    m.config = cfg;
    m.config.set("version", cge::tool_version());
    if (field != nullptr) {
        m.field_hash = field->content_hash_hex();
        m.field_descriptor = field->descriptor();
    }
    return m;
}

std::vector<double> number_list(const cge::RunConfig& cfg, const std::string& key) {
    return cfg.get_list(key, {});
}

int cmd_gen(cge::RunConfig& cfg) {
    const std::string kind = cfg.get("kind");
    const int dim = static_cast<int>(cfg.get_int("dim", 2));
    const int level = static_cast<int>(cfg.get_int("level", 3));
    const auto grid = cge::GridSpec::make(dim, level);
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    std::optional<cge::CoefficientField> field;
    if (kind == "constant") {
        if (cfg.has("matrix")) {
            field = cge::gen_constant(grid, cge::SymMat::from_components(dim, number_list(cfg, "matrix")));
        } else {
            auto diag = cfg.get_list("diag", std::vector<double>(static_cast<std::size_t>(dim), 1.0));
            field = cge::gen_constant(grid, cge::SymMat::diagonal(diag));
        }
    } else if (kind == "laminate") {
        field = cge::gen_laminate(grid, static_cast<int>(cfg.get_int("axis", 0)), number_list(cfg, "values"));
    } else if (kind == "layered") {
        cge::LayeredParams p;
        p.alpha = cfg.get_double("alpha", p.alpha);
        p.k_max = static_cast<int>(cfg.get_int("k_max", p.k_max));
        field = cge::gen_layered_example(grid, p);
    } else if (kind == "cantor") {
        cge::CantorParams p;
        p.generation = static_cast<int>(cfg.get_int("generation", p.generation));
        if (cfg.has("retained")) {
            p.retained.clear();
            for (double v : number_list(cfg, "retained")) p.retained.push_back(static_cast<int>(v));
        }
        field = cge::gen_cantor_field(grid, p);
    } else if (kind == "cascade") {
        cge::CascadeParams p;
        p.gamma = cfg.get_double("gamma", p.gamma);
        p.generation = static_cast<int>(cfg.get_int("generation", p.generation));
        p.seed = seed;
        field = cge::gen_cascade_field(grid, p);
    } else if (kind == "random") {
        field = cge::gen_random_spd(grid, cfg.get_double("lo", 1e-3), cfg.get_double("hi", 1e3), seed,
                                    cfg.get("diagonal", "false") == "true");
    } else {
        throw cge::ConfigError("unknown --kind '" + kind + "' (constant|laminate|layered|cantor|cascade|random)");
    }
    if (!cfg.has("out") || cfg.get("out") == "-") throw cge::ConfigError("gen needs --out <file.cge>");
    cge::write_field(*field, cfg.get("out"));
    std::cout << field->content_hash_hex() << "  " << field->descriptor() << "\n";
    return 0;
}

int cmd_coarse(cge::RunConfig& cfg) {
    const auto field = load_field(cfg);
    const auto opts = sweep_options(cfg);
    const auto result = cge::sweep(field, opts);
    std::vector<cge::EllipticityReport> reps;
    if (result.complete()) {
        const double s = cfg.get_double("s", 0.4), t = cfg.get_double("t", 0.4);
        reps.push_back(cge::ellipticity_constants(result, s, t));
    }
    write_output(cfg, cge::report_json(meta("coarse", cfg, &field), result, reps));
    return result.complete() ? 0 : 1;
}

int cmd_ellipticity(cge::RunConfig& cfg) {
    const auto field = load_field(cfg);
    const double s = cfg.get_double("s", 0.4), t = cfg.get_double("t", 0.4);
    const auto result = cge::sweep(field, sweep_options(cfg));
    const auto rep = cge::ellipticity_constants(result, s, t);
    if (cfg.has("plot")) write_file(cfg.get("plot"), cge::emit_scale_terms(rep, field.content_hash_hex()));
    write_output(cfg, cge::report_json(meta("ellipticity", cfg, &field), rep));
    return 0;
}

int cmd_criterion(cge::RunConfig& cfg) {
    const auto field = load_field(cfg);
    cge::CriterionInput in;
    in.p = cfg.get_double("p", in.p);
    in.q = cfg.get_double("q", in.q);
    in.alpha = cfg.get_double("alpha", in.alpha);
    in.beta = cfg.get_double("beta", in.beta);
    std::optional<cge::SweepResult> sw;
    if (cfg.get("with_solver", "false") == "true") sw = cge::sweep(field, sweep_options(cfg));
    const auto rep = cge::sobolev_criterion_report(field, in, sw ? &*sw : nullptr);
    write_output(cfg, cge::report_json(meta("criterion", cfg, &field), rep));
    return rep.exponents.satisfied ? 0 : kExitFail;
}

cge::BoundaryData parse_boundary(const std::string& spec, int dim) {
    // constant:c | affine:c0:g1,g2[,g3] | exp_cos:lambda
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    auto num = [&](const std::string& v) {
        cge::RunConfig tmp;
        tmp.set("boundary", v);
        return tmp.get_double("boundary", 0.0);
    };
    if (parts.size() == 2 && parts[0] == "constant") return cge::BoundaryData::constant(num(parts[1]));
    if (parts.size() == 2 && parts[0] == "exp_cos") return cge::BoundaryData::exp_cos(num(parts[1]));
    if (parts.size() == 3 && parts[0] == "affine") {
        cge::RunConfig tmp;
        tmp.set("slope", parts[2]);
        const auto g = tmp.get_list("slope", {});
        if (static_cast<int>(g.size()) != dim) throw cge::ConfigError("affine slope needs d components");
        std::array<double, cge::kMaxDim> slope{};
        for (int a = 0; a < dim; ++a) slope[static_cast<std::size_t>(a)] = g[static_cast<std::size_t>(a)];
        return cge::BoundaryData::affine(num(parts[1]), slope);
    }
    throw cge::ConfigError("bad --boundary '" + spec + "' (constant:c | affine:c0:g1,g2 | exp_cos:lambda)");
}

cge::ExperimentConfig experiment_config(cge::RunConfig& cfg) {
    cge::ExperimentConfig ec;
    ec.sweep = sweep_options(cfg);
    ec.solve = ec.sweep.solve;
    ec.solve.discretization = cge::Discretization::fd5;
    ec.calibration.harnack = cfg.get_double("calibration.harnack", ec.calibration.harnack);
    ec.calibration.local_bound = cfg.get_double("calibration.local_bound", ec.calibration.local_bound);
    return ec;
}

int cmd_harnack(cge::RunConfig& cfg) {
    const auto field = load_field(cfg);
    const double s = cfg.get_double("s", 0.4), t = cfg.get_double("t", 0.4);
    const auto data = parse_boundary(cfg.get("boundary", "constant:1"), field.grid().dim);
    const auto ec = experiment_config(cfg);
    const std::string mode = cfg.get("mode", "harnack");
    cge::ExperimentRecord rec;
    if (mode == "harnack") {
        rec = cge::harnack_experiment(field, data, s, t, ec);
    } else if (mode == "local_boundedness") {
        rec = cge::local_boundedness_experiment(field, data, s, t, ec);
    } else {
        throw cge::ConfigError("unknown --mode '" + mode + "' (harnack|local_boundedness)");
    }
    const std::vector<cge::ExperimentRecord> recs{rec};
    if (cfg.has("csv")) write_file(cfg.get("csv"), cge::records_csv(recs));
    if (cfg.has("plot")) {
        write_file(cfg.get("plot"), cge::emit_plot_data(recs, mode == "harnack" ? cge::PlotKind::harnack
                                                                                : cge::PlotKind::local_boundedness));
    }
    write_output(cfg, cge::report_json(meta("harnack", cfg, &field), recs));
    return rec.pass ? 0 : kExitFail;
}

int cmd_sweep(cge::RunConfig& cfg) {
    const std::string kind = cfg.get("kind", "sharpness");
    if (kind != "sharpness") throw cge::ConfigError("unknown sweep --kind '" + kind + "' (sharpness)");
    const auto lambdas = cfg.get_list("lambda", {1.0, 4.0, 16.0, 64.0});
    const int level = static_cast<int>(cfg.get_int("level", 5));
    const double s = cfg.get_double("s", 0.4), t = cfg.get_double("t", 0.4);
    const auto rep = cge::sharpness_sweep(lambdas, s, t, level, experiment_config(cfg));
    if (cfg.has("csv")) write_file(cfg.get("csv"), cge::emit_plot_data(rep));
    write_output(cfg, cge::report_json(meta("sweep", cfg, nullptr), rep));
    const bool ok = rep.failures.empty() && rep.slope >= 0.11 && rep.slope <= 0.14;
    std::cerr << "slope " << rep.slope << " intercept " << rep.intercept << (ok ? " PASS" : " FAIL") << "\n";
    return ok ? 0 : kExitFail;
}

int cmd_audit(cge::RunConfig& cfg) {
    const auto field = load_field(cfg);
    const auto result = cge::sweep(field, sweep_options(cfg));
    cge::AuditOptions ao;
    ao.relative_slack = cfg.get_double("slack", ao.relative_slack);
    const auto rep = cge::audit(result, ao);
    write_output(cfg, cge::report_json(meta("audit", cfg, &field), rep));
    return rep.ok() ? 0 : kExitFail;
}

std::vector<Command> commands() {
    return {
        {"gen", "generate a coefficient field",
         {"kind", "dim", "level", "matrix", "diag", "values", "axis", "alpha", "k_max", "generation", "retained",
          "gamma", "lo", "hi", "diagonal"},
         cmd_gen},
        {"coarse", "coarse-grain every cube of a field", {"field", "s", "t"}, cmd_coarse},
        {"ellipticity", "multiscale ellipticity constants", {"field", "s", "t", "plot"}, cmd_ellipticity},
        {"criterion", "negative-Sobolev sufficiency criterion",
         {"field", "p", "q", "alpha", "beta", "with_solver"},
         cmd_criterion},
        {"harnack", "Harnack or local-boundedness experiment",
         {"field", "boundary", "s", "t", "mode", "csv", "plot", "calibration.harnack", "calibration.local_bound"},
         cmd_harnack},
        {"sweep", "sharpness sweep over lambda",
         {"kind", "lambda", "level", "s", "t", "csv", "calibration.harnack", "calibration.local_bound"},
         cmd_sweep},
        {"audit", "check ordering, subadditivity, monotonicity and scaling", {"field", "slack"}, cmd_audit},
    };
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cge: coarse-grained ellipticity toolkit " + cge::tool_version()};
    app.require_subcommand(1);
    app.set_version_flag("--version", cge::tool_version());

    const auto cmds = commands();
    std::map<std::string, std::map<std::string, std::string>> given;
    std::map<std::string, std::vector<std::string>> params;
    std::map<std::string, std::string> config_path;
    std::map<std::string, CLI::App*> subs;

    for (const Command& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        subs[c.name] = sub;
        std::vector<std::string> keys = c.keys;
        keys.insert(keys.end(), kCommonKeys.begin(), kCommonKeys.end());
        for (const std::string& key : keys) {
            std::string flag = key;
            for (char& ch : flag) {
                if (ch == '_' || ch == '.') ch = '-';
            }
            sub->add_option_function<std::string>(
                "--" + flag, [&given, name = c.name, key](const std::string& v) { given[name][key] = v; },
                "set '" + key + "'");
        }
        sub->add_option("--config", config_path[c.name], "key = value file");
        if (c.name == "gen") sub->add_option("--param", params[c.name], "generator parameter k=v (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (const Command& c : cmds) {
        if (!subs[c.name]->parsed()) continue;
        try {
            std::set<std::string> allowed(c.keys.begin(), c.keys.end());
            allowed.insert(kCommonKeys.begin(), kCommonKeys.end());
            cge::RunConfig cfg;
            if (!config_path[c.name].empty()) cfg = cge::RunConfig::load(config_path[c.name], allowed);
            for (const std::string& kv : params[c.name]) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw cge::ConfigError("--param expects k=v, got '" + kv + "'");
                const std::string key = kv.substr(0, eq);
                if (!allowed.count(key)) throw cge::ConfigError("unknown parameter '" + key + "'");
                cfg.set(key, kv.substr(eq + 1));
            }
            for (const auto& [k, v] : given[c.name]) cfg.set(k, v);
            return c.run(cfg);
        } catch (const std::exception& e) {
            std::cerr << "cge " << c.name << ": error: " << e.what() << "\n";
            return 1;
        }
    }
    return 1;
}
