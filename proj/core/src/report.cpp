#include "cge/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#ifndef CGE_VERSION
#define CGE_VERSION "unknown"
#endif

namespace cge {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

Json meta_json(const ReportMeta& meta) {
    Json j;
    j["tool"] = "cge";
    j["version"] = tool_version();
    j["command"] = meta.command;
    j["field_hash"] = meta.field_hash;
    j["field_descriptor"] = meta.field_descriptor;
    Json cfg = Json::object();
    for (const auto& [k, v] : meta.config.entries()) cfg[k] = v;
    j["config"] = cfg;
    return j;
}

Json matrix_json(const SymMat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.dim(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.dim(); ++j) row.push_back(number(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

Json cube_json(const TriadicCube& c, int dim) {
    Json off = Json::array();
    for (int a = 0; a < dim; ++a) off.push_back(c.offset[a]);
    return Json{{"level", c.level}, {"offset", off}};
}

// Wall time is left out so identical runs give identical bytes.
Json stats_json(const SolveStats& s) {
    return Json{{"iterations", s.iterations}, {"relative_residual", number(s.relative_residual)},
                {"unknowns", s.unknowns}};
}

Json ellipticity_json(const EllipticityReport& r) {
    const int dim = r.dim;
    Json j;
    j["cube"] = cube_json(r.cube, dim);
    j["s"] = r.s;
    j["t"] = r.t;
    j["sigma"] = 1.0 - r.s - r.t;
    j["c_s"] = r.c_s;
    j["c_t"] = r.c_t;
    j["Lambda_s"] = number(r.Lambda_s);
    j["lambda_t"] = number(r.lambda_t);
    j["theta"] = number(r.theta);
    Json terms = Json::array();
    for (const ScaleTerm& t : r.terms) {
        terms.push_back(Json{{"level", t.level},
                             {"amax_root", number(t.amax_root)},
                             {"astar_inv_root", number(t.astar_inv_root)},
                             {"weight_s", t.weight_s},
                             {"weight_t", t.weight_t}});
    }
    j["terms"] = terms;
    j["tail_Lambda"] = number(r.tail_Lambda);
    j["tail_lambda"] = number(r.tail_lambda);
    return j;
}

Json discounted_json(const DiscountedAverages& d) {
    Json terms = Json::array();
    for (const auto& t : d.terms) {
        terms.push_back(Json{{"level", t.level}, {"max_root", number(t.max_root)}, {"weight", t.weight}});
    }
    return Json{{"s", d.s},
                {"component", d.component == Component::a ? "a" : "a_inv"},
                {"terms", terms},
                {"tail", number(d.tail)},
                {"total", number(d.total)}};
}

Json record_json(const ExperimentRecord& r) {
    Json j;
    j["kind"] = r.kind;
    j["field_descriptor"] = r.field_descriptor;
    j["field_hash"] = r.field_hash;
    j["boundary"] = r.boundary;
    j["dim"] = r.dim;
    j["level"] = r.level;
    j["s"] = r.s;
    j["t"] = r.t;
    j["sigma"] = r.sigma;
    j["theta"] = number(r.theta);
    j["Lambda_s"] = number(r.Lambda_s);
    j["lambda_t"] = number(r.lambda_t);
    Json subs = Json::array();
    for (const auto& s : r.subcubes) subs.push_back(Json{{"rho", s.rho}, {"sup", number(s.sup)}, {"inf", number(s.inf)}});
    j["subcubes"] = subs;
    j["u_plus_l2"] = number(r.u_plus_l2);
    j["harnack_log_ratio"] = number(r.harnack_log_ratio);
    j["lb_ratio"] = number(r.lb_ratio);
    j["bound"] = number(r.bound);
    j["pass"] = r.pass;
    j["max_principle_ok"] = r.max_principle_ok;
    Json diag = Json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = number(v);
    j["diagnostics"] = diag;
    j["discretization"] = r.discretization;
    j["solver"] = stats_json(r.stats);
    return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string fmt_double(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void csv_row(std::ostringstream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(fields[i]);
    }
    os << "\r\n";
}

}  // namespace

std::string tool_version() { return CGE_VERSION; }

RunConfig RunConfig::parse(std::string_view text, const std::set<std::string>& allowed, const std::string& source) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(raw.substr(0, hash));
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + "empty key");
        if (!allowed.count(key)) throw ConfigError(where + "unknown key '" + key + "'");
        if (cfg.has(key)) throw ConfigError(where + "duplicate key '" + key + "'");
        cfg.set(key, value);
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), allowed, path.string());
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    if (v == "inf" || v == "infinity") return kInfinity;
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get(key);
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    }
}

std::vector<double> RunConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::stringstream ss(get(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        RunConfig tmp;
        tmp.set(key, trim(item));
        out.push_back(tmp.get_double(key, 0.0));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::string RunConfig::serialize() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

std::string report_json(const ReportMeta& meta, const EllipticityReport& report) {
    Json j = meta_json(meta);
    j["ellipticity"] = ellipticity_json(report);
    return dump(j);
}

std::string report_json(const ReportMeta& meta, const SweepResult& sweep, const std::vector<EllipticityReport>& reports) {
    Json j = meta_json(meta);
    const int dim = sweep.grid.dim;
    j["grid"] = Json{{"dim", dim}, {"level", sweep.grid.level}};
    j["solver_config"] = sweep.config_key;
    j["pair_count"] = sweep.pair_count();
    j["solves_performed"] = sweep.solves_performed;
    j["cache_hits"] = sweep.cache_hits;
    Json fails = Json::array();
    for (const auto& f : sweep.failures) fails.push_back(Json{{"cube", cube_json(f.cube, dim)}, {"error", f.message}});
    j["failures"] = fails;
    Json root = nullptr;
    if (sweep.complete()) {
        const CoarseGrainPair& p = sweep.at(TriadicCube::root());
        root = Json{{"astar", matrix_json(p.astar)},
                    {"amax", matrix_json(p.amax)},
                    {"avg", matrix_json(p.avg)},
                    {"inv_avg_inv", matrix_json(p.inv_avg_inv)}};
        Json stats = Json::array();
        for (const auto& s : p.stats) stats.push_back(stats_json(s));
        root["solver"] = stats;
    }
    j["root"] = root;
    Json reps = Json::array();
    for (const auto& r : reports) reps.push_back(ellipticity_json(r));
    j["ellipticity"] = reps;
    return dump(j);
}

std::string report_json(const ReportMeta& meta, const AuditReport& report) {
    Json j = meta_json(meta);
    j["checks"] = report.checks;
    j["max_excess"] = number(report.max_excess);
    j["violation_count"] = report.violations.size();
    Json vs = Json::array();
    for (const auto& v : report.violations) {
        vs.push_back(Json{{"check", v.check},
                          {"cube", cube_json(v.cube, report.dim)},
                          {"magnitude", number(v.magnitude)},
                          {"slack", number(v.slack)}});
    }
    j["violations"] = vs;
    return dump(j);
}

std::string report_json(const ReportMeta& meta, const CriterionReport& report) {
    Json j = meta_json(meta);
    const auto& in = report.input;
    j["input"] = Json{{"p", number(in.p)}, {"q", number(in.q)}, {"alpha", in.alpha}, {"beta", in.beta}};
    const auto& e = report.exponents;
    j["dim"] = e.dim;
    j["sigma_tilde"] = e.sigma_tilde;
    j["satisfied"] = e.satisfied;
    j["epsilon"] = e.epsilon;
    j["s"] = e.s;
    j["t"] = e.t;
    j["sigma1"] = e.sigma1;
    j["sigma2"] = e.sigma2;
    j["notes"] = e.notes;
    j["a_terms"] = report.a_terms ? discounted_json(*report.a_terms) : Json(nullptr);
    j["a_inv_terms"] = report.a_inv_terms ? discounted_json(*report.a_inv_terms) : Json(nullptr);
    j["theta_bound"] = number(report.theta_bound);
    j["prefactor"] = number(report.prefactor);
    j["theta_solver"] = report.theta_solver ? number(*report.theta_solver) : Json(nullptr);
    return dump(j);
}

std::string report_json(const ReportMeta& meta, const SharpnessReport& report) {
    Json j = meta_json(meta);
    j["level"] = report.level;
    j["s"] = report.s;
    j["t"] = report.t;
    Json pts = Json::array();
    for (const auto& p : report.points) {
        pts.push_back(Json{{"lambda", p.lambda},
                           {"sqrt_lambda", p.x},
                           {"log_ratio", number(p.log_ratio)},
                           {"expected", p.expected},
                           {"relative_error", number(p.relative_error)},
                           {"theta", number(p.theta)}});
    }
    j["points"] = pts;
    j["slope"] = number(report.slope);
    j["intercept"] = number(report.intercept);
    j["failures"] = report.failures;
    Json recs = Json::array();
    for (const auto& r : report.records) recs.push_back(record_json(r));
    j["records"] = recs;
    return dump(j);
}

std::string report_json(const ReportMeta& meta, const std::vector<ExperimentRecord>& records) {
    Json j = meta_json(meta);
    Json recs = Json::array();
    for (const auto& r : records) recs.push_back(record_json(r));
    j["records"] = recs;
    return dump(j);
}

std::string record_json_line(const ExperimentRecord& record) { return record_json(record).dump() + "\n"; }

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string records_csv(const std::vector<ExperimentRecord>& records) {
    std::ostringstream os;
    csv_row(os, {"field_hash", "field", "boundary", "kind", "theta", "harnack_log_ratio", "lb_ratio", "bound", "pass"});
    for (const auto& r : records) {
        csv_row(os, {r.field_hash, r.field_descriptor, r.boundary, r.kind, fmt_double(r.theta),
                     fmt_double(r.harnack_log_ratio), fmt_double(r.lb_ratio), fmt_double(r.bound),
                     r.pass ? "PASS" : "FAIL"});
    }
    return os.str();
}

std::string emit_plot_data(const std::vector<ExperimentRecord>& records, PlotKind kind) {
    if (records.empty()) throw ValidationError("no records to plot");
    std::ostringstream os;
    csv_row(os, {"x", "y", "series", "field_hash"});
    for (const auto& r : records) {
        const double x = kind == PlotKind::harnack ? std::sqrt(r.theta) : r.theta;
        const double y = kind == PlotKind::harnack ? r.harnack_log_ratio : r.lb_ratio;
        csv_row(os, {fmt_double(x), fmt_double(y), r.field_descriptor, r.field_hash});
    }
    return os.str();
}

std::string emit_plot_data(const SharpnessReport& report, const std::string& field_hash) {
    if (report.points.empty()) throw ValidationError("no records to plot");
    std::ostringstream os;
    csv_row(os, {"x", "y", "series", "field_hash"});
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto& p = report.points[i];
        const std::string hash = i < report.records.size() ? report.records[i].field_hash : field_hash;
        csv_row(os, {fmt_double(p.x), fmt_double(p.log_ratio), "sharpness", hash});
    }
    return os.str();
}

std::string emit_scale_terms(const EllipticityReport& report, const std::string& field_hash) {
    if (report.terms.empty()) throw ValidationError("no scale terms to plot");
    std::ostringstream os;
    csv_row(os, {"x", "y", "series", "field_hash"});
    for (const auto& t : report.terms) {
        csv_row(os, {std::to_string(t.level), fmt_double(t.weight_s * t.amax_root), "Lambda_s", field_hash});
    }
    for (const auto& t : report.terms) {
        csv_row(os, {std::to_string(t.level), fmt_double(t.weight_t * t.astar_inv_root), "lambda_t", field_hash});
    }
    return os.str();
}

}  // namespace cge
