#include <gtest/gtest.h>

#include <cmath>

#include "cge/error.hpp"
#include "cge/field_generators.hpp"
#include "cge/report.hpp"
#include "json.hpp"

namespace {

using namespace cge;
using Json = nlohmann::json;

const std::set<std::string> kKeys{"dim", "level", "seed", "values", "q"};

TEST(RunConfig, ParsesCommentsAndWhitespace) {
    const RunConfig c = RunConfig::parse("# header\n dim = 2 \nlevel=3 # trailing\n\nvalues = 1, 2.5,4\nq = inf\n", kKeys);
    EXPECT_EQ(c.get_int("dim", 0), 2);
    EXPECT_EQ(c.get_int("level", 0), 3);
    EXPECT_EQ(c.get_list("values", {}), (std::vector<double>{1, 2.5, 4}));
    EXPECT_TRUE(std::isinf(c.get_double("q", 0)));
    EXPECT_EQ(c.get_int("seed", 42), 42);
    EXPECT_EQ(c.serialize(), "dim = 2\nlevel = 3\nq = inf\nvalues = 1, 2.5,4\n");
}

TEST(RunConfig, ErrorsCarryLineNumbers) {
    try {
        RunConfig::parse("dim = 2\nbogus = 1\n", kKeys, "run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos);
    }
    EXPECT_THROW(RunConfig::parse("dim = 2\ndim = 3\n", kKeys), ConfigError);
    EXPECT_THROW(RunConfig::parse("dim 2\n", kKeys), ConfigError);
    EXPECT_THROW(RunConfig::parse("= 2\n", kKeys), ConfigError);
}

TEST(RunConfig, TypedGettersReject) {
    const RunConfig c = RunConfig::parse("dim = two\nlevel = 3.5\n", kKeys);
    EXPECT_THROW(c.get_int("dim", 0), ConfigError);
    EXPECT_THROW(c.get_int("level", 0), ConfigError);
    EXPECT_THROW(c.get_double("dim", 0), ConfigError);
    EXPECT_THROW(RunConfig::load("/nonexistent/cge.cfg", kKeys), ConfigError);
}

TEST(Csv, Escaping) {
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

ExperimentRecord sample_record() {
    ExperimentRecord r;
    r.kind = "harnack";
    r.field_descriptor = "laminate(d=2,N=3,axis=0,values=1:4)";
    r.field_hash = "00ff";
    r.boundary = "constant(c=1)";
    r.theta = 4;
    r.harnack_log_ratio = std::nan("");
    r.lb_ratio = 1.5;
    r.pass = true;
    r.diagnostics["x"] = std::numeric_limits<double>::infinity();
    return r;
}

TEST(Csv, RecordsUseCrlfAndQuote) {
    const std::string csv = records_csv({sample_record()});
    EXPECT_EQ(csv.substr(0, csv.find("\r\n")),
              "field_hash,field,boundary,kind,theta,harnack_log_ratio,lb_ratio,bound,pass");
    EXPECT_NE(csv.find("\"laminate(d=2,N=3,axis=0,values=1:4)\""), std::string::npos);
    EXPECT_NE(csv.find(",,1.5,"), std::string::npos);  // NaN becomes an empty cell
    EXPECT_EQ(csv.find('\n', 0), csv.find("\r\n") + 1);
}

TEST(Csv, PlotData) {
    const std::string h = emit_plot_data({sample_record()}, PlotKind::local_boundedness);
    EXPECT_EQ(h.substr(0, h.find("\r\n")), "x,y,series,field_hash");
    EXPECT_NE(h.find("4,1.5,"), std::string::npos);
    EXPECT_THROW(emit_plot_data(std::vector<ExperimentRecord>{}, PlotKind::harnack), ValidationError);
    EXPECT_THROW(emit_plot_data(SharpnessReport{}), ValidationError);
}

TEST(Json, RecordNonFiniteBecomesNull) {
    const Json j = Json::parse(record_json_line(sample_record()));
    EXPECT_TRUE(j["harnack_log_ratio"].is_null());
    EXPECT_TRUE(j["diagnostics"]["x"].is_null());
    EXPECT_EQ(j["pass"], true);
    EXPECT_EQ(record_json_line(sample_record()).back(), '\n');
}

TEST(Json, EllipticityReportIsDeterministic) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 2), 0.1, 10, 3);
    auto run = [&] {
        const SweepResult sw = sweep(f, SweepOptions{});
        ReportMeta meta{"ellipticity", f.content_hash_hex(), f.descriptor(), RunConfig::parse("seed = 3\n", kKeys)};
        return report_json(meta, ellipticity_constants(sw, 0.4, 0.3));
    };
    const std::string a = run();
    EXPECT_EQ(a, run());
    const Json j = Json::parse(a);
    EXPECT_EQ(j["tool"], "cge");
    EXPECT_EQ(j["version"], tool_version());
    EXPECT_EQ(j["config"]["seed"], "3");
    EXPECT_EQ(a.find("wall"), std::string::npos);
}

TEST(Json, AuditAndSweepReports) {
    const CoefficientField f = gen_random_spd(GridSpec::make(2, 1), 0.1, 10, 4);
    const SweepResult sw = sweep(f, SweepOptions{});
    const ReportMeta meta{"audit", f.content_hash_hex(), f.descriptor(), {}};
    const Json a = Json::parse(report_json(meta, audit(sw)));
    EXPECT_TRUE(a.dump().find("violations") != std::string::npos);
    const Json s = Json::parse(report_json(meta, sw, {ellipticity_constants(sw, 0.5, 0.2)}));
    EXPECT_FALSE(s.empty());
}

TEST(ScaleTerms, OneRowPerLevelAndSeries) {
    const SweepResult sw = sweep(gen_constant(GridSpec::make(2, 2), SymMat::identity(2)), SweepOptions{});
    const std::string csv = emit_scale_terms(ellipticity_constants(sw, 0.5, 0.5), "abc");
    std::size_t rows = 0;
    for (std::size_t p = 0; (p = csv.find("\r\n", p)) != std::string::npos; p += 2) ++rows;
    EXPECT_EQ(rows, 1u + 2u * 3u);
}

}  // namespace
