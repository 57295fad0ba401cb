#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "modrec/bench.hpp"
#include "modrec/errors.hpp"

using namespace modrec;
using namespace modrec::bench;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.lambda = {0.05, 0.2};
    cfg.of = {6.0};
    cfg.snr_db = {kNoNoise, 20.0};
    cfg.trials = 3;
    cfg.base_seed = 11;
    return cfg;
}

std::string table_csv(const SweepTable& t) {
    std::ostringstream out;
    write_table(out, t);
    return out.str();
}

}  // namespace

TEST_CASE("format_number and parse_number round trip") {
    for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.125, -0.025, kNoNoise}) {
        CHECK(parse_number(format_number(v)) == v);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(kNoNoise) == "inf");
    CHECK_THROWS_AS(parse_number("abc"), InvalidArgument);
    CHECK_THROWS_AS(parse_number("1.5x"), InvalidArgument);
    CHECK_THROWS_AS(parse_number(""), InvalidArgument);
}

TEST_CASE("methods") {
    CHECK(parse_method("b2r2") == Method::B2R2);
    CHECK(parse_method("hod") == Method::HOD);
    CHECK(to_string(Method::HOD) == "hod");
    CHECK_THROWS_AS(parse_method("lasso"), InvalidArgument);
}

TEST_CASE("cells enumerate lambda, OF, SNR, then method") {
    const auto c = cells(small_config());
    REQUIRE(c.size() == 8);
    CHECK(c[0] == Cell{0.05, 6.0, kNoNoise, Method::B2R2});
    CHECK(c[1] == Cell{0.05, 6.0, kNoNoise, Method::HOD});
    CHECK(c[2] == Cell{0.05, 6.0, 20.0, Method::B2R2});
    CHECK(c[7] == Cell{0.2, 6.0, 20.0, Method::HOD});
}

TEST_CASE("trial seeds") {
    const Cell a{0.05, 6.0, 20.0, Method::B2R2};
    Cell b = a;
    b.method = Method::HOD;
    CHECK(trial_seed(1, a, 0) == trial_seed(1, b, 0));
    CHECK(trial_seed(1, a, 0) != trial_seed(1, a, 1));
    CHECK(trial_seed(1, a, 0) != trial_seed(2, a, 0));
    Cell c = a;
    c.lambda = 0.2;
    CHECK(trial_seed(1, a, 0) != trial_seed(1, c, 0));
}

TEST_CASE("paired methods see the same signal and noise") {
    const auto cfg = small_config();
    const Cell a{0.05, 6.0, 20.0, Method::B2R2};
    Cell b = a;
    b.method = Method::HOD;
    const auto da = make_trial_data(cfg, a, trial_seed(1, a, 2));
    const auto db = make_trial_data(cfg, b, trial_seed(1, b, 2));
    CHECK(da.clean.samples == db.clean.samples);
    CHECK(da.observed.samples == db.observed.samples);
}

TEST_CASE("run_sweep is deterministic and independent of parallelism") {
    const auto cfg = small_config();
    const auto one = run_sweep(cfg, 1);
    const auto again = run_sweep(cfg, 1);
    const auto eight = run_sweep(cfg, 8);
    CHECK(table_csv(one) == table_csv(again));
    CHECK(table_csv(one) == table_csv(eight));
    REQUIRE(one.rows.size() == 8);
    for (const auto& r : one.rows) CHECK(r.trials == 3);
    CHECK(one.reports.size() == 24);
    // Noiseless B2R2 at OF 6 is exact.
    CHECK(one.rows[0].failures == 0);
    CHECK(one.rows[0].mean_mse_db == kMseFloorDb);
}

TEST_CASE("table CSV") {
    SUBCASE("empty table is header only") {
        CHECK(table_csv({}) == "lambda,of,snr_db,method,trials,failures,mean_mse_db\n");
        std::istringstream in("lambda,of,snr_db,method,trials,failures,mean_mse_db\n");
        CHECK(read_table(in).rows.empty());
    }
    SUBCASE("fixture parses") {
        std::istringstream in(
            "lambda,of,snr_db,method,trials,failures,mean_mse_db\n"
            "0.025,10,25,b2r2,50,0,-56.25\n"
            "0.025,10,inf,hod,50,50,300\n");
        const auto t = read_table(in);
        REQUIRE(t.rows.size() == 2);
        CHECK(t.rows[0] == SweepRow{{0.025, 10.0, 25.0, Method::B2R2}, 50, 0, -56.25});
        CHECK(t.rows[1] == SweepRow{{0.025, 10.0, kNoNoise, Method::HOD}, 50, 50, 300.0});
    }
    SUBCASE("round trip is byte-identical") {
        const auto t = run_sweep(small_config(), 1);
        const auto csv = table_csv(t);
        std::istringstream in(csv);
        CHECK(table_csv(read_table(in)) == csv);
    }
    SUBCASE("errors carry line numbers") {
        std::istringstream bad_header("lambda,of\n");
        CHECK_THROWS_AS(read_table(bad_header), ParseError);
        std::istringstream bad_row(
            "lambda,of,snr_db,method,trials,failures,mean_mse_db\n"
            "0.025,10,25,b2r2,50,0,-56.25\n"
            "0.025,ten,25,b2r2,50,0,-56.25\n");
        try {
            read_table(bad_row);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
        std::istringstream short_row(
            "lambda,of,snr_db,method,trials,failures,mean_mse_db\n"
            "0.025,10,25\n");
        CHECK_THROWS_AS(read_table(short_row), ParseError);
    }
}

TEST_CASE("raw per-trial CSV has one line per trial") {
    const auto t = run_sweep(small_config(), 1);
    std::ostringstream out;
    write_reports(out, t.reports);
    const auto text = out.str();
    CHECK(text.rfind("lambda,of,snr_db,method,trial,seed,converged,mse_db,n_lambda,wall_time_s\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 25);
}

TEST_CASE("print_table renders every row") {
    const auto t = run_sweep(small_config(), 1);
    std::ostringstream out;
    print_table(out, t);
    const auto text = out.str();
    CHECK(text.find("b2r2") != std::string::npos);
    CHECK(text.find("hod") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') >= 9);
}

TEST_CASE("config parsing") {
    SUBCASE("full config") {
        const auto cfg = parse_config(R"({
            "lambda": [0.025], "of": [4, 10], "snr_db": [25, "inf", null],
            "trials": 7, "base_seed": 3, "methods": ["hod"],
            "b2r2": {"max_iters": 100}, "hod": {"order": 2, "auto_order": false}
        })");
        CHECK(cfg.lambda == std::vector<double>{0.025});
        CHECK(cfg.of == std::vector<double>{4, 10});
        CHECK(cfg.snr_db == std::vector<double>{25, kNoNoise, kNoNoise});
        CHECK(cfg.trials == 7);
        CHECK(cfg.base_seed == 3);
        CHECK(cfg.methods == std::vector<Method>{Method::HOD});
        CHECK(cfg.pgd.max_iters == 100);
        CHECK(cfg.hod.order == 2);
        CHECK_FALSE(cfg.hod.auto_order);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config(R"({"lambda": [0.1], "of": [4], "snr_db": [10], "lamda": 1})"),
                        InvalidArgument);
        CHECK_THROWS_AS(parse_config(R"({"lambda": [0.1], "of": [4], "snr_db": [10], "b2r2": {"iters": 1}})"),
                        InvalidArgument);
    }
    SUBCASE("all problems are reported together") {
        try {
            parse_config(R"({"lambda": [-1], "of": [0.5], "snr_db": [10], "trials": 0})");
            FAIL("expected an error");
        } catch (const InvalidArgument& e) {
            const std::string msg = e.what();
            CHECK(msg.find("lambda") != std::string::npos);
            CHECK(msg.find("of") != std::string::npos);
            CHECK(msg.find("trials") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(parse_config("{"), ParseError);
        CHECK_THROWS_AS(parse_config("[1, 2]"), ParseError);
    }
    SUBCASE("wrong types") {
        CHECK_THROWS_AS(parse_config(R"({"lambda": 0.1, "of": [4], "snr_db": [10]})"), InvalidArgument);
        CHECK_THROWS_AS(parse_config(R"({"lambda": [0.1], "of": [4], "snr_db": [10], "methods": ["x"]})"),
                        InvalidArgument);
    }
}

TEST_CASE("presets") {
    auto cfg = small_config();
    cfg.trials = 250;
    apply_preset(cfg, "full");
    CHECK(cfg.trials == 250);
    apply_preset(cfg, "desk");
    CHECK(cfg.trials == 50);
    CHECK_THROWS_AS(apply_preset(cfg, "huge"), InvalidArgument);
}

TEST_CASE("bundled configs load") {
    for (const char* name : {"fig2.json", "fig3.json"}) {
        const auto cfg = load_config(std::string(MODREC_CONFIG_DIR) + "/" + name);
        CHECK(cfg.validate().empty());
    }
}
