#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ope/harness.hpp"

using namespace ope;

namespace {

SweepSpec small_spec() {
    SweepSpec spec;
    spec.base.num_actions = 10;
    spec.base.context_dim = 4;
    spec.base.embed_dims = 2;
    spec.base.embed_cardinality = 3;
    spec.n = 500;
    spec.param = "n";
    spec.values = {500};
    spec.roster = {"ips"};
    spec.reps = 20;
    spec.ground_truth_m = 200000;
    spec.seed = 7;
    spec.posterior.max_iters = 60;
    return spec;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("sweep values reach every tunable parameter") {
    SweepSpec spec = small_spec();

    spec.param = "num_actions";
    CHECK(apply_sweep_value(spec, 37).config.num_actions == 37);
    spec.param = "n";
    CHECK(apply_sweep_value(spec, 1234).n == 1234);
    spec.param = "num_deficient";
    CHECK(apply_sweep_value(spec, 3).config.num_deficient_actions == 3);
    spec.param = "withheld_count";
    CHECK(apply_sweep_value(spec, 1).config.withheld_dims == std::vector<int>{0});
    spec.param = "beta";
    CHECK(apply_sweep_value(spec, -2.5).config.beta == -2.5);
    spec.param = "epsilon";
    CHECK(apply_sweep_value(spec, 0.3).config.epsilon == 0.3);
    spec.param = "sigma";
    CHECK(apply_sweep_value(spec, 1.5).config.reward_noise == 1.5);

    spec.param = "nonsense";
    CHECK_THROWS(apply_sweep_value(spec, 1.0));
    CHECK_THROWS(spec.validate());
}

TEST_CASE("on-policy ips is unbiased across replications") {
    SweepSpec spec = small_spec();
    spec.base.beta = 0.0;   // uniform logging
    spec.base.epsilon = 1.0; // uniform target: on-policy
    spec.reps = 40;
    const auto report = run_replications(spec);
    REQUIRE(report.cells.size() == 1);
    const auto& cell = report.cells[0];
    CHECK(cell.failures == 0);
    const double se = std::sqrt(cell.variance / spec.reps);
    CHECK(std::sqrt(cell.squared_bias) <= 3.0 * se + 3.0 * cell.ground_truth_se);
}

TEST_CASE("a single replication has zero variance") {
    SweepSpec spec = small_spec();
    spec.reps = 1;
    const auto report = run_replications(spec);
    CHECK(report.cells[0].variance == 0.0);
    CHECK(report.cells[0].mse == report.cells[0].squared_bias);
}

TEST_CASE("marginal weights dominate vanilla weights in a noiseless uniform setup") {
    SweepSpec spec = small_spec();
    spec.base.reward_noise = 0.0;
    spec.base.beta = 0.0;
    spec.base.epsilon = 1.0;
    spec.roster = {"ips", "mips-true"};
    spec.reps = 100;
    const auto report = run_replications(spec);
    REQUIRE(report.cells.size() == 2);
    const auto& ips_cell = report.cells[0];
    const auto& mips_cell = report.cells[1];
    CHECK(ips_cell.estimator == "ips");
    CHECK(mips_cell.estimator == "mips-true");
    CHECK(mips_cell.mse <= 1.05 * ips_cell.mse);
}

TEST_CASE("mse decomposes into squared bias plus variance") {
    SweepSpec spec = small_spec();
    spec.param = "num_actions";
    spec.values = {5, 10};
    spec.roster = {"ips", "mips-true"};
    const auto report = run_replications(spec);
    REQUIRE(report.cells.size() == 4);
    for (const auto& cell : report.cells) {
        CHECK(std::abs(cell.mse - (cell.squared_bias + cell.variance)) <=
              1e-9 * std::max(1.0, cell.mse));
    }
}

TEST_CASE("identical specs produce byte-identical reports") {
    SweepSpec spec = small_spec();
    spec.roster = {"ips", "mips-true"};
    spec.reps = 10;
    const auto r1 = run_replications(spec);
    const auto r2 = run_replications(spec, /*parallel=*/false);
    emit_report(r1, spec, "harness_det_a.csv");
    emit_report(r2, spec, "harness_det_b.csv");
    CHECK(slurp("harness_det_a.csv") == slurp("harness_det_b.csv"));
    CHECK(slurp("harness_det_a.csv.manifest") == slurp("harness_det_b.csv.manifest"));
    for (const char* p : {"harness_det_a.csv", "harness_det_b.csv", "harness_det_a.csv.manifest",
                          "harness_det_b.csv.manifest"})
        std::remove(p);
}

TEST_CASE("extending the replication count preserves earlier seeds") {
    SweepSpec spec = small_spec();
    spec.reps = 10;
    const auto short_run = run_replications(spec);
    spec.reps = 20;
    const auto long_run = run_replications(spec);
    for (int t = 0; t < 10; ++t) {
        CHECK(long_run.cells[0].per_seed[t].estimate == short_run.cells[0].per_seed[t].estimate);
        CHECK(long_run.cells[0].per_seed[t].seed == short_run.cells[0].per_seed[t].seed);
    }
}

TEST_CASE("emitted csv round-trips and has the expected shape") {
    SweepSpec spec = small_spec();
    spec.param = "num_actions";
    spec.values = {5, 8, 10};
    spec.roster = {"ips", "mips-true"};
    spec.reps = 5;
    const auto report = run_replications(spec);
    emit_report(report, spec, "harness_shape.csv");

    const std::string csv = slurp("harness_shape.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line ==
          "estimator,param,value,seed,estimate,ground_truth,squared_error,mse,squared_bias,"
          "variance");
    int aggregate_rows = 0, per_seed_rows = 0;
    while (std::getline(lines, line)) {
        if (line.find(",-1,") != std::string::npos)
            ++aggregate_rows;
        else
            ++per_seed_rows;
    }
    CHECK(aggregate_rows == 6); // two estimators x three values
    CHECK(per_seed_rows == 30);

    const auto back = parse_report_csv("harness_shape.csv");
    REQUIRE(back.cells.size() == report.cells.size());
    for (std::size_t c = 0; c < back.cells.size(); ++c) {
        CHECK(back.cells[c].estimator == report.cells[c].estimator);
        CHECK(back.cells[c].value == report.cells[c].value);
        CHECK(back.cells[c].mse == report.cells[c].mse);
        CHECK(back.cells[c].squared_bias == report.cells[c].squared_bias);
        CHECK(back.cells[c].variance == report.cells[c].variance);
        CHECK(back.cells[c].ground_truth == report.cells[c].ground_truth);
        REQUIRE(back.cells[c].per_seed.size() == report.cells[c].per_seed.size());
        for (std::size_t t = 0; t < back.cells[c].per_seed.size(); ++t)
            CHECK(back.cells[c].per_seed[t].estimate == report.cells[c].per_seed[t].estimate);
    }
    std::remove("harness_shape.csv");
    std::remove("harness_shape.csv.manifest");
}

TEST_CASE("a report with no cells yields a header-only csv") {
    ExperimentReport empty;
    empty.param = "num_actions";
    emit_report(empty, small_spec(), "harness_empty.csv");
    const std::string csv = slurp("harness_empty.csv");
    CHECK(csv ==
          "estimator,param,value,seed,estimate,ground_truth,squared_error,mse,squared_bias,"
          "variance\n");
    std::remove("harness_empty.csv");
    std::remove("harness_empty.csv.manifest");
}

TEST_CASE("failure accounting") {
    ExperimentReport report;
    report.total_runs = 10;
    report.total_failures = 5;
    CHECK_FALSE(failure_threshold_exceeded(report)); // exactly half is tolerated
    report.total_failures = 6;
    CHECK(failure_threshold_exceeded(report));
}

TEST_CASE("bootstrap cdf") {
    SweepSpec spec = small_spec();
    const auto env = build_environment(apply_sweep_value(spec, 500).config);
    const auto logging = sample_logged_data_full(env, 600, 11);
    auto on_policy = sample_logged_data_full(env, 400, 12).data;

    // Self-relative: every resample scores exactly 1.
    const auto self_rel = bootstrap_cdf(on_policy, logging, {"ips"}, 300, 25, 3, &env, spec);
    REQUIRE(self_rel.size() == 1);
    CHECK(self_rel[0].estimator == "ips");
    CHECK(self_rel[0].rel_se.size() + self_rel[0].excluded == 25);
    for (double v : self_rel[0].rel_se) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    // T=1: one step.
    const auto single = bootstrap_cdf(on_policy, logging, {"ips", "mips-true"}, 300, 1, 4, &env,
                                      spec);
    for (const auto& row : single) CHECK(row.rel_se.size() + row.excluded == 1);

    // Structural check: sorted support per estimator, shared exclusion count.
    const auto rows = bootstrap_cdf(on_policy, logging, {"ips", "mips-true", "dm"}, 300, 30, 5,
                                    &env, spec);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.rel_se.size() + row.excluded == 30);
        for (std::size_t i = 1; i < row.rel_se.size(); ++i)
            CHECK(row.rel_se[i] >= row.rel_se[i - 1]);
    }
    CHECK(rows[0].excluded == rows[1].excluded);

    emit_bootstrap_cdf(rows, "harness_cdf.csv");
    const std::string csv = slurp("harness_cdf.csv");
    CHECK(csv.rfind("estimator,", 0) == 0);
    std::remove("harness_cdf.csv");
}
