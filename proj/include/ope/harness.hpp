#pragma once
#include <optional>
#include <string>
#include <vector>

#include "ope/estimators.hpp"
#include "ope/models.hpp"
#include "ope/slope.hpp"
#include "ope/synthgen.hpp"

namespace ope {

// Estimator names accepted in a roster.
extern const std::vector<std::string> kEstimatorRoster;
bool known_estimator(const std::string& name);

struct SweepSpec {
    SyntheticConfig base;
    long long n = 10000;       // dataset size unless it is the swept parameter
    std::string param = "num_actions";
    std::vector<double> values;
    std::vector<std::string> roster;
    int reps = 100;
    long long ground_truth_m = 1000000;
    std::uint64_t seed = 0;
    bool resample_env = false; // resample environment parameters per seed

    PosteriorHyper posterior;
    RidgeHyper ridge;
    double slope_delta = 0.05;
    std::vector<int> slope_subset_sizes; // empty: every nested subset size

    void validate() const;
};

// Swept parameter applied to (config, n).
struct SweepPoint {
    SyntheticConfig config;
    long long n = 0;
};
SweepPoint apply_sweep_value(const SweepSpec& spec, double value);

struct SeedOutcome {
    int seed = 0;
    bool ok = false;
    double estimate = 0.0;
    double ground_truth = 0.0; // per-seed (differs only when resampling the env)
    std::string reason;        // set when !ok
};

// One (estimator, swept value) cell.
struct CellResult {
    std::string estimator;
    double value = 0.0;
    std::vector<SeedOutcome> per_seed;
    double ground_truth = 0.0;
    double ground_truth_se = 0.0;
    int failures = 0;
    double mse = 0.0, squared_bias = 0.0, variance = 0.0;

    void aggregate(); // fills failures/mse/squared_bias/variance from per_seed
};

struct ExperimentReport {
    std::string param;
    std::vector<CellResult> cells;
    long long total_runs = 0;
    long long total_failures = 0;
};

ExperimentReport run_replications(const SweepSpec& spec, bool parallel = true);

// True when more than half of all (estimator, value, seed) runs failed.
bool failure_threshold_exceeded(const ExperimentReport& report);

// Writes the results CSV plus "<path>.manifest"; byte-identical on reruns.
void emit_report(const ExperimentReport& report, const SweepSpec& spec,
                 const std::string& csv_path);
// Reads back an emitted CSV (aggregate and per-seed rows).
ExperimentReport parse_report_csv(const std::string& csv_path);

// Evaluates one roster on one sampled dataset. `env` supplies exact embedding
// distributions for mips-true and the reward models; it may be null when the
// roster needs neither.
struct RosterEvaluation {
    std::vector<SeedOutcome> outcomes; // aligned with roster, seed field unset
};
RosterEvaluation evaluate_roster(const SampledData& sampled,
                                 const std::vector<std::string>& roster,
                                 const SyntheticEnvironment* env, const SweepSpec& spec,
                                 std::uint64_t fit_seed);

struct BootstrapCdfRow {
    std::string estimator;
    std::vector<double> rel_se; // sorted ascending: the empirical CDF support
    long long excluded = 0;     // resamples with zero IPS squared error
};

// Algorithm: T size-n bootstrap resamples of the logged data; per estimator,
// rel-SE = (V_on - V_hat)^2 / (V_on - V_hat_ips)^2 with V_on the mean reward
// of the on-policy dataset.
std::vector<BootstrapCdfRow> bootstrap_cdf(const LoggedDataset& on_policy_data,
                                           const SampledData& logging_data,
                                           const std::vector<std::string>& roster, long long n,
                                           int T, std::uint64_t seed,
                                           const SyntheticEnvironment* env, const SweepSpec& spec);

void emit_bootstrap_cdf(const std::vector<BootstrapCdfRow>& rows, const std::string& csv_path);

} // namespace ope
