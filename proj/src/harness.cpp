#include "ope/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ope {

const std::vector<std::string> kEstimatorRoster = {
    "ips",  "dm",        "dr",   "mrdr",      "switch-dr",
    "dros", "dr-lambda", "mips", "mips-true", "mips-slope",
};

bool known_estimator(const std::string& name) {
    return std::find(kEstimatorRoster.begin(), kEstimatorRoster.end(), name) !=
           kEstimatorRoster.end();
}

namespace {

const std::vector<std::string> kSweepParams = {
    "num_actions", "n", "num_deficient", "withheld_count", "beta", "epsilon", "sigma",
};

} // namespace

void SweepSpec::validate() const {
    base.validate();
    if (values.empty()) throw std::invalid_argument("sweep: value list is empty");
    if (roster.empty()) throw std::invalid_argument("sweep: estimator roster is empty");
    for (const auto& name : roster)
        if (!known_estimator(name))
            throw std::invalid_argument("sweep: unknown estimator '" + name + "'");
    if (std::find(kSweepParams.begin(), kSweepParams.end(), param) == kSweepParams.end())
        throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
    if (reps < 1) throw std::invalid_argument("sweep: reps must be >= 1");
    if (n < 1) throw std::invalid_argument("sweep: n must be >= 1");
    if (ground_truth_m < 1) throw std::invalid_argument("sweep: ground-truth m must be >= 1");
}

SweepPoint apply_sweep_value(const SweepSpec& spec, double value) {
    SweepPoint point{spec.base, spec.n};
    if (spec.param == "num_actions") {
        point.config.num_actions = static_cast<int>(std::llround(value));
    } else if (spec.param == "n") {
        point.n = std::llround(value);
    } else if (spec.param == "num_deficient") {
        point.config.num_deficient_actions = static_cast<int>(std::llround(value));
    } else if (spec.param == "withheld_count") {
        point.config.withheld_dims.clear();
        for (int k = 0; k < static_cast<int>(std::llround(value)); ++k)
            point.config.withheld_dims.push_back(k);
    } else if (spec.param == "beta") {
        point.config.beta = value;
    } else if (spec.param == "epsilon") {
        point.config.epsilon = value;
    } else if (spec.param == "sigma") {
        point.config.reward_noise = value;
    } else {
        throw std::invalid_argument("sweep: unknown parameter '" + spec.param + "'");
    }
    point.config.validate();
    return point;
}

RosterEvaluation evaluate_roster(const SampledData& sampled,
                                 const std::vector<std::string>& roster,
                                 const SyntheticEnvironment* env, const SweepSpec& spec,
                                 std::uint64_t fit_seed) {
    const LoggedDataset& data = sampled.data;
    const std::span<const Distribution> target(sampled.target);
    const std::span<const Distribution> logging(sampled.logging);
    const std::vector<Distribution>* embed_model = env ? &env->embed_dists : nullptr;

    std::optional<CrossFitPlan> plan;
    auto get_plan = [&]() -> const CrossFitPlan& {
        if (!plan)
            plan = CrossFitPlan::make(
                data.size(), 2,
                derive_seed(fit_seed, {static_cast<std::uint64_t>(Stream::Folds)}));
        return *plan;
    };
    std::optional<RewardModel> plain_model, mrdr_model;
    auto get_plain = [&]() -> const RewardModel& {
        if (!plain_model)
            plain_model = fit_reward_model(data, get_plan(), spec.ridge, embed_model);
        return *plain_model;
    };
    auto get_mrdr = [&]() -> const RewardModel& {
        if (!mrdr_model)
            mrdr_model = fit_mrdr_reward_model(data, target, get_plan(), spec.ridge, embed_model);
        return *mrdr_model;
    };
    PosteriorHyper ph = spec.posterior;
    ph.seed = derive_seed(fit_seed, {static_cast<std::uint64_t>(Stream::Instance)});
    std::optional<ActionPosteriorModel> posterior;
    auto get_posterior = [&]() -> const ActionPosteriorModel& {
        if (!posterior) posterior = fit_action_posterior(data, data.observed_dims(), ph);
        return *posterior;
    };

    RosterEvaluation out;
    out.outcomes.resize(roster.size());
    for (std::size_t i = 0; i < roster.size(); ++i) {
        const std::string& name = roster[i];
        SeedOutcome& res = out.outcomes[i];
        try {
            if (name == "ips") {
                res.estimate = ips(data, target).estimate;
            } else if (name == "dm") {
                res.estimate = dm(data, target, get_plain()).estimate;
            } else if (name == "dr") {
                res.estimate = dr(data, target, get_plain()).estimate;
            } else if (name == "mrdr") {
                res.estimate = dr(data, target, get_mrdr()).estimate;
            } else if (name == "switch-dr" || name == "dros" || name == "dr-lambda") {
                const ShrinkKind kind = name == "switch-dr" ? ShrinkKind::Switch
                                        : name == "dros"    ? ShrinkKind::OptimisticShrinkage
                                                            : ShrinkKind::Lambda;
                const auto grid = default_lambda_grid(data, target, kind);
                res.estimate =
                    tune_lambda(data, target, get_plain(), kind, grid, spec.slope_delta)
                        .record.estimate;
            } else if (name == "mips-true") {
                if (!env)
                    throw std::invalid_argument(
                        "mips-true needs the synthetic environment's embedding model");
                const auto w = true_marginal_weights(*env, data, target, logging);
                res.estimate = mips(data, w).estimate;
            } else if (name == "mips") {
                const auto est =
                    estimate_marginal_weights(data, target, logging, get_posterior());
                res.estimate = mips(data, est.weights).estimate;
            } else if (name == "mips-slope") {
                const std::vector<int>* sizes =
                    spec.slope_subset_sizes.empty() ? nullptr : &spec.slope_subset_sizes;
                res.estimate = select_embedding_dims(data, target, logging, spec.slope_delta,
                                                     ph, false, sizes)
                                   .record.estimate;
            } else {
                throw std::invalid_argument("unknown estimator '" + name + "'");
            }
            res.ok = std::isfinite(res.estimate);
            if (!res.ok) res.reason = "non-finite estimate";
        } catch (const std::exception& e) {
            res.ok = false;
            res.reason = e.what();
        }
    }
    return out;
}

void CellResult::aggregate() {
    failures = 0;
    std::vector<double> diffs, sq;
    for (const auto& s : per_seed) {
        if (!s.ok) {
            ++failures;
            continue;
        }
        diffs.push_back(s.estimate - s.ground_truth);
        sq.push_back((s.estimate - s.ground_truth) * (s.estimate - s.ground_truth));
    }
    if (diffs.empty()) {
        mse = squared_bias = variance = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    mse = stable_mean(sq);
    const double bias = stable_mean(diffs);
    squared_bias = bias * bias;
    std::vector<double> centered(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i)
        centered[i] = (diffs[i] - bias) * (diffs[i] - bias);
    variance = stable_mean(centered);
}

ExperimentReport run_replications(const SweepSpec& spec, bool parallel) {
    spec.validate();
    ExperimentReport report;
    report.param = spec.param;

    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        const double value = spec.values[vi];
        const SweepPoint point = apply_sweep_value(spec, value);

        SyntheticEnvironment shared_env;
        GroundTruth shared_gt{0.0, 0.0};
        if (!spec.resample_env) {
            SyntheticConfig cfg = point.config;
            cfg.seed = spec.seed;
            shared_env = build_environment(cfg);
            shared_gt = ground_truth_with_se(
                shared_env, spec.ground_truth_m,
                derive_seed(spec.seed, {static_cast<std::uint64_t>(Stream::GroundTruth),
                                        static_cast<std::uint64_t>(vi)}),
                parallel);
        }

        std::vector<RosterEvaluation> evals(spec.reps);
        std::vector<GroundTruth> gts(spec.reps, shared_gt);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (int t = 0; t < spec.reps; ++t) {
            try {
                const SyntheticEnvironment* env = &shared_env;
                SyntheticEnvironment local_env;
                if (spec.resample_env) {
                    SyntheticConfig cfg = point.config;
                    cfg.seed = derive_seed(
                        spec.seed, {static_cast<std::uint64_t>(Stream::Environment),
                                    static_cast<std::uint64_t>(vi),
                                    static_cast<std::uint64_t>(t)});
                    local_env = build_environment(cfg);
                    env = &local_env;
                    gts[t] = ground_truth_with_se(
                        local_env, spec.ground_truth_m,
                        derive_seed(spec.seed, {static_cast<std::uint64_t>(Stream::GroundTruth),
                                                static_cast<std::uint64_t>(vi),
                                                static_cast<std::uint64_t>(t)}),
                        false);
                }
                const std::uint64_t data_seed =
                    derive_seed(spec.seed, {static_cast<std::uint64_t>(Stream::Data),
                                            static_cast<std::uint64_t>(vi),
                                            static_cast<std::uint64_t>(t)});
                const SampledData sampled = sample_logged_data_full(*env, point.n, data_seed);
                const std::uint64_t fit_seed =
                    derive_seed(spec.seed, {static_cast<std::uint64_t>(Stream::Instance),
                                            static_cast<std::uint64_t>(vi),
                                            static_cast<std::uint64_t>(t)});
                evals[t] = evaluate_roster(sampled, spec.roster, env, spec, fit_seed);
            } catch (const std::exception& e) {
                evals[t].outcomes.assign(spec.roster.size(), SeedOutcome{});
                for (auto& o : evals[t].outcomes) o.reason = e.what();
            }
        }

        for (std::size_t r = 0; r < spec.roster.size(); ++r) {
            CellResult cell;
            cell.estimator = spec.roster[r];
            cell.value = value;
            std::vector<double> gt_values;
            for (int t = 0; t < spec.reps; ++t) {
                SeedOutcome o = evals[t].outcomes.size() > r ? evals[t].outcomes[r]
                                                             : SeedOutcome{};
                o.seed = t;
                o.ground_truth = gts[t].value;
                cell.per_seed.push_back(std::move(o));
                gt_values.push_back(gts[t].value);
            }
            cell.ground_truth = stable_mean(gt_values);
            cell.ground_truth_se = spec.resample_env ? 0.0 : shared_gt.standard_error;
            cell.aggregate();
            report.total_runs += spec.reps;
            report.total_failures += cell.failures;
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

bool failure_threshold_exceeded(const ExperimentReport& report) {
    return report.total_runs > 0 && 2 * report.total_failures > report.total_runs;
}

void emit_report(const ExperimentReport& report, const SweepSpec& spec,
                 const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
    out << "estimator,param,value,seed,estimate,ground_truth,squared_error,"
           "mse,squared_bias,variance\n";
    for (const auto& cell : report.cells) {
        for (const auto& s : cell.per_seed) {
            if (!s.ok) continue;
            const double sqerr = (s.estimate - s.ground_truth) * (s.estimate - s.ground_truth);
            out << cell.estimator << ',' << report.param << ',' << format_double(cell.value)
                << ',' << s.seed << ',' << format_double(s.estimate) << ','
                << format_double(s.ground_truth) << ',' << format_double(sqerr) << ",,,\n";
        }
        std::vector<double> est;
        for (const auto& s : cell.per_seed)
            if (s.ok) est.push_back(s.estimate);
        const double mean_est = est.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : stable_mean(est);
        out << cell.estimator << ',' << report.param << ',' << format_double(cell.value)
            << ",-1," << format_double(mean_est) << ',' << format_double(cell.ground_truth)
            << ",," << format_double(cell.mse) << ',' << format_double(cell.squared_bias) << ','
            << format_double(cell.variance) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + csv_path);
    out.close();

    std::ofstream man(csv_path + ".manifest");
    if (!man) throw std::runtime_error("cannot open " + csv_path + ".manifest for writing");
    man << "mips_ope sweep manifest v1\n";
    man << "param: " << spec.param << "\nvalues:";
    for (double v : spec.values) man << ' ' << format_double(v);
    man << "\nroster:";
    for (const auto& r : spec.roster) man << ' ' << r;
    man << "\nreps: " << spec.reps << "\nn: " << spec.n << "\nseed: " << spec.seed
        << "\nground_truth_m: " << spec.ground_truth_m
        << "\nresample_env: " << (spec.resample_env ? 1 : 0)
        << "\nnum_actions: " << spec.base.num_actions
        << "\ncontext_dim: " << spec.base.context_dim
        << "\nembed_dims: " << spec.base.embed_dims
        << "\nembed_cardinality: " << spec.base.embed_cardinality
        << "\nbeta: " << format_double(spec.base.beta)
        << "\nepsilon: " << format_double(spec.base.epsilon)
        << "\nsigma: " << format_double(spec.base.reward_noise)
        << "\nnum_deficient: " << spec.base.num_deficient_actions << "\nwithheld_dims:";
    for (int d : spec.base.withheld_dims) man << ' ' << d;
    man << "\nposterior_l2: " << format_double(spec.posterior.l2)
        << "\nposterior_max_iters: " << spec.posterior.max_iters
        << "\nposterior_tol: " << format_double(spec.posterior.tol)
        << "\nridge_l2: " << format_double(spec.ridge.l2)
        << "\nslope_delta: " << format_double(spec.slope_delta) << "\nslope_subset_sizes:";
    for (int s : spec.slope_subset_sizes) man << ' ' << s;
    man << "\ntotal_runs: " << report.total_runs
        << "\ntotal_failures: " << report.total_failures << '\n';
    for (const auto& cell : report.cells) {
        man << "cell: " << cell.estimator << ' ' << format_double(cell.value)
            << " ground_truth=" << format_double(cell.ground_truth)
            << " ground_truth_se=" << format_double(cell.ground_truth_se)
            << " failures=" << cell.failures;
        for (const auto& s : cell.per_seed)
            if (!s.ok) man << " seed" << s.seed << "=\"" << s.reason << '"';
        man << '\n';
    }
    if (!man) throw std::runtime_error("failed writing " + csv_path + ".manifest");
}

ExperimentReport parse_report_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open " + csv_path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "estimator,param,value,seed,estimate,ground_truth,squared_error,"
                "mse,squared_bias,variance")
        throw std::runtime_error(csv_path + ": unexpected results CSV header");

    ExperimentReport report;
    auto find_cell = [&](const std::string& est, double value) -> CellResult& {
        for (auto& c : report.cells)
            if (c.estimator == est && c.value == value) return c;
        CellResult c;
        c.estimator = est;
        c.value = value;
        report.cells.push_back(std::move(c));
        return report.cells.back();
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        f.resize(10);
        report.param = f[1];
        const double value = std::strtod(f[2].c_str(), nullptr);
        CellResult& cell = find_cell(f[0], value);
        const long long seed = std::strtoll(f[3].c_str(), nullptr, 10);
        if (seed >= 0) {
            SeedOutcome o;
            o.seed = static_cast<int>(seed);
            o.ok = true;
            o.estimate = std::strtod(f[4].c_str(), nullptr);
            o.ground_truth = std::strtod(f[5].c_str(), nullptr);
            cell.per_seed.push_back(std::move(o));
        } else {
            cell.ground_truth = std::strtod(f[5].c_str(), nullptr);
            cell.mse = std::strtod(f[7].c_str(), nullptr);
            cell.squared_bias = std::strtod(f[8].c_str(), nullptr);
            cell.variance = std::strtod(f[9].c_str(), nullptr);
        }
    }
    return report;
}

std::vector<BootstrapCdfRow> bootstrap_cdf(const LoggedDataset& on_policy_data,
                                           const SampledData& logging_data,
                                           const std::vector<std::string>& roster, long long n,
                                           int T, std::uint64_t seed,
                                           const SyntheticEnvironment* env,
                                           const SweepSpec& spec) {
    if (on_policy_data.records.empty() || logging_data.data.records.empty())
        throw std::invalid_argument("bootstrap: both datasets must be nonempty");
    if (n < 1 || T < 1) throw std::invalid_argument("bootstrap: n and T must be >= 1");
    for (const auto& name : roster)
        if (!known_estimator(name))
            throw std::invalid_argument("bootstrap: unknown estimator '" + name + "'");

    std::vector<double> on_rewards;
    on_rewards.reserve(on_policy_data.records.size());
    for (const auto& rec : on_policy_data.records) on_rewards.push_back(rec.reward);
    const double v_on = stable_mean(on_rewards);

    // IPS is always evaluated: it is the denominator of the relative error.
    std::vector<std::string> eval_roster = roster;
    if (std::find(eval_roster.begin(), eval_roster.end(), "ips") == eval_roster.end())
        eval_roster.push_back("ips");
    const std::size_t ips_idx =
        std::find(eval_roster.begin(), eval_roster.end(), "ips") - eval_roster.begin();

    std::vector<BootstrapCdfRow> rows(roster.size());
    for (std::size_t i = 0; i < roster.size(); ++i) rows[i].estimator = roster[i];

    const std::size_t pool = logging_data.data.records.size();
    for (int t = 0; t < T; ++t) {
        auto rng = make_rng(seed, Stream::Bootstrap, {static_cast<std::uint64_t>(t)});
        std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
        SampledData resample;
        resample.data.embedding_cardinalities = logging_data.data.embedding_cardinalities;
        resample.data.num_actions = logging_data.data.num_actions;
        resample.data.withheld_dims = logging_data.data.withheld_dims;
        for (long long j = 0; j < n; ++j) {
            const std::size_t idx = pick(rng);
            resample.data.records.push_back(logging_data.data.records[idx]);
            resample.target.push_back(logging_data.target[idx]);
            resample.logging.push_back(logging_data.logging[idx]);
        }
        const RosterEvaluation eval = evaluate_roster(
            resample, eval_roster, env, spec,
            derive_seed(seed, {static_cast<std::uint64_t>(Stream::Bootstrap),
                               static_cast<std::uint64_t>(t)}));
        const SeedOutcome& ips_out = eval.outcomes[ips_idx];
        const double denom = (v_on - ips_out.estimate) * (v_on - ips_out.estimate);
        if (!ips_out.ok || denom == 0.0) {
            for (auto& row : rows) ++row.excluded;
            continue;
        }
        for (std::size_t i = 0; i < roster.size(); ++i) {
            const SeedOutcome& o = eval.outcomes[i];
            if (!o.ok) {
                ++rows[i].excluded;
                continue;
            }
            rows[i].rel_se.push_back((v_on - o.estimate) * (v_on - o.estimate) / denom);
        }
    }
    for (auto& row : rows) std::sort(row.rel_se.begin(), row.rel_se.end());
    return rows;
}

void emit_bootstrap_cdf(const std::vector<BootstrapCdfRow>& rows, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
    out << "estimator,rel_se,cdf\n";
    for (const auto& row : rows) {
        const double T = static_cast<double>(row.rel_se.size());
        for (std::size_t i = 0; i < row.rel_se.size(); ++i)
            out << row.estimator << ',' << format_double(row.rel_se[i]) << ','
                << format_double(static_cast<double>(i + 1) / T) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + csv_path);
}

} // namespace ope
