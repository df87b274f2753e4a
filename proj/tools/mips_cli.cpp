#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ope/harness.hpp"
#include "ope/oracle.hpp"

namespace {

void add_config_flags(CLI::App* cmd, ope::SweepSpec& spec, int& withheld_count) {
    cmd->add_option("--num-actions", spec.base.num_actions, "Number of actions");
    cmd->add_option("--context-dim", spec.base.context_dim, "Context dimension");
    cmd->add_option("--embed-dims", spec.base.embed_dims, "Embedding dimensions");
    cmd->add_option("--embed-cardinality", spec.base.embed_cardinality,
                    "Categories per embedding dimension");
    cmd->add_option("--beta", spec.base.beta, "Logging softmax inverse temperature");
    cmd->add_option("--epsilon", spec.base.epsilon, "Target policy exploration rate");
    cmd->add_option("--sigma", spec.base.reward_noise, "Reward noise standard deviation");
    cmd->add_option("--num-deficient", spec.base.num_deficient_actions,
                    "Actions with zero logging probability");
    cmd->add_option("--withheld-count", withheld_count,
                    "Leading embedding dimensions hidden from estimators");
    cmd->add_option("--n", spec.n, "Logged dataset size");
    cmd->add_option("--seed", spec.seed, "Master seed");
    cmd->add_option("--gt-m", spec.ground_truth_m, "Ground-truth Monte-Carlo sample size");
    cmd->add_option("--posterior-iters", spec.posterior.max_iters,
                    "Max iterations for the action posterior fit");
    cmd->add_option("--posterior-l2", spec.posterior.l2, "Posterior L2 penalty");
    cmd->add_option("--ridge-l2", spec.ridge.l2, "Reward model L2 penalty");
    cmd->add_flag("--resample-env", spec.resample_env,
                  "Resample environment parameters for every seed");
}

void apply_withheld(ope::SweepSpec& spec, int withheld_count) {
    spec.base.withheld_dims.clear();
    for (int k = 0; k < withheld_count; ++k) spec.base.withheld_dims.push_back(k);
}

int run_oracle_check(std::uint64_t seed) {
    auto rng = ope::make_rng(seed, ope::Stream::Instance);
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
        ope::InstanceOptions opts;
        opts.num_contexts = 2 + static_cast<int>(i % 3);
        opts.num_actions = 3 + static_cast<int>(i % 4);
        opts.num_embeds = 2 + static_cast<int>(i % 3);
        const auto inst = ope::random_instance(opts, rng);
        const auto vr = ope::exact_variance_reduction(inst);
        if (vr.reduction < -1e-12) {
            std::cerr << "oracle-check: negative variance reduction at instance " << i << "\n";
            return 1;
        }
        const double direct = vr.var_ips - vr.var_mips;
        if (std::abs(vr.reduction - direct) > 1e-10) {
            std::cerr << "oracle-check: formula/first-principles mismatch at instance " << i
                      << ": " << vr.reduction << " vs " << direct << "\n";
            return 1;
        }
        const double gain = ope::exact_mse_gain(inst, 10);
        const double bias = ope::exact_mips_bias(inst);
        // n (MSE(ips) - MSE(mips)) = V[ips] - V[mips] - n Bias^2 under Assumption 1.
        const double direct_gain = vr.var_ips - vr.var_mips - 10.0 * bias * bias;
        if (std::abs(gain - direct_gain) > 1e-10) {
            std::cerr << "oracle-check: MSE gain mismatch at instance " << i << "\n";
            return 1;
        }
        ++checked;
    }
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const int m = 1 + static_cast<int>(i % 12);
        std::vector<double> f(m), g(m), h(m);
        double gs = 0.0;
        for (int j = 0; j < m; ++j) {
            f[j] = unif(rng);
            h[j] = unif(rng);
            g[j] = 0.05 + std::abs(unif(rng));
            gs += g[j];
        }
        for (double& v : g) v /= gs;
        const auto sides = ope::lemma_a1_identity(f, g, h);
        if (std::abs(sides.lhs - sides.rhs) > 1e-12) {
            std::cerr << "oracle-check: covariance identity violated at triple " << i << "\n";
            return 1;
        }
    }
    std::cout << "oracle-check: " << checked << " instances and 1000 identity triples OK\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Off-policy evaluation benchmark for marginalized importance sampling"};
    app.require_subcommand(1);

    ope::SweepSpec spec;
    int withheld_count = 0;
    std::string out_path = "results.csv";
    std::vector<std::string> values_raw, estimators;

    auto* sweep = app.add_subcommand("sweep", "Replicated estimator sweep over one parameter");
    sweep->add_option("--param", spec.param,
                      "Swept parameter: num_actions|n|num_deficient|withheld_count|beta|"
                      "epsilon|sigma");
    sweep->add_option("--values", values_raw, "Swept values")->required()->delimiter(',');
    sweep->add_option("--estimators", estimators, "Estimator roster")->required()->delimiter(',');
    sweep->add_option("--reps", spec.reps, "Replications per value");
    sweep->add_option("--out", out_path, "Output CSV path");
    add_config_flags(sweep, spec, withheld_count);

    std::uint64_t oracle_seed = 0;
    auto* oracle = app.add_subcommand("oracle-check", "Exact-oracle property suite");
    oracle->add_option("--seed", oracle_seed, "Master seed");

    auto* demo = app.add_subcommand("slope-demo", "Embedding-dimension selection experiment");
    demo->add_option("--reps", spec.reps, "Replications");
    demo->add_option("--out", out_path, "Output CSV path");
    add_config_flags(demo, spec, withheld_count);

    long long boot_n = 1000;
    int boot_T = 200;
    long long boot_pool = 10000;
    auto* boot = app.add_subcommand("bootstrap-cdf",
                                    "Bootstrap CDF of squared error relative to IPS");
    boot->add_option("--estimators", estimators, "Estimator roster")->required()->delimiter(',');
    boot->add_option("--boot-n", boot_n, "Resample size");
    boot->add_option("--boot-reps", boot_T, "Number of bootstrap resamples");
    boot->add_option("--pool-n", boot_pool, "Logged data pool size");
    boot->add_option("--out", out_path, "Output CSV path");
    add_config_flags(boot, spec, withheld_count);

    CLI11_PARSE(app, argc, argv);

    try {
        apply_withheld(spec, withheld_count);

        if (oracle->parsed()) return run_oracle_check(oracle_seed);

        if (sweep->parsed()) {
            spec.values.clear();
            for (const auto& v : values_raw) spec.values.push_back(std::stod(v));
            spec.roster = estimators;
            spec.validate();
            const auto report = ope::run_replications(spec);
            ope::emit_report(report, spec, out_path);
            std::cout << "wrote " << out_path << " (" << report.total_failures << '/'
                      << report.total_runs << " runs failed)\n";
            return ope::failure_threshold_exceeded(report) ? 2 : 0;
        }

        if (demo->parsed()) {
            spec.param = "withheld_count";
            spec.values = {0.0};
            spec.roster = {"mips", "mips-true", "mips-slope"};
            spec.validate();
            const auto report = ope::run_replications(spec);
            ope::emit_report(report, spec, out_path);
            std::cout << "wrote " << out_path << " (" << report.total_failures << '/'
                      << report.total_runs << " runs failed)\n";
            return ope::failure_threshold_exceeded(report) ? 2 : 0;
        }

        if (boot->parsed()) {
            spec.roster = estimators;
            spec.param = "n";
            spec.values = {static_cast<double>(boot_n)};
            spec.validate();
            ope::SyntheticConfig cfg = spec.base;
            cfg.seed = spec.seed;
            const auto env = ope::build_environment(cfg);
            const auto logging_pool = ope::sample_logged_data_full(
                env, boot_pool,
                ope::derive_seed(spec.seed, {static_cast<std::uint64_t>(ope::Stream::Data)}));

            // On-policy data: act with the target policy and log its rewards.
            ope::SyntheticConfig on_cfg = cfg;
            const auto on_env = ope::build_environment(on_cfg);
            auto on_data = ope::sample_logged_data_full(
                on_env, boot_pool,
                ope::derive_seed(spec.seed, {static_cast<std::uint64_t>(ope::Stream::Data), 1}));
            // Replace logged actions by target-policy draws.
            auto rng = ope::make_rng(spec.seed, ope::Stream::Data, {2});
            for (std::size_t i = 0; i < on_data.data.records.size(); ++i) {
                auto& rec = on_data.data.records[i];
                const int a = on_data.target[i].sample(rng);
                rec.action = a;
                rec.logging_propensity = on_data.target[i][a];
                std::vector<int> emb(on_env.config.embed_dims);
                for (int k = 0; k < on_env.config.embed_dims; ++k)
                    emb[k] = on_env.embed_dists[a * on_env.config.embed_dims + k].sample(rng);
                rec.embedding = emb;
                const double mu = ope::q_xe(on_env, rec.context, emb);
                std::normal_distribution<double> noise(mu, on_env.config.reward_noise);
                rec.reward = noise(rng);
            }
            const auto rows = ope::bootstrap_cdf(on_data.data, logging_pool, spec.roster,
                                                 boot_n, boot_T, spec.seed, &env, spec);
            ope::emit_bootstrap_cdf(rows, out_path);
            std::cout << "wrote " << out_path << '\n';
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
