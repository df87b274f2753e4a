#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ope/synthgen.hpp"

using namespace ope;

namespace {

SyntheticConfig small_config(std::uint64_t seed = 5) {
    SyntheticConfig cfg;
    cfg.num_actions = 8;
    cfg.context_dim = 4;
    cfg.embed_dims = 2;
    cfg.embed_cardinality = 3;
    cfg.seed = seed;
    return cfg;
}

// Reference evaluation of q(x,e) straight from the raw environment fields.
double q_xe_reference(const SyntheticEnvironment& env, const Eigen::VectorXd& x,
                      const std::vector<int>& e) {
    double q = 0.0;
    for (int k = 0; k < env.config.embed_dims; ++k) {
        const Eigen::VectorXd& xe = env.latent[env.slot(k, e[k])];
        q += env.eta[k] * (x.dot(env.M * xe) + env.theta_x.dot(x) + env.theta_e.dot(xe));
    }
    return q;
}

void zero_reward_surface(SyntheticEnvironment& env) {
    env.M.setZero();
    env.theta_x.setZero();
    env.theta_e.setZero();
    env.latent_proj.setZero();
    env.latent_bias.setZero();
}

} // namespace

TEST_CASE("config validation") {
    SyntheticConfig cfg = small_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.num_actions = 1;
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.num_deficient_actions = 8;
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.withheld_dims = {2};
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.epsilon = 1.5;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("environment build is deterministic") {
    const auto a = build_environment(small_config());
    const auto b = build_environment(small_config());
    CHECK(a.alpha == b.alpha);
    CHECK(a.M == b.M);
    CHECK(a.eta == b.eta);
    CHECK(a.deficient_set == b.deficient_set);
    const auto c = build_environment(small_config(6));
    CHECK(a.alpha != c.alpha);
}

TEST_CASE("eta lies on the simplex and deficient set has the right size") {
    auto cfg = small_config();
    cfg.embed_dims = 3;
    const auto env = build_environment(cfg);
    double sum = 0.0;
    for (double v : env.eta) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(env.deficient_set.empty());

    cfg.num_deficient_actions = 3;
    const auto def = build_environment(cfg);
    CHECK(def.deficient_set.size() == 3);
    for (int a : def.deficient_set) CHECK((a >= 0 && a < cfg.num_actions));
}

TEST_CASE("embedding distributions match the softmax of the logits") {
    const auto env = build_environment(small_config());
    const int card = env.config.embed_cardinality;
    for (int a = 0; a < env.num_actions(); ++a) {
        const auto dists = embed_distribution(env, a);
        for (int k = 0; k < env.config.embed_dims; ++k) {
            double sum = 0.0, denom = 0.0;
            for (int v = 0; v < card; ++v)
                denom += std::exp(env.alpha[(static_cast<std::size_t>(a) * env.config.embed_dims + k) * card + v]);
            for (int v = 0; v < card; ++v) {
                const double expect =
                    std::exp(env.alpha[(static_cast<std::size_t>(a) * env.config.embed_dims + k) * card + v]) / denom;
                CHECK(dists[k][v] == doctest::Approx(expect).epsilon(1e-9));
                sum += dists[k][v];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK_THROWS(embed_distribution(env, env.num_actions()));
}

TEST_CASE("embedding product space sums to one") {
    const auto env = build_environment(small_config());
    const int card = env.config.embed_cardinality;
    for (int a = 0; a < env.num_actions(); ++a) {
        const auto dists = embed_distribution(env, a);
        double total = 0.0;
        for (int v0 = 0; v0 < card; ++v0)
            for (int v1 = 0; v1 < card; ++v1) total += dists[0][v0] * dists[1][v1];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("q_xe matches the term-by-term reference") {
    const auto env = build_environment(small_config());
    auto rng = make_rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        Eigen::VectorXd x(env.config.context_dim);
        for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
        std::vector<int> e{trial % 3, (trial / 3) % 3};
        CHECK(q_xe(env, x, e) == doctest::Approx(q_xe_reference(env, x, e)).epsilon(1e-12));
    }
}

TEST_CASE("q is zero when all reward parameters vanish") {
    auto env = build_environment(small_config());
    zero_reward_surface(env);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(env.config.context_dim);
    CHECK(q_xe(env, x, {1, 2}) == 0.0);
    CHECK(q_xa(env, x, 3) == 0.0);
}

TEST_CASE("q_xa marginalizes q_xe exactly") {
    const auto env = build_environment(small_config());
    auto rng = make_rng(12);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x(env.config.context_dim);
    for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);

    // Exact enumeration over the (small) product space.
    for (int a = 0; a < env.num_actions(); ++a) {
        const auto dists = embed_distribution(env, a);
        double expect = 0.0;
        for (int v0 = 0; v0 < 3; ++v0)
            for (int v1 = 0; v1 < 3; ++v1)
                expect += dists[0][v0] * dists[1][v1] * q_xe(env, x, {v0, v1});
        CHECK(q_xa(env, x, a) == doctest::Approx(expect).epsilon(1e-10));
    }

    // Monte-Carlo cross-check on one action.
    const auto dists = embed_distribution(env, 0);
    const long long draws = 100000;
    std::vector<double> samples(draws);
    for (long long i = 0; i < draws; ++i)
        samples[i] = q_xe(env, x, {dists[0].sample(rng), dists[1].sample(rng)});
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(draws);
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double se = std::sqrt(var / draws / draws);
    CHECK(std::abs(q_xa(env, x, 0) - mean) <= 3.0 * se + 1e-12);

    // Batched evaluation agrees with the per-action path.
    Eigen::MatrixXd X(2, env.config.context_dim);
    X.row(0) = x.transpose();
    X.row(1) = -x.transpose();
    const Eigen::MatrixXd Q = q_xa_batch(env, X);
    const Eigen::VectorXd q0 = q_xa_all(env, x);
    for (int a = 0; a < env.num_actions(); ++a) {
        CHECK(Q(0, a) == doctest::Approx(q0[a]).epsilon(1e-12));
        CHECK(Q(0, a) == doctest::Approx(q_xa(env, x, a)).epsilon(1e-12));
    }
}

TEST_CASE("policies: uniform endpoints and deficiency handling") {
    auto cfg = small_config();
    cfg.beta = 0.0;
    cfg.epsilon = 1.0;
    const auto env = build_environment(cfg);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(cfg.context_dim);
    const auto pi0 = logging_policy(env, x);
    const auto pi = target_policy(env, x);
    for (int a = 0; a < cfg.num_actions; ++a) {
        CHECK(pi0[a] == doctest::Approx(1.0 / cfg.num_actions).epsilon(1e-9));
        CHECK(pi[a] == doctest::Approx(1.0 / cfg.num_actions).epsilon(1e-9));
    }

    cfg.beta = 3.0;
    cfg.epsilon = 0.05;
    cfg.num_deficient_actions = 2;
    const auto denv = build_environment(cfg);
    const auto dpi0 = logging_policy(denv, x);
    const auto dpi = target_policy(denv, x);
    double mass = 0.0;
    for (int a = 0; a < cfg.num_actions; ++a) mass += dpi0[a];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    for (int a : denv.deficient_set) {
        CHECK(dpi0[a] == 0.0);
        CHECK(dpi[a] > 0.0); // target may still choose unsupported actions
    }

    // beta > 0 favors the argmax of q.
    const auto q = q_xa_all(denv, x);
    int best = 0;
    for (int a = 1; a < cfg.num_actions; ++a)
        if (q[a] > q[best]) best = a;
    if (!denv.is_deficient[best]) {
        const auto greedy_pi0 = logging_policy(denv, x);
        for (int a = 0; a < cfg.num_actions; ++a) CHECK(greedy_pi0[best] >= greedy_pi0[a]);
    }
}

TEST_CASE("sampled data respects the generative process") {
    auto cfg = small_config();
    cfg.reward_noise = 0.0;
    cfg.num_deficient_actions = 2;
    const auto env = build_environment(cfg);
    const auto sampled = sample_logged_data_full(env, 400, 77);
    const auto again = sample_logged_data_full(env, 400, 77);
    REQUIRE(sampled.data.size() == 400);
    for (std::size_t i = 0; i < sampled.data.size(); ++i) {
        const auto& rec = sampled.data.records[i];
        CHECK(!env.is_deficient[rec.action]);
        CHECK(rec.reward == q_xe(env, rec.context, rec.embedding)); // sigma = 0
        CHECK(rec.logging_propensity == sampled.logging[i][rec.action]);
        CHECK(rec.logging_propensity > 0.0);
        const auto pi0 = logging_policy(env, rec.context);
        CHECK(sampled.logging[i][rec.action] == doctest::Approx(pi0[rec.action]).epsilon(1e-12));
        CHECK(again.data.records[i].reward == rec.reward);
        CHECK(again.data.records[i].action == rec.action);
    }
    sampled.data.validate();
}

TEST_CASE("withheld dimensions stay in the record but leave the observed view") {
    auto cfg = small_config();
    cfg.withheld_dims = {0};
    const auto env = build_environment(cfg);
    const auto data = sample_logged_data(env, 50);
    CHECK(data.records[0].embedding.size() == 2);
    CHECK(data.observed_dims() == std::vector<int>{1});
}

TEST_CASE("ground truth constant-reward and determinism") {
    auto env = build_environment(small_config());
    zero_reward_surface(env);
    env.latent_bias.setConstant(2.5); // q(x,a) = sum_k eta_k * 2.5 = 2.5
    CHECK(ground_truth_value_with_seed(env, 5000, 3, false) ==
          doctest::Approx(2.5).epsilon(1e-9));

    const auto real_env = build_environment(small_config());
    const double serial = ground_truth_value_with_seed(real_env, 100000, 9, false);
    const double parallel = ground_truth_value_with_seed(real_env, 100000, 9, true);
    CHECK(serial == parallel); // bitwise: per-block seed derivation
}

TEST_CASE("ground truth agrees with an on-policy rollout") {
    auto cfg = small_config();
    cfg.beta = 0.0;   // uniform logging
    cfg.epsilon = 1.0; // uniform target: logging data is on-policy
    const auto env = build_environment(cfg);
    const auto gt = ground_truth_with_se(env, 400000, 21, true);
    const auto sampled = sample_logged_data_full(env, 200000, 22);
    double mean = 0.0;
    for (const auto& rec : sampled.data.records) mean += rec.reward;
    mean /= static_cast<double>(sampled.data.size());
    double var = 0.0;
    for (const auto& rec : sampled.data.records) var += (rec.reward - mean) * (rec.reward - mean);
    const double se = std::sqrt(var / sampled.data.size() / sampled.data.size());
    CHECK(std::abs(gt.value - mean) <= 3.0 * std::sqrt(se * se + gt.standard_error * gt.standard_error));
}

TEST_CASE("true marginal weights follow the factorized model") {
    const auto env = build_environment(small_config());
    const auto sampled = sample_logged_data_full(env, 200, 31);
    const auto w = true_marginal_weights(env, sampled.data, sampled.target, sampled.logging);
    REQUIRE(w.size() == 200);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i] >= 0.0);
        // Reference: enumerate the product space for this record's embedding.
        const auto& e = sampled.data.records[i].embedding;
        double num = 0.0, den = 0.0;
        for (int a = 0; a < env.num_actions(); ++a) {
            const auto dists = embed_distribution(env, a);
            const double pe = dists[0][e[0]] * dists[1][e[1]];
            num += sampled.target[i][a] * pe;
            den += sampled.logging[i][a] * pe;
        }
        CHECK(w[i] == doctest::Approx(num / den).epsilon(1e-9));
    }
}

TEST_CASE("dataset CSV round trip") {
    auto cfg = small_config();
    cfg.withheld_dims = {1};
    const auto env = build_environment(cfg);
    const auto data = sample_logged_data(env, 60);
    const std::string path = "test_dataset_roundtrip.csv";
    save_dataset(data, path);
    const auto loaded = load_dataset(path);
    REQUIRE(loaded.size() == data.size());
    CHECK(loaded.num_actions == data.num_actions);
    CHECK(loaded.embedding_cardinalities == data.embedding_cardinalities);
    CHECK(loaded.withheld_dims == data.withheld_dims);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(loaded.records[i].context == data.records[i].context);
        CHECK(loaded.records[i].action == data.records[i].action);
        CHECK(loaded.records[i].embedding == data.records[i].embedding);
        CHECK(loaded.records[i].reward == data.records[i].reward);
        CHECK(loaded.records[i].logging_propensity == data.records[i].logging_propensity);
    }
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta");
}
