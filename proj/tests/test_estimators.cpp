#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ope/estimators.hpp"
#include "ope/oracle.hpp"
#include "ope/rng.hpp"

using namespace ope;

namespace {

// Two actions, one binary embedding dim with one-hot p(e|a): action a emits
// embedding a deterministically, so q_hat(x,a) = q_hat(x, e=a) exactly.
LoggedDataset two_action_dataset(const std::vector<int>& actions,
                                 const std::vector<double>& rewards,
                                 const std::vector<double>& pscores) {
    LoggedDataset data;
    data.num_actions = 2;
    data.embedding_cardinalities = {2};
    for (std::size_t i = 0; i < actions.size(); ++i) {
        LoggedRecord r;
        r.context = Eigen::VectorXd::Zero(1);
        r.action = actions[i];
        r.embedding = {actions[i]};
        r.reward = rewards[i];
        r.logging_propensity = pscores[i];
        data.records.push_back(std::move(r));
    }
    return data;
}

// Hand-built reward model: q_hat(x, e=v) = values[v], independent of x.
RewardModel handmade_model(const LoggedDataset& data, const std::vector<double>& values) {
    RewardModel model;
    model.plan.folds = 1;
    model.plan.fold_of.assign(data.size(), 0);
    model.dims = data.observed_dims();
    for (int d : model.dims) model.cardinalities.push_back(data.embedding_cardinalities[d]);
    model.context_dim = data.context_dim();
    model.num_actions = data.num_actions;
    int width = model.context_dim + 1;
    for (int c : model.cardinalities) width += c;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(width);
    for (std::size_t v = 0; v < values.size(); ++v)
        theta[model.context_dim + static_cast<int>(v)] = values[v];
    model.fold_theta.push_back(theta);
    Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(data.num_actions, values.size());
    model.fold_action_features.push_back(Phi);
    return model;
}

std::vector<Distribution> repeat_dist(std::size_t n, std::vector<double> probs) {
    return std::vector<Distribution>(n, Distribution::validated(std::move(probs)));
}

// Logged dataset sampled from a tabular instance; context stores the context id.
struct TabularSample {
    LoggedDataset data;
    std::vector<Distribution> target, logging;
    std::vector<double> true_weights;
};

TabularSample sample_tabular(const TabularInstance& inst, int n, std::mt19937_64& rng) {
    TabularSample out;
    out.data.num_actions = inst.num_actions();
    out.data.embedding_cardinalities = {inst.num_embeds()};
    for (int i = 0; i < n; ++i) {
        const auto d = inst.sample(rng);
        LoggedRecord r;
        r.context = Eigen::VectorXd::Constant(1, static_cast<double>(d.x));
        r.action = d.a;
        r.embedding = {d.e};
        r.reward = d.r;
        r.logging_propensity = inst.pi_0[d.x][d.a];
        out.data.records.push_back(std::move(r));
        out.target.push_back(Distribution::validated(inst.pi_t[d.x]));
        out.logging.push_back(Distribution::validated(inst.pi_0[d.x]));
        out.true_weights.push_back(inst.marginal_weight(d.x, d.e));
    }
    return out;
}

} // namespace

TEST_CASE("stable_mean is permutation invariant") {
    auto rng = make_rng(2);
    std::uniform_real_distribution<double> unif(-1e6, 1e6);
    std::vector<double> terms(997);
    for (double& t : terms) t = unif(rng);
    const double m1 = stable_mean(terms);
    std::shuffle(terms.begin(), terms.end(), rng);
    const double m2 = stable_mean(terms);
    CHECK(m1 == m2);
    CHECK_THROWS(stable_mean(std::vector<double>{}));
}

TEST_CASE("ips") {
    // target = logging: weights are 1, estimate is the mean reward.
    auto data = two_action_dataset({0, 1, 0}, {1.0, 2.0, 3.0}, {0.4, 0.6, 0.4});
    std::vector<Distribution> onpolicy;
    for (const auto& r : data.records) {
        std::vector<double> p(2, 0.0);
        p[r.action] = r.logging_propensity;
        p[1 - r.action] = 1.0 - r.logging_propensity;
        onpolicy.push_back(Distribution::validated(p));
    }
    CHECK(ips(data, onpolicy).estimate == doctest::Approx(2.0).epsilon(1e-12));

    // Single record with the toy fixture's a2: pi = 0.8, pi0 = 0.2, r = 1.
    auto one = two_action_dataset({0}, {1.0}, {0.2});
    CHECK(ips(one, repeat_dist(1, {0.8, 0.2})).estimate == doctest::Approx(4.0).epsilon(1e-12));

    // Weights (2, 0) on rewards (1, 5): three actions so the target stays valid.
    LoggedDataset two;
    two.num_actions = 3;
    two.embedding_cardinalities = {3};
    for (int i = 0; i < 2; ++i) {
        LoggedRecord r;
        r.context = Eigen::VectorXd::Zero(1);
        r.action = i;
        r.embedding = {i};
        r.reward = i == 0 ? 1.0 : 5.0;
        r.logging_propensity = i == 0 ? 0.25 : 0.5;
        two.records.push_back(std::move(r));
    }
    CHECK(ips(two, repeat_dist(2, {0.5, 0.0, 0.5})).estimate ==
          doctest::Approx(1.0).epsilon(1e-12));

    // Per-sample terms average to the estimate.
    const auto rec = ips(two, repeat_dist(2, {0.5, 0.0, 0.5}));
    CHECK(rec.per_sample_terms.size() == 2);
    CHECK(stable_mean(rec.per_sample_terms) == doctest::Approx(rec.estimate).epsilon(1e-12));
}

TEST_CASE("dm") {
    auto data = two_action_dataset({0, 1}, {0.0, 0.0}, {0.5, 0.5});
    CHECK(dm(data, repeat_dist(2, {0.3, 0.7}), handmade_model(data, {0.0, 0.0})).estimate == 0.0);
    // q_hat(x, .) = (1, 2), pi = (0.3, 0.7) -> 1.7.
    CHECK(dm(data, repeat_dist(2, {0.3, 0.7}), handmade_model(data, {1.0, 2.0})).estimate ==
          doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("dr") {
    auto data = two_action_dataset({0, 1, 1}, {1.5, -0.5, 2.0}, {0.5, 0.25, 0.8});
    const auto target = repeat_dist(3, {0.5, 0.5});
    // q_hat = 0: control variate vanishes.
    const auto zero = handmade_model(data, {0.0, 0.0});
    CHECK(dr(data, target, zero).estimate ==
          doctest::Approx(ips(data, target).estimate).epsilon(1e-12));
    // Rewards equal to the model's predictions: DR collapses to DM.
    auto exact = two_action_dataset({0, 1}, {1.0, 2.0}, {0.5, 0.5});
    const auto model = handmade_model(exact, {1.0, 2.0});
    CHECK(dr(exact, repeat_dist(2, {0.4, 0.6}), model).estimate ==
          doctest::Approx(dm(exact, repeat_dist(2, {0.4, 0.6}), model).estimate).epsilon(1e-12));
    // Hand sum: weight 4, r = 1, q_hat(x,a) = 0.5, E_pi[q_hat] = 0.6.
    auto one = two_action_dataset({0}, {1.0}, {0.125});
    const auto m = handmade_model(one, {0.5, 0.7});
    CHECK(dr(one, repeat_dist(1, {0.5, 0.5}), m).estimate ==
          doctest::Approx(2.6).epsilon(1e-12));
}

TEST_CASE("shrunk_dr endpoints") {
    auto data = two_action_dataset({0, 1, 0, 1}, {1.0, -2.0, 0.5, 3.0}, {0.3, 0.7, 0.5, 0.25});
    const auto target = repeat_dist(4, {0.6, 0.4});
    const auto model = handmade_model(data, {0.8, -0.3});
    const double inf = std::numeric_limits<double>::infinity();

    const double dm_est = dm(data, target, model).estimate;
    const double dr_est = dr(data, target, model).estimate;

    CHECK(shrunk_dr(data, target, model, ShrinkKind::Switch, 0.0).estimate ==
          doctest::Approx(dm_est).epsilon(1e-12));
    CHECK(shrunk_dr(data, target, model, ShrinkKind::OptimisticShrinkage, 0.0).estimate ==
          doctest::Approx(dm_est).epsilon(1e-12));
    CHECK(shrunk_dr(data, target, model, ShrinkKind::Lambda, 0.0).estimate ==
          doctest::Approx(dr_est).epsilon(1e-12));

    // Switch with lambda above the max weight is exactly DR.
    double wmax = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        wmax = std::max(wmax, target[i][data.records[i].action] /
                                  data.records[i].logging_propensity);
    CHECK(shrunk_dr(data, target, model, ShrinkKind::Switch, wmax).estimate == dr_est);
    CHECK(shrunk_dr(data, target, model, ShrinkKind::OptimisticShrinkage, inf).estimate ==
          dr_est);

    // DR-lambda at 1: every shrunk weight is exactly 1.
    const auto lam1 = shrunk_dr(data, target, model, ShrinkKind::Lambda, 1.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.records[i];
        const double expect = dm(data, target, model).per_sample_terms[i] +
                              1.0 * (r.reward - model.q_xa(data, i, r.action));
        CHECK(lam1.per_sample_terms[i] == doctest::Approx(expect).epsilon(1e-12));
    }

    CHECK_THROWS_AS(static_cast<void>(shrunk_dr(data, target, model, ShrinkKind::Lambda, 1.5)),
                    std::out_of_range);
    CHECK_THROWS_AS(static_cast<void>(shrunk_dr(data, target, model, ShrinkKind::Switch, -1.0)),
                    std::out_of_range);
}

TEST_CASE("mips") {
    auto data = two_action_dataset({0, 1}, {2.0, 0.0}, {0.5, 0.5});
    CHECK(mips(data, std::vector<double>{1.0, 1.0}).estimate ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mips(data, std::vector<double>{1.5, 0.55}).estimate ==
          doctest::Approx(1.5).epsilon(1e-12));
    auto one = two_action_dataset({0}, {1.0}, {0.3});
    CHECK(mips(one, std::vector<double>{1.5}).estimate == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS(static_cast<void>(mips(data, std::vector<double>{-0.1, 1.0})));
    CHECK_THROWS(static_cast<void>(mips(data, std::vector<double>{std::nan(""), 1.0})));
    CHECK_THROWS(static_cast<void>(mips(data, std::vector<double>{1.0})));
}

TEST_CASE("estimators are invariant to record permutation") {
    auto rng = make_rng(8);
    InstanceOptions opts;
    const auto inst = random_instance(opts, rng);
    auto sample = sample_tabular(inst, 300, rng);
    const double ips_before = ips(sample.data, sample.target).estimate;
    const double mips_before = mips(sample.data, sample.true_weights).estimate;

    std::vector<std::size_t> perm(sample.data.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    TabularSample shuffled;
    shuffled.data.num_actions = sample.data.num_actions;
    shuffled.data.embedding_cardinalities = sample.data.embedding_cardinalities;
    for (std::size_t i : perm) {
        shuffled.data.records.push_back(sample.data.records[i]);
        shuffled.target.push_back(sample.target[i]);
        shuffled.true_weights.push_back(sample.true_weights[i]);
    }
    CHECK(ips(shuffled.data, shuffled.target).estimate == ips_before);
    CHECK(mips(shuffled.data, shuffled.true_weights).estimate == mips_before);
}

TEST_CASE("unbiasedness of ips and mips on a tabular instance") {
    auto rng = make_rng(17);
    InstanceOptions opts;
    opts.num_contexts = 3;
    opts.num_actions = 4;
    opts.num_embeds = 3;
    const auto inst = random_instance(opts, rng);
    const double v = exact_value(inst, inst.pi_t);

    const int reps = 2000, n = 500;
    std::vector<double> ips_means(reps), mips_means(reps);
    for (int t = 0; t < reps; ++t) {
        const auto sample = sample_tabular(inst, n, rng);
        ips_means[t] = ips(sample.data, sample.target).estimate;
        mips_means[t] = mips(sample.data, sample.true_weights).estimate;
    }
    auto check_unbiased = [&](const std::vector<double>& means) {
        const double m = stable_mean(means);
        double var = 0.0;
        for (double x : means) var += (x - m) * (x - m);
        var /= static_cast<double>(reps);
        const double se = std::sqrt(var / reps);
        CHECK(std::abs(m - v) <= 3.0 * se);
    };
    check_unbiased(ips_means);
    check_unbiased(mips_means);
}

TEST_CASE("variance ordering of mips vs ips across random instances") {
    auto rng = make_rng(23);
    int ordered = 0;
    const int instances = 20;
    for (int k = 0; k < instances; ++k) {
        InstanceOptions opts;
        opts.num_contexts = 2 + k % 3;
        opts.num_actions = 3 + k % 3;
        opts.num_embeds = 2 + k % 2;
        const auto inst = random_instance(opts, rng);
        const int reps = 400, n = 200;
        std::vector<double> ips_est(reps), mips_est(reps);
        for (int t = 0; t < reps; ++t) {
            const auto sample = sample_tabular(inst, n, rng);
            ips_est[t] = ips(sample.data, sample.target).estimate;
            mips_est[t] = mips(sample.data, sample.true_weights).estimate;
        }
        auto var_of = [&](const std::vector<double>& v) {
            const double m = stable_mean(v);
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return s / static_cast<double>(v.size());
        };
        const double vi = var_of(ips_est), vm = var_of(mips_est);
        // Allow 3 combined SE of slack: SE of a variance est is ~ var*sqrt(2/n).
        const double slack = 3.0 * (vi + vm) * std::sqrt(2.0 / reps);
        if (vm <= vi + slack) ++ordered;
    }
    CHECK(ordered == instances);
}
