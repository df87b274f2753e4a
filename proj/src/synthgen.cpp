#include "ope/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ope/policies.hpp"

namespace ope {

void SyntheticConfig::validate() const {
    if (num_actions < 2) throw std::invalid_argument("SyntheticConfig: num_actions >= 2 required");
    if (context_dim < 1) throw std::invalid_argument("SyntheticConfig: context_dim >= 1 required");
    if (embed_dims < 1) throw std::invalid_argument("SyntheticConfig: embed_dims >= 1 required");
    if (embed_cardinality < 1) throw std::invalid_argument("SyntheticConfig: embed_cardinality >= 1 required");
    if (!(reward_noise >= 0.0)) throw std::invalid_argument("SyntheticConfig: reward_noise >= 0 required");
    if (num_deficient_actions < 0 || num_deficient_actions >= num_actions)
        throw std::invalid_argument("SyntheticConfig: need 0 <= num_deficient < num_actions");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::invalid_argument("SyntheticConfig: epsilon in [0,1] required");
    for (int d : withheld_dims)
        if (d < 0 || d >= embed_dims)
            throw std::invalid_argument("SyntheticConfig: withheld dim out of range");
}

SyntheticEnvironment build_environment(const SyntheticConfig& config) {
    config.validate();
    SyntheticEnvironment env;
    env.config = config;
    const int A = config.num_actions, de = config.embed_dims, card = config.embed_cardinality,
              dx = config.context_dim;

    auto rng = make_rng(config.seed, Stream::Environment);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    env.alpha.resize(static_cast<std::size_t>(A) * de * card);
    for (auto& v : env.alpha) v = gauss(rng);

    env.M.resize(dx, dx);
    for (int i = 0; i < dx; ++i)
        for (int j = 0; j < dx; ++j) env.M(i, j) = unif(rng);
    env.theta_x.resize(dx);
    for (int i = 0; i < dx; ++i) env.theta_x[i] = unif(rng);
    env.theta_e.resize(dx);
    for (int i = 0; i < dx; ++i) env.theta_e[i] = unif(rng);

    // eta ~ Dirichlet(1,...,1) via normalized standard exponentials
    env.eta.resize(de);
    std::exponential_distribution<double> expo(1.0);
    double esum = 0.0;
    for (auto& v : env.eta) { v = expo(rng); esum += v; }
    for (auto& v : env.eta) v /= esum;

    env.latent.resize(static_cast<std::size_t>(de) * card);
    for (auto& x : env.latent) {
        x.resize(dx);
        for (int i = 0; i < dx; ++i) x[i] = gauss(rng);
    }

    // Uniform random subset of actions, context-independent.
    std::vector<int> ids(A);
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < config.num_deficient_actions; ++i) {
        std::uniform_int_distribution<int> pick(i, A - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    env.deficient_set.assign(ids.begin(), ids.begin() + config.num_deficient_actions);
    std::sort(env.deficient_set.begin(), env.deficient_set.end());
    env.is_deficient.assign(A, 0);
    for (int a : env.deficient_set) env.is_deficient[a] = 1;

    // Per-dimension categorical distributions from the logits.
    env.embed_dists.reserve(static_cast<std::size_t>(A) * de);
    for (int a = 0; a < A; ++a)
        for (int k = 0; k < de; ++k) {
            std::vector<double> logits(card);
            for (int v = 0; v < card; ++v)
                logits[v] = env.alpha[(static_cast<std::size_t>(a) * de + k) * card + v];
            env.embed_dists.push_back(softmax_policy(logits, 1.0));
        }

    env.latent_proj.resize(de * card, dx);
    env.latent_bias.resize(de * card);
    for (int k = 0; k < de; ++k)
        for (int v = 0; v < card; ++v) {
            const int s = env.slot(k, v);
            env.latent_proj.row(s) = (env.M * env.latent[s]).transpose();
            env.latent_bias[s] = env.theta_e.dot(env.latent[s]);
        }
    env.action_embed_weights.resize(A, de * card);
    for (int a = 0; a < A; ++a)
        for (int k = 0; k < de; ++k)
            for (int v = 0; v < card; ++v)
                env.action_embed_weights(a, env.slot(k, v)) =
                    env.eta[k] * env.embed_dists[static_cast<std::size_t>(a) * de + k][v];
    return env;
}

std::vector<Distribution> embed_distribution(const SyntheticEnvironment& env, int action) {
    if (action < 0 || action >= env.num_actions())
        throw std::out_of_range("embed_distribution: action out of range");
    std::vector<Distribution> out;
    out.reserve(env.config.embed_dims);
    for (int k = 0; k < env.config.embed_dims; ++k)
        out.push_back(env.embed_dists[static_cast<std::size_t>(action) * env.config.embed_dims + k]);
    return out;
}

double q_xe(const SyntheticEnvironment& env, const Eigen::VectorXd& context,
            const std::vector<int>& embedding) {
    const int de = env.config.embed_dims;
    if (static_cast<int>(embedding.size()) != de)
        throw std::invalid_argument("q_xe: embedding length mismatch");
    const double base = env.theta_x.dot(context);
    double q = 0.0;
    for (int k = 0; k < de; ++k) {
        const int s = env.slot(k, embedding[k]);
        q += env.eta[k] * (env.latent_proj.row(s).dot(context) + base + env.latent_bias[s]);
    }
    return q;
}

Eigen::VectorXd q_xa_all(const SyntheticEnvironment& env, const Eigen::VectorXd& context) {
    Eigen::VectorXd t = env.latent_proj * context + env.latent_bias;
    Eigen::VectorXd q = env.action_embed_weights * t;
    q.array() += env.theta_x.dot(context);
    return q;
}

double q_xa(const SyntheticEnvironment& env, const Eigen::VectorXd& context, int action) {
    if (action < 0 || action >= env.num_actions()) throw std::out_of_range("q_xa: action out of range");
    Eigen::VectorXd t = env.latent_proj * context + env.latent_bias;
    return env.action_embed_weights.row(action).dot(t) + env.theta_x.dot(context);
}

Eigen::MatrixXd q_xa_batch(const SyntheticEnvironment& env, const Eigen::MatrixXd& contexts) {
    Eigen::MatrixXd T = contexts * env.latent_proj.transpose();
    T.rowwise() += env.latent_bias.transpose();
    Eigen::MatrixXd Q = T * env.action_embed_weights.transpose();
    Q.colwise() += (contexts * env.theta_x).eval();
    return Q;
}

Distribution logging_policy_from_q(const SyntheticEnvironment& env, const Eigen::VectorXd& q_row) {
    std::vector<double> scores(q_row.data(), q_row.data() + q_row.size());
    Distribution sm = softmax_policy(scores, env.config.beta);
    if (env.deficient_set.empty()) return sm;
    std::vector<double> w(sm.probs());
    for (int a : env.deficient_set) w[a] = 0.0;
    return Distribution::normalized(std::move(w));
}

Distribution target_policy_from_q(const SyntheticEnvironment& env, const Eigen::VectorXd& q_row) {
    std::span<const double> q(q_row.data(), static_cast<std::size_t>(q_row.size()));
    return epsilon_greedy_policy(q, env.config.epsilon);
}

Distribution logging_policy(const SyntheticEnvironment& env, const Eigen::VectorXd& context) {
    return logging_policy_from_q(env, q_xa_all(env, context));
}

Distribution target_policy(const SyntheticEnvironment& env, const Eigen::VectorXd& context) {
    return target_policy_from_q(env, q_xa_all(env, context));
}

SampledData sample_logged_data_full(const SyntheticEnvironment& env, long long n,
                                    std::uint64_t data_seed) {
    if (n < 1) throw std::invalid_argument("sample_logged_data: n >= 1 required");
    const auto& cfg = env.config;
    auto rng = std::mt19937_64(data_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SampledData out;
    out.data.num_actions = cfg.num_actions;
    out.data.embedding_cardinalities.assign(cfg.embed_dims, cfg.embed_cardinality);
    out.data.withheld_dims = cfg.withheld_dims;
    out.data.records.resize(n);
    out.logging.reserve(n);
    out.target.reserve(n);

    // Contexts first, then the bandit feedback; Q in blocks via GEMM.
    Eigen::MatrixXd X(n, cfg.context_dim);
    for (long long i = 0; i < n; ++i)
        for (int j = 0; j < cfg.context_dim; ++j) X(i, j) = gauss(rng);

    const long long block = 4096;
    for (long long start = 0; start < n; start += block) {
        const long long b = std::min(block, n - start);
        Eigen::MatrixXd Q = q_xa_batch(env, X.middleRows(start, b));
        for (long long i = 0; i < b; ++i) {
            LoggedRecord& r = out.data.records[start + i];
            r.context = X.row(start + i).transpose();
            Distribution pi0 = logging_policy_from_q(env, Q.row(i).transpose());
            Distribution pi = target_policy_from_q(env, Q.row(i).transpose());
            r.action = pi0.sample(rng);
            r.logging_propensity = pi0[r.action];
            r.embedding.resize(cfg.embed_dims);
            for (int k = 0; k < cfg.embed_dims; ++k)
                r.embedding[k] =
                    env.embed_dists[static_cast<std::size_t>(r.action) * cfg.embed_dims + k].sample(rng);
            const double mean = q_xe(env, r.context, r.embedding);
            r.reward = cfg.reward_noise > 0.0 ? mean + cfg.reward_noise * gauss(rng) : mean;
            out.logging.push_back(std::move(pi0));
            out.target.push_back(std::move(pi));
        }
    }
    return out;
}

LoggedDataset sample_logged_data(const SyntheticEnvironment& env, long long n) {
    return sample_logged_data_full(env, n, derive_seed(env.config.seed, {static_cast<std::uint64_t>(Stream::Data)}))
        .data;
}

GroundTruth ground_truth_with_se(const SyntheticEnvironment& env, long long m,
                                 std::uint64_t gt_seed, bool parallel) {
    if (m < 1) throw std::invalid_argument("ground_truth_value: m >= 1 required");
    const auto& cfg = env.config;
    const long long block = 4096;
    const long long nblocks = (m + block - 1) / block;
    std::vector<double> block_sum(nblocks, 0.0), block_sq(nblocks, 0.0);

#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long bi = 0; bi < nblocks; ++bi) {
        const long long start = bi * block;
        const long long b = std::min(block, m - start);
        auto rng = std::mt19937_64(derive_seed(gt_seed, {static_cast<std::uint64_t>(bi)}));
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::MatrixXd X(b, cfg.context_dim);
        for (long long i = 0; i < b; ++i)
            for (int j = 0; j < cfg.context_dim; ++j) X(i, j) = gauss(rng);
        Eigen::MatrixXd Q = q_xa_batch(env, X);
        double s = 0.0, s2 = 0.0;
        for (long long i = 0; i < b; ++i) {
            Distribution pi = target_policy_from_q(env, Q.row(i).transpose());
            double v = 0.0;
            for (int a = 0; a < cfg.num_actions; ++a) v += pi[a] * Q(i, a);
            s += v;
            s2 += v * v;
        }
        block_sum[bi] = s;
        block_sq[bi] = s2;
    }
    double total = 0.0, total_sq = 0.0;
    for (long long bi = 0; bi < nblocks; ++bi) { total += block_sum[bi]; total_sq += block_sq[bi]; }
    const double mean = total / static_cast<double>(m);
    const double var = std::max(0.0, total_sq / static_cast<double>(m) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(m))};
}

double ground_truth_value_with_seed(const SyntheticEnvironment& env, long long m,
                                    std::uint64_t gt_seed, bool parallel) {
    return ground_truth_with_se(env, m, gt_seed, parallel).value;
}

double ground_truth_value(const SyntheticEnvironment& env, long long m, bool parallel) {
    return ground_truth_value_with_seed(
        env, m, derive_seed(env.config.seed, {static_cast<std::uint64_t>(Stream::GroundTruth)}), parallel);
}

std::vector<double> true_marginal_weights(const SyntheticEnvironment& env,
                                          const LoggedDataset& data,
                                          std::span<const Distribution> target,
                                          std::span<const Distribution> logging) {
    if (target.size() != data.size() || logging.size() != data.size())
        throw std::invalid_argument("true_marginal_weights: size mismatch");
    const auto dims = data.observed_dims();
    const int A = data.num_actions, de = env.config.embed_dims;
    std::vector<double> weights(data.size());
    std::vector<double> prod(A);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& e = data.records[i].embedding;
        std::fill(prod.begin(), prod.end(), 1.0);
        for (int k : dims) {
            for (int a = 0; a < A; ++a)
                prod[a] *= env.embed_dists[static_cast<std::size_t>(a) * de + k][e[k]];
        }
        double num = 0.0, den = 0.0;
        for (int a = 0; a < A; ++a) {
            num += target[i][a] * prod[a];
            den += logging[i][a] * prod[a];
        }
        if (den <= 0.0)
            throw std::domain_error("true_marginal_weights: deficient embedding support at record " +
                                    std::to_string(i));
        weights[i] = num / den;
    }
    return weights;
}

} // namespace ope
