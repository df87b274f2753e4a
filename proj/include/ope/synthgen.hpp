#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ope/distribution.hpp"
#include "ope/logged_data.hpp"
#include "ope/rng.hpp"

namespace ope {

struct SyntheticConfig {
    int num_actions = 100;
    int context_dim = 10;
    int embed_dims = 3;
    int embed_cardinality = 10; // per dimension; 2 for the selection experiment
    double beta = -1.0;         // logging softmax inverse temperature
    double epsilon = 0.05;      // target policy noise
    double reward_noise = 2.5;  // sigma
    int num_deficient_actions = 0;
    std::vector<int> withheld_dims{};
    std::uint64_t seed = 0;

    void validate() const;
};

// Frozen random parameters defining p(e|a), q(x,e) and the policies.
struct SyntheticEnvironment {
    SyntheticConfig config;

    std::vector<double> alpha;           // [A][d_e][card] embedding logits
    std::vector<Distribution> embed_dists; // [A*d_e], per-dimension categorical
    Eigen::MatrixXd M;                   // d_x x d_x
    Eigen::VectorXd theta_x, theta_e;    // d_x
    std::vector<double> eta;             // d_e, on the simplex
    std::vector<Eigen::VectorXd> latent; // [d_e*card] unobserved x_{e_k}
    std::vector<int> deficient_set;      // sorted action ids with zero logging probability
    std::vector<char> is_deficient;      // size A

    // Precomputed for fast q(x,a)/q(x,e):
    Eigen::MatrixXd latent_proj;  // (d_e*card) x d_x, row = (M x_{k,v})^T
    Eigen::VectorXd latent_bias;  // theta_e . x_{k,v}
    Eigen::MatrixXd action_embed_weights; // A x (d_e*card), eta_k * p(e_k=v|a)

    int num_actions() const { return config.num_actions; }
    int slot(int k, int v) const { return k * config.embed_cardinality + v; }
};

SyntheticEnvironment build_environment(const SyntheticConfig& config);

// Per-dimension distributions p(e_k | a), k = 0..d_e-1.
std::vector<Distribution> embed_distribution(const SyntheticEnvironment& env, int action);

// q(x,e) = sum_k eta_k (x'M x_{e_k} + theta_x'x + theta_e'x_{e_k}).
double q_xe(const SyntheticEnvironment& env, const Eigen::VectorXd& context,
            const std::vector<int>& embedding);

// q(x,a) = E_{p(e|a)}[q(x,e)], exact via per-dimension marginalization.
double q_xa(const SyntheticEnvironment& env, const Eigen::VectorXd& context, int action);

// q(x,a) for every action at once.
Eigen::VectorXd q_xa_all(const SyntheticEnvironment& env, const Eigen::VectorXd& context);

// q(x,a) for a batch of contexts (rows of X); result is |X| x |A|.
Eigen::MatrixXd q_xa_batch(const SyntheticEnvironment& env, const Eigen::MatrixXd& contexts);

Distribution logging_policy(const SyntheticEnvironment& env, const Eigen::VectorXd& context);
Distribution target_policy(const SyntheticEnvironment& env, const Eigen::VectorXd& context);

// Same policies built from a precomputed q(x,.) row.
Distribution logging_policy_from_q(const SyntheticEnvironment& env, const Eigen::VectorXd& q_row);
Distribution target_policy_from_q(const SyntheticEnvironment& env, const Eigen::VectorXd& q_row);

struct SampledData {
    LoggedDataset data;
    // Full per-record policy distributions (known exactly in the synthetic setting).
    std::vector<Distribution> logging;
    std::vector<Distribution> target;
};

SampledData sample_logged_data_full(const SyntheticEnvironment& env, long long n,
                                    std::uint64_t data_seed);
LoggedDataset sample_logged_data(const SyntheticEnvironment& env, long long n);

// Monte-Carlo V(pi) over m fresh contexts, on a dedicated seed stream.
// Deterministic regardless of thread count; `parallel=false` is the serial
// reference path used for testing and benchmarking.
double ground_truth_value(const SyntheticEnvironment& env, long long m = 1'000'000,
                          bool parallel = true);
double ground_truth_value_with_seed(const SyntheticEnvironment& env, long long m,
                                    std::uint64_t gt_seed, bool parallel);
// Standard error of the ground-truth Monte-Carlo estimate.
struct GroundTruth { double value; double standard_error; };
GroundTruth ground_truth_with_se(const SyntheticEnvironment& env, long long m,
                                 std::uint64_t gt_seed, bool parallel);

// True marginal importance weights w(x_i, e_i) over the observed embedding
// dimensions, one per record. Throws on zero logging marginal.
std::vector<double> true_marginal_weights(const SyntheticEnvironment& env,
                                          const LoggedDataset& data,
                                          std::span<const Distribution> target,
                                          std::span<const Distribution> logging);

} // namespace ope
