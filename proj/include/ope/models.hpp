#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ope/distribution.hpp"
#include "ope/logged_data.hpp"

namespace ope {

struct PosteriorHyper {
    double l2 = 1e-2;
    int max_iters = 500;
    double tol = 1e-6; // gradient norm
    std::uint64_t seed = 0;
};

// Multinomial logistic regression of a on (x, one-hot e, 1), restricted to a
// subset of observed embedding dimensions. Bias column is unregularized.
struct ActionPosteriorModel {
    Eigen::MatrixXd weights; // |A| x D, D = d_x + sum_k card_k + 1
    std::vector<int> dims;   // embedding dims used, in feature order
    std::vector<int> cardinalities; // aligned with dims
    int context_dim = 0;
    int num_actions = 0;
    int iterations = 0;
    double final_loss = 0.0;
    std::vector<double> loss_trace; // loss after each accepted step
    bool degenerate = false;        // single-class training data
    std::vector<double> marginal;   // empirical action marginal (degenerate fallback)

    Eigen::VectorXd features(const Eigen::VectorXd& x, const std::vector<int>& embedding) const;
    Distribution predict(const Eigen::VectorXd& x, const std::vector<int>& embedding) const;
};

ActionPosteriorModel fit_action_posterior(const LoggedDataset& data, std::vector<int> dims,
                                          const PosteriorHyper& hyper);

// Loss and gradient of the L2-regularized multinomial cross-entropy,
// exposed for finite-difference verification.
double multinomial_loss(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                        const Eigen::MatrixXd& W, double l2);
Eigen::MatrixXd multinomial_grad(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                 const Eigen::MatrixXd& W, double l2);

struct MarginalWeightEstimate {
    std::vector<double> weights;
    double skipped_mass = 0.0; // posterior mass on unsupported actions, summed over records
};

// w_hat(x_i,e_i) = sum_a pi0_hat(a|x_i,e_i) pi(a|x_i)/pi0(a|x_i), skipping
// actions with zero logging probability.
MarginalWeightEstimate estimate_marginal_weights(const LoggedDataset& data,
                                                 std::span<const Distribution> target,
                                                 std::span<const Distribution> logging,
                                                 const ActionPosteriorModel& posterior);

struct CrossFitPlan {
    int folds = 2;
    std::vector<int> fold_of;
    static CrossFitPlan make(std::size_t n, int folds, std::uint64_t seed);
};

struct RidgeHyper {
    double l2 = 1e-3;
    std::uint64_t seed = 0;
};

// Cross-fitted ridge regression of reward on (x, one-hot observed e, 1).
// q_hat(x,a) replaces each one-hot block with p(e_k|a): the environment's
// exact embedding distribution when provided, otherwise empirical per-action
// frequencies from the training fold.
struct RewardModel {
    enum class Provenance { Plain, Mrdr };
    Provenance provenance = Provenance::Plain;
    CrossFitPlan plan;
    std::vector<Eigen::VectorXd> fold_theta;           // per fold
    std::vector<Eigen::MatrixXd> fold_action_features; // per fold, A x (sum card)
    std::vector<int> dims;
    std::vector<int> cardinalities;
    int context_dim = 0;
    int num_actions = 0;

    double q_xe(const LoggedDataset& data, std::size_t i) const;
    double q_xa(const LoggedDataset& data, std::size_t i, int action) const;
    Eigen::VectorXd q_xa_all(const LoggedDataset& data, std::size_t i) const;
    // Prediction at an arbitrary point using a given fold's model.
    double q_xe_at(const Eigen::VectorXd& x, const std::vector<int>& embedding, int fold) const;
};

// embed_model, when given, holds the true per-(action,dim) distributions
// laid out as [a * d_e + k] over the full embedding dims of `data`.
RewardModel fit_reward_model(const LoggedDataset& data, const CrossFitPlan& plan,
                             const RidgeHyper& hyper,
                             const std::vector<Distribution>* embed_model = nullptr);

// Same features and folds, ridge weighted by w(x_i,a_i)^2.
RewardModel fit_mrdr_reward_model(const LoggedDataset& data, std::span<const Distribution> target,
                                  const CrossFitPlan& plan, const RidgeHyper& hyper,
                                  const std::vector<Distribution>* embed_model = nullptr);

} // namespace ope
