#include "ope/models.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ope/rng.hpp"

namespace ope {

namespace {

int feature_width(int context_dim, const std::vector<int>& cards) {
    int w = context_dim + 1;
    for (int c : cards) w += c;
    return w;
}

Eigen::VectorXd build_features(const Eigen::VectorXd& x, const std::vector<int>& embedding,
                               const std::vector<int>& dims, const std::vector<int>& cards,
                               int width) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(width);
    f.head(x.size()) = x;
    int off = static_cast<int>(x.size());
    for (std::size_t j = 0; j < dims.size(); ++j) {
        f[off + embedding[dims[j]]] = 1.0;
        off += cards[j];
    }
    f[width - 1] = 1.0;
    return f;
}

Eigen::MatrixXd feature_matrix(const LoggedDataset& data, const std::vector<int>& dims,
                               const std::vector<int>& cards) {
    const int width = feature_width(data.context_dim(), cards);
    Eigen::MatrixXd X(data.size(), width);
    for (std::size_t i = 0; i < data.size(); ++i)
        X.row(i) = build_features(data.records[i].context, data.records[i].embedding, dims, cards,
                                  width)
                       .transpose();
    return X;
}

// Row-wise softmax of X*W^T.
Eigen::MatrixXd class_probs(const Eigen::MatrixXd& X, const Eigen::MatrixXd& W) {
    Eigen::MatrixXd Z = X * W.transpose();
    Eigen::VectorXd mx = Z.rowwise().maxCoeff();
    Z.colwise() -= mx;
    Z = Z.array().exp();
    Eigen::VectorXd sums = Z.rowwise().sum();
    Z.array().colwise() /= sums.array();
    return Z;
}

void check_dims_observed(const LoggedDataset& data, const std::vector<int>& dims) {
    if (dims.empty()) throw std::invalid_argument("embedding dim subset must be nonempty");
    const auto obs = data.observed_dims();
    for (int d : dims)
        if (std::find(obs.begin(), obs.end(), d) == obs.end())
            throw std::invalid_argument("dim " + std::to_string(d) + " is not observed");
}

} // namespace

double multinomial_loss(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                        const Eigen::MatrixXd& W, double l2) {
    const auto n = static_cast<double>(X.rows());
    Eigen::MatrixXd P = class_probs(X, W);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        loss -= std::log(std::max(P(i, labels[i]), 1e-300));
    loss /= n;
    // bias column carries no penalty
    loss += 0.5 * l2 * (W.squaredNorm() - W.col(W.cols() - 1).squaredNorm());
    return loss;
}

Eigen::MatrixXd multinomial_grad(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                 const Eigen::MatrixXd& W, double l2) {
    const auto n = static_cast<double>(X.rows());
    Eigen::MatrixXd P = class_probs(X, W);
    for (Eigen::Index i = 0; i < X.rows(); ++i) P(i, labels[i]) -= 1.0;
    Eigen::MatrixXd G = (P.transpose() * X) / n;
    G.leftCols(W.cols() - 1) += l2 * W.leftCols(W.cols() - 1);
    return G;
}

Eigen::VectorXd ActionPosteriorModel::features(const Eigen::VectorXd& x,
                                               const std::vector<int>& embedding) const {
    return build_features(x, embedding, dims, cardinalities,
                          feature_width(context_dim, cardinalities));
}

Distribution ActionPosteriorModel::predict(const Eigen::VectorXd& x,
                                           const std::vector<int>& embedding) const {
    if (degenerate) return Distribution::validated(marginal);
    Eigen::VectorXd z = weights * features(x, embedding);
    std::vector<double> scores(z.data(), z.data() + z.size());
    double mx = *std::max_element(scores.begin(), scores.end());
    for (double& s : scores) s = std::exp(s - mx);
    return Distribution::normalized(std::move(scores));
}

ActionPosteriorModel fit_action_posterior(const LoggedDataset& data, std::vector<int> dims,
                                          const PosteriorHyper& hyper) {
    check_dims_observed(data, dims);
    ActionPosteriorModel model;
    model.dims = dims;
    for (int d : dims) model.cardinalities.push_back(data.embedding_cardinalities[d]);
    model.context_dim = data.context_dim();
    model.num_actions = data.num_actions;
    if (static_cast<int>(data.size()) < data.num_actions)
        std::cerr << "fit_action_posterior: n < |A|, posterior may be poorly determined\n";

    std::vector<int> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data.records[i].action;
    std::set<int> distinct(labels.begin(), labels.end());

    model.marginal.assign(data.num_actions, 0.0);
    for (int y : labels) model.marginal[y] += 1.0 / static_cast<double>(data.size());

    const int width = feature_width(model.context_dim, model.cardinalities);
    model.weights = Eigen::MatrixXd::Zero(data.num_actions, width);
    if (distinct.size() < 2) {
        std::cerr << "fit_action_posterior: degenerate single-class data\n";
        model.degenerate = true;
        return model;
    }

    Eigen::MatrixXd X = feature_matrix(data, model.dims, model.cardinalities);
    Eigen::MatrixXd W = model.weights;
    double loss = multinomial_loss(X, labels, W, hyper.l2);
    double step = 1.0;
    int iter = 0;
    for (; iter < hyper.max_iters; ++iter) {
        Eigen::MatrixXd G = multinomial_grad(X, labels, W, hyper.l2);
        const double gnorm2 = G.squaredNorm();
        if (std::sqrt(gnorm2) <= hyper.tol) break;
        bool accepted = false;
        while (step > 1e-14) {
            Eigen::MatrixXd Wn = W - step * G;
            const double ln = multinomial_loss(X, labels, Wn, hyper.l2);
            if (ln <= loss - 1e-4 * step * gnorm2) {
                W = std::move(Wn);
                loss = ln;
                model.loss_trace.push_back(loss);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        step = std::min(step * 1.3, 1e3);
    }
    model.weights = std::move(W);
    model.iterations = iter;
    model.final_loss = loss;
    return model;
}

MarginalWeightEstimate estimate_marginal_weights(const LoggedDataset& data,
                                                 std::span<const Distribution> target,
                                                 std::span<const Distribution> logging,
                                                 const ActionPosteriorModel& posterior) {
    if (target.size() != data.size() || logging.size() != data.size())
        throw std::invalid_argument("estimate_marginal_weights: size mismatch");
    MarginalWeightEstimate out;
    out.weights.resize(data.size());

    // Batched posterior evaluation
    Eigen::MatrixXd P;
    if (!posterior.degenerate) {
        Eigen::MatrixXd X = feature_matrix(data, posterior.dims, posterior.cardinalities);
        P = class_probs(X, posterior.weights);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        double w = 0.0;
        for (int a = 0; a < data.num_actions; ++a) {
            const double post = posterior.degenerate ? posterior.marginal[a] : P(i, a);
            if (post == 0.0) continue;
            if (logging[i][a] > 0.0)
                w += post * target[i][a] / logging[i][a];
            else
                out.skipped_mass += post;
        }
        out.weights[i] = w;
    }
    return out;
}

CrossFitPlan CrossFitPlan::make(std::size_t n, int folds, std::uint64_t seed) {
    if (folds < 1 || n < static_cast<std::size_t>(folds))
        throw std::invalid_argument("CrossFitPlan: need n >= folds >= 1");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(seed, Stream::Folds);
    std::shuffle(idx.begin(), idx.end(), rng);
    CrossFitPlan plan;
    plan.folds = folds;
    plan.fold_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.fold_of[idx[i]] = static_cast<int>(i % folds);
    return plan;
}

namespace {

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& omega, double l2) {
    const double lam = std::max(l2, 1e-6);
    const Eigen::Index D = X.cols();
    Eigen::MatrixXd A = X.transpose() * omega.asDiagonal() * X;
    for (Eigen::Index j = 0; j + 1 < D; ++j) A(j, j) += lam; // bias unpenalized
    A(D - 1, D - 1) += 1e-12;
    Eigen::VectorXd b = X.transpose() * (omega.asDiagonal() * y);
    return A.ldlt().solve(b);
}

RewardModel fit_reward_common(const LoggedDataset& data, const CrossFitPlan& plan,
                              const RidgeHyper& hyper, const std::vector<Distribution>* embed_model,
                              const Eigen::VectorXd& omega, RewardModel::Provenance prov) {
    if (plan.fold_of.size() != data.size())
        throw std::invalid_argument("fit_reward_model: plan does not match dataset");
    if (data.size() < static_cast<std::size_t>(2 * plan.folds))
        throw std::invalid_argument("fit_reward_model: need n >= 2*folds");

    RewardModel model;
    model.provenance = prov;
    model.plan = plan;
    model.dims = data.observed_dims();
    for (int d : model.dims) model.cardinalities.push_back(data.embedding_cardinalities[d]);
    model.context_dim = data.context_dim();
    model.num_actions = data.num_actions;

    const int width = feature_width(model.context_dim, model.cardinalities);
    Eigen::MatrixXd X = feature_matrix(data, model.dims, model.cardinalities);
    Eigen::VectorXd y(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) y[i] = data.records[i].reward;

    int emb_width = 0;
    for (int c : model.cardinalities) emb_width += c;
    const int de = data.embed_dims();

    for (int f = 0; f < plan.folds; ++f) {
        std::vector<Eigen::Index> train;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (plan.fold_of[i] != f) train.push_back(static_cast<Eigen::Index>(i));
        if (train.empty()) throw std::invalid_argument("fit_reward_model: empty training fold");
        Eigen::MatrixXd Xf(train.size(), width);
        Eigen::VectorXd yf(train.size()), of(train.size());
        for (std::size_t t = 0; t < train.size(); ++t) {
            Xf.row(t) = X.row(train[t]);
            yf[t] = y[train[t]];
            of[t] = omega[train[t]];
        }
        model.fold_theta.push_back(ridge_solve(Xf, yf, of, hyper.l2));

        // Per-action expected one-hot features for q_hat(x,a).
        Eigen::MatrixXd Phi(data.num_actions, emb_width);
        if (embed_model) {
            for (int a = 0; a < data.num_actions; ++a) {
                int off = 0;
                for (std::size_t j = 0; j < model.dims.size(); ++j) {
                    const auto& d = (*embed_model)[static_cast<std::size_t>(a) * de + model.dims[j]];
                    for (int v = 0; v < model.cardinalities[j]; ++v) Phi(a, off + v) = d[v];
                    off += model.cardinalities[j];
                }
            }
        } else {
            // Empirical category frequencies from the training fold; actions
            // unseen there fall back to the fold's overall frequencies.
            Phi.setZero();
            Eigen::VectorXd counts = Eigen::VectorXd::Zero(data.num_actions);
            Eigen::VectorXd global = Eigen::VectorXd::Zero(emb_width);
            for (Eigen::Index t : train) {
                const auto& r = data.records[t];
                counts[r.action] += 1.0;
                int off = 0;
                for (std::size_t j = 0; j < model.dims.size(); ++j) {
                    Phi(r.action, off + r.embedding[model.dims[j]]) += 1.0;
                    global[off + r.embedding[model.dims[j]]] += 1.0;
                    off += model.cardinalities[j];
                }
            }
            global /= static_cast<double>(train.size());
            for (int a = 0; a < data.num_actions; ++a) {
                if (counts[a] > 0.0)
                    Phi.row(a) /= counts[a];
                else
                    Phi.row(a) = global.transpose();
            }
        }
        model.fold_action_features.push_back(std::move(Phi));
    }
    return model;
}

} // namespace

RewardModel fit_reward_model(const LoggedDataset& data, const CrossFitPlan& plan,
                             const RidgeHyper& hyper, const std::vector<Distribution>* embed_model) {
    return fit_reward_common(data, plan, hyper, embed_model,
                             Eigen::VectorXd::Ones(data.size()), RewardModel::Provenance::Plain);
}

RewardModel fit_mrdr_reward_model(const LoggedDataset& data, std::span<const Distribution> target,
                                  const CrossFitPlan& plan, const RidgeHyper& hyper,
                                  const std::vector<Distribution>* embed_model) {
    if (target.size() != data.size())
        throw std::invalid_argument("fit_mrdr_reward_model: size mismatch");
    Eigen::VectorXd omega(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.records[i];
        const double w = target[i][r.action] / r.logging_propensity;
        omega[i] = w * w;
    }
    return fit_reward_common(data, plan, hyper, embed_model, omega, RewardModel::Provenance::Mrdr);
}

double RewardModel::q_xe_at(const Eigen::VectorXd& x, const std::vector<int>& embedding,
                            int fold) const {
    const int width = feature_width(context_dim, cardinalities);
    return fold_theta[fold].dot(build_features(x, embedding, dims, cardinalities, width));
}

double RewardModel::q_xe(const LoggedDataset& data, std::size_t i) const {
    return q_xe_at(data.records[i].context, data.records[i].embedding, plan.fold_of[i]);
}

double RewardModel::q_xa(const LoggedDataset& data, std::size_t i, int action) const {
    const int f = plan.fold_of[i];
    const auto& th = fold_theta[f];
    const auto& x = data.records[i].context;
    const int emb_width = static_cast<int>(th.size()) - context_dim - 1;
    return th.head(context_dim).dot(x) +
           th.segment(context_dim, emb_width).dot(fold_action_features[f].row(action)) +
           th[th.size() - 1];
}

Eigen::VectorXd RewardModel::q_xa_all(const LoggedDataset& data, std::size_t i) const {
    const int f = plan.fold_of[i];
    const auto& th = fold_theta[f];
    const auto& x = data.records[i].context;
    const int emb_width = static_cast<int>(th.size()) - context_dim - 1;
    Eigen::VectorXd q = fold_action_features[f] * th.segment(context_dim, emb_width);
    q.array() += th.head(context_dim).dot(x) + th[th.size() - 1];
    return q;
}

} // namespace ope
