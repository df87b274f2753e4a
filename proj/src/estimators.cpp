#include "ope/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ope {

double stable_mean(std::span<const double> terms) {
    if (terms.empty()) throw std::invalid_argument("stable_mean: empty terms");
    std::vector<double> sorted(terms.begin(), terms.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0, comp = 0.0;
    for (double t : sorted) {
        const double y = t - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum / static_cast<double>(sorted.size());
}

namespace {

EstimateRecord from_terms(std::string name, std::vector<double> terms) {
    EstimateRecord rec;
    rec.name = std::move(name);
    rec.estimate = stable_mean(terms);
    rec.per_sample_terms = std::move(terms);
    return rec;
}

void check_target(const LoggedDataset& data, std::span<const Distribution> target) {
    if (target.size() != data.size())
        throw std::invalid_argument("estimator: target distributions do not match dataset");
}

double vanilla_w(const LoggedDataset& data, std::span<const Distribution> target, std::size_t i) {
    const auto& r = data.records[i];
    return target[i][r.action] / r.logging_propensity;
}

double dm_term(const LoggedDataset& data, std::span<const Distribution> target,
               const RewardModel& model, std::size_t i) {
    const Eigen::VectorXd q = model.q_xa_all(data, i);
    double v = 0.0;
    for (int a = 0; a < data.num_actions; ++a) v += target[i][a] * q[a];
    return v;
}

} // namespace

EstimateRecord ips(const LoggedDataset& data, std::span<const Distribution> target) {
    check_target(data, target);
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        terms[i] = vanilla_w(data, target, i) * data.records[i].reward;
    return from_terms("ips", std::move(terms));
}

EstimateRecord dm(const LoggedDataset& data, std::span<const Distribution> target,
                  const RewardModel& model) {
    check_target(data, target);
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) terms[i] = dm_term(data, target, model, i);
    return from_terms("dm", std::move(terms));
}

EstimateRecord dr(const LoggedDataset& data, std::span<const Distribution> target,
                  const RewardModel& model) {
    check_target(data, target);
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.records[i];
        terms[i] = dm_term(data, target, model, i) +
                   vanilla_w(data, target, i) * (r.reward - model.q_xa(data, i, r.action));
    }
    return from_terms("dr", std::move(terms));
}

EstimateRecord shrunk_dr(const LoggedDataset& data, std::span<const Distribution> target,
                         const RewardModel& model, ShrinkKind kind, double lam) {
    check_target(data, target);
    if (!(lam >= 0.0)) throw std::out_of_range("shrunk_dr: lambda must be >= 0");
    if (kind == ShrinkKind::Lambda && lam > 1.0)
        throw std::out_of_range("shrunk_dr: DR-lambda requires lambda in [0,1]");
    std::string name;
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.records[i];
        const double w = vanilla_w(data, target, i);
        double ws = 0.0;
        switch (kind) {
            case ShrinkKind::Switch:
                ws = (w <= lam) ? w : 0.0;
                name = "switch-dr";
                break;
            case ShrinkKind::OptimisticShrinkage:
                if (lam == 0.0)
                    ws = 0.0;
                else
                    ws = std::isinf(lam) ? w : lam * w / (w * w + lam);
                name = "dros";
                break;
            case ShrinkKind::Lambda:
                ws = w / (1.0 - lam + lam * w);
                name = "dr-lambda";
                break;
        }
        terms[i] = dm_term(data, target, model, i) + ws * (r.reward - model.q_xa(data, i, r.action));
    }
    return from_terms(std::move(name), std::move(terms));
}

EstimateRecord mips(const LoggedDataset& data, std::span<const double> weights) {
    if (weights.size() != data.size())
        throw std::invalid_argument("mips: weights length does not match dataset");
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(weights[i]) || weights[i] < 0.0)
            throw std::invalid_argument("mips: weights must be finite and non-negative");
        terms[i] = weights[i] * data.records[i].reward;
    }
    return from_terms("mips", std::move(terms));
}

} // namespace ope
