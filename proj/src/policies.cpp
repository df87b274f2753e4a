#include "ope/policies.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ope {

Distribution softmax_policy(std::span<const double> scores, double beta) {
    if (scores.empty()) throw std::invalid_argument("softmax_policy: empty scores");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("softmax_policy: non-finite score");
    if (!std::isfinite(beta)) throw std::invalid_argument("softmax_policy: non-finite beta");

    double mx = -std::numeric_limits<double>::infinity();
    for (double s : scores) mx = std::max(mx, beta * s);
    std::vector<double> w(scores.size());
    for (std::size_t a = 0; a < scores.size(); ++a) w[a] = std::exp(beta * scores[a] - mx);
    return Distribution::normalized(std::move(w));
}

Distribution epsilon_greedy_policy(std::span<const double> q_values, double epsilon) {
    if (q_values.empty()) throw std::invalid_argument("epsilon_greedy_policy: empty q_values");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw std::out_of_range("epsilon_greedy_policy: epsilon must lie in [0,1]");
    for (double q : q_values)
        if (!std::isfinite(q)) throw std::invalid_argument("epsilon_greedy_policy: non-finite q value");

    std::size_t best = 0;
    for (std::size_t a = 1; a < q_values.size(); ++a)
        if (q_values[a] > q_values[best]) best = a;
    std::vector<double> p(q_values.size(), epsilon / static_cast<double>(q_values.size()));
    p[best] += 1.0 - epsilon;
    return Distribution::normalized(std::move(p));
}

double vanilla_weight(const Distribution& target, const Distribution& logging, int action) {
    const auto a = static_cast<std::size_t>(action);
    if (a >= target.size() || target.size() != logging.size())
        throw std::invalid_argument("vanilla_weight: action out of range");
    if (logging[a] <= 0.0)
        throw std::domain_error("vanilla_weight: action " + std::to_string(action) +
                                " has zero logging propensity");
    return target[a] / logging[a];
}

double marginal_weight_true(const Distribution& target, const Distribution& logging,
                            std::span<const Distribution> embed_model, int embedding) {
    if (embed_model.size() != target.size() || target.size() != logging.size())
        throw std::invalid_argument("marginal_weight_true: inconsistent sizes");
    const auto e = static_cast<std::size_t>(embedding);
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < embed_model.size(); ++a) {
        if (e >= embed_model[a].size())
            throw std::invalid_argument("marginal_weight_true: embedding out of range");
        num += target[a] * embed_model[a][e];
        den += logging[a] * embed_model[a][e];
    }
    if (den <= 0.0)
        throw std::domain_error("marginal_weight_true: embedding " + std::to_string(embedding) +
                                " has zero logging marginal (deficient embedding support)");
    return num / den;
}

} // namespace ope
