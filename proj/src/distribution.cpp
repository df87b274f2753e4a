#include "ope/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace ope {

Distribution Distribution::validated(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("Distribution: empty probability vector");
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("Distribution: entries must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("Distribution: probabilities do not sum to 1");
    return Distribution(std::move(probs));
}

Distribution Distribution::normalized(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("Distribution: empty weight vector");
    double sum = 0.0;
    for (double& w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("Distribution: weights must be finite and non-negative");
        if (w < 1e-300) w = 0.0;
        sum += w;
    }
    if (sum <= 0.0) throw std::invalid_argument("Distribution: all weights are zero");
    for (double& w : weights) w /= sum;
    return Distribution(std::move(weights));
}

int Distribution::sample(std::mt19937_64& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        acc += probs_[i];
        if (u < acc) return static_cast<int>(i);
    }
    // u landed in the rounding slack past the last positive entry
    for (std::size_t i = probs_.size(); i-- > 0;)
        if (probs_[i] > 0.0) return static_cast<int>(i);
    return 0;
}

} // namespace ope
