#pragma once
#include <random>
#include <span>
#include <vector>

namespace ope {

// A probability distribution over a finite index set.
// Entries are non-negative and sum to one within 1e-9.
class Distribution {
  public:
    Distribution() = default;

    // Validates the given probability vector as-is.
    static Distribution validated(std::vector<double> probs);

    // Builds a distribution from non-negative weights, renormalizing.
    // Weights below 1e-300 are clamped to zero before renormalization.
    static Distribution normalized(std::vector<double> weights);

    double operator[](std::size_t i) const { return probs_[i]; }
    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }

    // Inverse-CDF categorical draw.
    int sample(std::mt19937_64& rng) const;

  private:
    explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {}
    std::vector<double> probs_;
};

} // namespace ope
