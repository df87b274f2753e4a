#pragma once
#include <span>
#include <string>
#include <vector>

#include "ope/distribution.hpp"
#include "ope/logged_data.hpp"
#include "ope/models.hpp"

namespace ope {

// One estimator's value estimate: a sample mean over per-record terms.
struct EstimateRecord {
    std::string name;
    double estimate = 0.0;
    std::vector<double> per_sample_terms;
    std::string fingerprint;
    std::uint64_t seed = 0;
};

// Permutation-invariant sample mean (sorted compensated summation).
double stable_mean(std::span<const double> terms);

EstimateRecord ips(const LoggedDataset& data, std::span<const Distribution> target);
EstimateRecord dm(const LoggedDataset& data, std::span<const Distribution> target,
                  const RewardModel& model);
EstimateRecord dr(const LoggedDataset& data, std::span<const Distribution> target,
                  const RewardModel& model);

enum class ShrinkKind { Switch, OptimisticShrinkage, Lambda };

EstimateRecord shrunk_dr(const LoggedDataset& data, std::span<const Distribution> target,
                         const RewardModel& model, ShrinkKind kind, double lam);

// MIPS from externally supplied marginal weights (true or estimated).
EstimateRecord mips(const LoggedDataset& data, std::span<const double> weights);

} // namespace ope
