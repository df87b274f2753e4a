#pragma once
#include <span>
#include <string>
#include <vector>

#include "ope/estimators.hpp"
#include "ope/models.hpp"
#include "ope/synthgen.hpp"

namespace ope {

// Student-t confidence half-width of the sample mean at level 1-delta.
double cnf(std::span<const double> per_sample_terms, double delta);

struct CandidateEstimate {
    std::string label;
    double estimate = 0.0;
    double cnf = 0.0;
    std::vector<double> per_sample_terms;
};

// Selection rule: largest index m with |V_m - V_j| <= CNF(m) + (sqrt(6)-1) CNF(j)
// for every j < m. Candidates are expected in non-increasing cnf order; a
// violating order is repaired internally and the returned index refers to the
// caller's ordering.
std::size_t slope_select(std::span<const CandidateEstimate> candidates);

struct DimSelectionResult {
    std::vector<int> dims;
    EstimateRecord record;
    std::vector<CandidateEstimate> candidates;
};

// Greedy embedding-dimension selection for MIPS with estimated weights.
// Nested candidate subsets are formed by adding dims in the order of their
// single-dim cnf (exhaustive over all subsets when `exhaustive`). When
// `subset_sizes` is given, only nested subsets of those sizes are evaluated.
DimSelectionResult select_embedding_dims(const LoggedDataset& data,
                                         std::span<const Distribution> target,
                                         std::span<const Distribution> logging, double delta,
                                         const PosteriorHyper& posterior_hyper,
                                         bool exhaustive = false,
                                         const std::vector<int>* subset_sizes = nullptr);

struct LambdaSelectionResult {
    double lambda = 0.0;
    EstimateRecord record;
    std::vector<CandidateEstimate> candidates;
};

LambdaSelectionResult tune_lambda(const LoggedDataset& data, std::span<const Distribution> target,
                                  const RewardModel& model, ShrinkKind kind,
                                  std::span<const double> grid, double delta);

// Default tuning grid per shrinkage family (weight quantiles for switch,
// log grid for optimistic shrinkage, linear grid for DR-lambda).
std::vector<double> default_lambda_grid(const LoggedDataset& data,
                                        std::span<const Distribution> target, ShrinkKind kind);

} // namespace ope
