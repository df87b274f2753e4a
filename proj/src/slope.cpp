#include "ope/slope.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ope {

double cnf(std::span<const double> terms, double delta) {
    if (terms.size() < 2) throw std::invalid_argument("cnf: need at least two terms");
    if (!(delta > 0.0 && delta < 1.0)) throw std::out_of_range("cnf: delta must lie in (0,1)");
    const auto n = static_cast<double>(terms.size());
    const double mean = stable_mean(terms);
    double ss = 0.0;
    for (double t : terms) ss += (t - mean) * (t - mean);
    if (ss == 0.0) return 0.0;
    const double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t dist(n - 1.0);
    const double tq = boost::math::quantile(dist, 1.0 - delta / 2.0);
    return tq * sd / std::sqrt(n);
}

std::size_t slope_select(std::span<const CandidateEstimate> candidates) {
    if (candidates.empty()) throw std::invalid_argument("slope_select: empty candidate list");
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].cnf > candidates[b].cnf;
    });
    constexpr double kSqrt6Minus1 = 1.4494897427831781;
    std::size_t best = 0;
    for (std::size_t m = 0; m < order.size(); ++m) {
        bool ok = true;
        for (std::size_t j = 0; j < m && ok; ++j) {
            const auto& cm = candidates[order[m]];
            const auto& cj = candidates[order[j]];
            if (std::abs(cm.estimate - cj.estimate) > cm.cnf + kSqrt6Minus1 * cj.cnf) ok = false;
        }
        if (ok) best = m;
    }
    return order[best];
}

namespace {

CandidateEstimate mips_candidate(const LoggedDataset& data, std::span<const Distribution> target,
                                 std::span<const Distribution> logging,
                                 const std::vector<int>& dims, double delta,
                                 const PosteriorHyper& hyper, std::string label) {
    auto posterior = fit_action_posterior(data, dims, hyper);
    auto est = estimate_marginal_weights(data, target, logging, posterior);
    EstimateRecord rec = mips(data, est.weights);
    CandidateEstimate cand;
    cand.label = std::move(label);
    cand.estimate = rec.estimate;
    cand.cnf = cnf(rec.per_sample_terms, delta);
    cand.per_sample_terms = std::move(rec.per_sample_terms);
    return cand;
}

std::string dims_label(const std::vector<int>& dims) {
    std::string s = "dims:";
    for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "," : "") + std::to_string(dims[i]);
    return s;
}

} // namespace

DimSelectionResult select_embedding_dims(const LoggedDataset& data,
                                         std::span<const Distribution> target,
                                         std::span<const Distribution> logging, double delta,
                                         const PosteriorHyper& hyper, bool exhaustive,
                                         const std::vector<int>* subset_sizes) {
    const auto observed = data.observed_dims();
    if (observed.empty())
        throw std::invalid_argument("select_embedding_dims: no observed embedding dimensions");

    std::vector<std::vector<int>> subsets;
    if (exhaustive) {
        if (observed.size() > 10)
            throw std::invalid_argument("select_embedding_dims: exhaustive mode needs <= 10 dims");
        for (std::size_t mask = 1; mask < (std::size_t{1} << observed.size()); ++mask) {
            std::vector<int> s;
            for (std::size_t k = 0; k < observed.size(); ++k)
                if (mask & (std::size_t{1} << k)) s.push_back(observed[k]);
            subsets.push_back(std::move(s));
        }
    } else {
        // Rank single dims by the cnf of their MIPS terms, widest first: a dim
        // whose marginal weights spread the most is the one the policies
        // disagree on, so small subsets keep the policy-relevant signal and
        // larger ones only add variance.
        std::vector<std::pair<double, int>> ranked;
        for (int d : observed) {
            auto c = mips_candidate(data, target, logging, {d}, delta, hyper, dims_label({d}));
            ranked.emplace_back(c.cnf, d);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        std::vector<int> sizes;
        if (subset_sizes) {
            sizes = *subset_sizes;
        } else {
            sizes.resize(observed.size());
            std::iota(sizes.begin(), sizes.end(), 1);
        }
        for (int sz : sizes) {
            if (sz < 1 || sz > static_cast<int>(observed.size())) continue;
            std::vector<int> s;
            for (int j = 0; j < sz; ++j) s.push_back(ranked[j].second);
            std::sort(s.begin(), s.end());
            subsets.push_back(std::move(s));
        }
    }

    std::vector<CandidateEstimate> candidates;
    candidates.reserve(subsets.size());
    std::vector<std::vector<int>> cand_dims;
    for (auto& s : subsets) {
        candidates.push_back(mips_candidate(data, target, logging, s, delta, hyper, dims_label(s)));
        cand_dims.push_back(std::move(s));
    }
    const std::size_t chosen = slope_select(candidates);

    DimSelectionResult result;
    result.dims = cand_dims[chosen];
    result.record.name = "mips-slope";
    result.record.estimate = candidates[chosen].estimate;
    result.record.per_sample_terms = candidates[chosen].per_sample_terms;
    result.candidates = std::move(candidates);
    return result;
}

LambdaSelectionResult tune_lambda(const LoggedDataset& data, std::span<const Distribution> target,
                                  const RewardModel& model, ShrinkKind kind,
                                  std::span<const double> grid, double delta) {
    if (grid.empty()) throw std::invalid_argument("tune_lambda: empty grid");
    std::vector<CandidateEstimate> candidates;
    std::vector<EstimateRecord> records;
    for (double lam : grid) {
        EstimateRecord rec = shrunk_dr(data, target, model, kind, lam);
        CandidateEstimate cand;
        cand.label = "lambda:" + format_double(lam);
        cand.estimate = rec.estimate;
        cand.cnf = cnf(rec.per_sample_terms, delta);
        cand.per_sample_terms = rec.per_sample_terms;
        candidates.push_back(std::move(cand));
        records.push_back(std::move(rec));
    }
    const std::size_t chosen = slope_select(candidates);
    LambdaSelectionResult result;
    result.lambda = grid[chosen];
    result.record = std::move(records[chosen]);
    result.candidates = std::move(candidates);
    return result;
}

std::vector<double> default_lambda_grid(const LoggedDataset& data,
                                        std::span<const Distribution> target, ShrinkKind kind) {
    switch (kind) {
        case ShrinkKind::Switch: {
            std::vector<double> w(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                w[i] = target[i][data.records[i].action] / data.records[i].logging_propensity;
            std::sort(w.begin(), w.end());
            std::vector<double> grid;
            for (int q = 1; q <= 10; ++q) {
                const auto idx = static_cast<std::size_t>(
                    std::min<double>(static_cast<double>(w.size()) * q / 10.0,
                                     static_cast<double>(w.size()) - 1));
                grid.push_back(w[idx]);
            }
            grid.push_back(std::numeric_limits<double>::infinity());
            return grid;
        }
        case ShrinkKind::OptimisticShrinkage: {
            std::vector<double> grid;
            for (double l = 1e-2; l <= 1e4 * (1 + 1e-12); l *= 10.0) grid.push_back(l);
            return grid;
        }
        case ShrinkKind::Lambda: {
            std::vector<double> grid;
            for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
            return grid;
        }
    }
    return {};
}

} // namespace ope
