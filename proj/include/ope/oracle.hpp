#pragma once
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ope/rng.hpp"

namespace ope {

// Fully enumerable finite (X, A, E) problem for exact computations.
// p_e, q and m2 are indexed [x][a][e]; m2(x,a,e) = E[r^2 | x,a,e].
struct TabularInstance {
    enum class RewardFamily { TwoPoint, Gaussian };

    std::vector<double> px;
    std::vector<std::vector<double>> pi_t, pi_0;           // [x][a]
    std::vector<std::vector<std::vector<double>>> p_e;     // [x][a][e]
    std::vector<std::vector<std::vector<double>>> q, m2;   // [x][a][e]
    RewardFamily family = RewardFamily::TwoPoint;

    int num_contexts() const { return static_cast<int>(px.size()); }
    int num_actions() const { return static_cast<int>(pi_0.empty() ? 0 : pi_0[0].size()); }
    int num_embeds() const {
        return static_cast<int>(p_e.empty() || p_e[0].empty() ? 0 : p_e[0][0].size());
    }
    void validate() const;

    // Marginal p(e|x,pi) for an arbitrary action distribution row.
    double marginal_e(int x, int e, const std::vector<std::vector<double>>& pi) const;
    // Bayes posterior pi0(a|x,e); zero when p(e|x,pi0) = 0.
    double posterior0(int x, int a, int e) const;
    // w(x,a); throws on deficient action.
    double vanilla_weight(int x, int a) const;
    // w(x,e); throws on deficient embedding.
    double marginal_weight(int x, int e) const;
    // q(x,a) = sum_e p(e|x,a) q(x,a,e).
    double q_xa(int x, int a) const;
    // q(x,e) under no-direct-effect (any supported action's q(x,a,e)).
    double q_xe(int x, int e) const;

    bool common_support() const;        // Assumption 1
    bool common_embed_support() const;  // Assumption 2
    bool no_direct_effect(double tol = 1e-12) const; // Assumption 3

    // One logged draw (x, a, e, r) under the logging policy.
    struct Draw { int x, a, e; double r; };
    Draw sample(std::mt19937_64& rng) const;
};

// V(pi) = sum_x p(x) sum_a pi(a|x) sum_e p(e|x,a) q(x,a,e).
double exact_value(const TabularInstance& inst, const std::vector<std::vector<double>>& pi);

// IPS bias magnitude under deficient actions.
double exact_ips_deficiency_bias(const TabularInstance& inst);

// Bias of MIPS under violated no-direct-effect (pairwise form).
double exact_mips_bias(const TabularInstance& inst);

struct VarianceReduction {
    double reduction = 0.0;     // formula value
    double var_ips = 0.0;       // n * V[ips], single-sample, first principles
    double var_mips = 0.0;      // n * V[mips], single-sample, first principles
};
VarianceReduction exact_variance_reduction(const TabularInstance& inst);

// n * (MSE(ips) - MSE(mips)) via the closed-form gain.
double exact_mse_gain(const TabularInstance& inst, long long n);

struct BiasVariance { double bias = 0.0; double variance = 0.0; };
// Bias and n*variance of MIPS with estimated weights specified via
// delta(x,e) = 1 - w_hat/w, a [x][e] table.
BiasVariance exact_estimated_weight_bias_variance(
    const TabularInstance& inst, const std::vector<std::vector<double>>& delta);

// Bias magnitude of MIPS under deficient embedding support (the estimator
// underestimates; the magnitude of the missing mass is returned).
double exact_bias_deficient_embedding(const TabularInstance& inst);

// Direct single-sample moments for cross-checks.
double single_sample_mean_ips(const TabularInstance& inst);
double single_sample_mean_mips(const TabularInstance& inst);
// MIPS mean with caller-supplied weights w_hat[x][e].
double single_sample_mean_weighted(const TabularInstance& inst,
                                   const std::vector<std::vector<double>>& w_hat);
double single_sample_variance_weighted(const TabularInstance& inst,
                                       const std::vector<std::vector<double>>& w_hat);

struct LemmaSides { double lhs = 0.0; double rhs = 0.0; };
LemmaSides lemma_a1_identity(std::span<const double> f, std::span<const double> g,
                             std::span<const double> h);

struct InstanceOptions {
    int num_contexts = 3, num_actions = 3, num_embeds = 3;
    bool enforce_common_support = true;      // A1
    bool enforce_common_embed_support = true; // A2
    bool enforce_no_direct_effect = true;    // A3
    int deficient_actions = 0;   // zero logging-probability actions (per context)
    int deficient_embeds = 0;    // embeddings unreachable under pi0 (global)
    double propensity_floor = 1e-3;
};
TabularInstance random_instance(const InstanceOptions& opts, std::mt19937_64& rng);

void save_instance(const TabularInstance& inst, const std::string& path);
TabularInstance load_instance(const std::string& path);

// The paper's toy three-action/three-embedding fixture.
TabularInstance table1_instance();

} // namespace ope
