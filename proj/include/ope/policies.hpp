#pragma once
#include <span>
#include <vector>

#include "ope/distribution.hpp"

namespace ope {

// probs[a] proportional to exp(beta * scores[a]), computed with max-subtraction.
Distribution softmax_policy(std::span<const double> scores, double beta);

// probs[a] = (1 - epsilon) * 1{a = argmax q} + epsilon / |A|.
// Argmax ties break toward the lowest index.
Distribution epsilon_greedy_policy(std::span<const double> q_values, double epsilon);

// pi(a|x) / pi0(a|x). Throws if the logging propensity of `action` is zero.
double vanilla_weight(const Distribution& target, const Distribution& logging, int action);

// p(e|x,pi) / p(e|x,pi0) with both marginals summed exactly over actions.
// embed_model[a] is p(.|x,a) over the (flattened) embedding space.
double marginal_weight_true(const Distribution& target, const Distribution& logging,
                            std::span<const Distribution> embed_model, int embedding);

} // namespace ope
