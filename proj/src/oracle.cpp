#include "ope/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ope {

namespace {

bool is_distribution(const std::vector<double>& p, double tol = 1e-9) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
        s += v;
    }
    return std::abs(s - 1.0) <= tol;
}

int sample_index(const std::vector<double>& p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng), acc = 0.0;
    int last_pos = -1;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        if (p[i] > 0.0) last_pos = i;
        acc += p[i];
        if (u <= acc) return p[i] > 0.0 ? i : last_pos;
    }
    return last_pos;
}

} // namespace

void TabularInstance::validate() const {
    const int X = num_contexts(), A = num_actions(), E = num_embeds();
    if (X <= 0 || A <= 0 || E <= 0)
        throw std::invalid_argument("tabular instance: empty dimension");
    if (!is_distribution(px))
        throw std::invalid_argument("tabular instance: p(x) is not a distribution");
    auto check_policy = [&](const std::vector<std::vector<double>>& pi, const char* name) {
        if (static_cast<int>(pi.size()) != X)
            throw std::invalid_argument(std::string("tabular instance: ") + name + " has wrong X");
        for (const auto& row : pi)
            if (static_cast<int>(row.size()) != A || !is_distribution(row))
                throw std::invalid_argument(std::string("tabular instance: ") + name +
                                            " row is not a distribution over A");
    };
    check_policy(pi_t, "pi");
    check_policy(pi_0, "pi_0");
    for (int x = 0; x < X; ++x)
        for (int a = 0; a < A; ++a) {
            if (pi_0[x][a] > 0.0 && !is_distribution(p_e[x][a]))
                throw std::invalid_argument(
                    "tabular instance: p(e|x,a) invalid for a logging-supported pair");
            for (int e = 0; e < E; ++e)
                if (m2[x][a][e] + 1e-12 < q[x][a][e] * q[x][a][e])
                    throw std::invalid_argument(
                        "tabular instance: second moment below squared mean");
        }
}

double TabularInstance::marginal_e(int x, int e,
                                   const std::vector<std::vector<double>>& pi) const {
    double s = 0.0;
    for (int a = 0; a < num_actions(); ++a) s += pi[x][a] * p_e[x][a][e];
    return s;
}

double TabularInstance::posterior0(int x, int a, int e) const {
    const double pe = marginal_e(x, e, pi_0);
    if (pe <= 0.0) return 0.0;
    return pi_0[x][a] * p_e[x][a][e] / pe;
}

double TabularInstance::vanilla_weight(int x, int a) const {
    if (pi_0[x][a] <= 0.0) {
        if (pi_t[x][a] <= 0.0) return 0.0;
        throw std::domain_error("vanilla weight undefined: action " + std::to_string(a) +
                                " has zero logging propensity in context " + std::to_string(x));
    }
    return pi_t[x][a] / pi_0[x][a];
}

double TabularInstance::marginal_weight(int x, int e) const {
    const double p0 = marginal_e(x, e, pi_0);
    const double pt = marginal_e(x, e, pi_t);
    if (p0 <= 0.0) {
        if (pt <= 0.0) return 0.0;
        throw std::domain_error("marginal weight undefined: embedding " + std::to_string(e) +
                                " unsupported under the logging policy in context " +
                                std::to_string(x));
    }
    return pt / p0;
}

double TabularInstance::q_xa(int x, int a) const {
    double s = 0.0;
    for (int e = 0; e < num_embeds(); ++e) s += p_e[x][a][e] * q[x][a][e];
    return s;
}

double TabularInstance::q_xe(int x, int e) const {
    // Average over actions; under no-direct-effect all entries agree.
    double s = 0.0;
    for (int a = 0; a < num_actions(); ++a) s += q[x][a][e];
    return s / num_actions();
}

bool TabularInstance::common_support() const {
    for (int x = 0; x < num_contexts(); ++x)
        for (int a = 0; a < num_actions(); ++a)
            if (pi_t[x][a] > 0.0 && pi_0[x][a] <= 0.0) return false;
    return true;
}

bool TabularInstance::common_embed_support() const {
    for (int x = 0; x < num_contexts(); ++x)
        for (int e = 0; e < num_embeds(); ++e)
            if (marginal_e(x, e, pi_t) > 0.0 && marginal_e(x, e, pi_0) <= 0.0) return false;
    return true;
}

bool TabularInstance::no_direct_effect(double tol) const {
    for (int x = 0; x < num_contexts(); ++x)
        for (int e = 0; e < num_embeds(); ++e)
            for (int a = 1; a < num_actions(); ++a) {
                if (std::abs(q[x][a][e] - q[x][0][e]) > tol) return false;
                if (std::abs(m2[x][a][e] - m2[x][0][e]) > tol) return false;
            }
    return true;
}

TabularInstance::Draw TabularInstance::sample(std::mt19937_64& rng) const {
    Draw d;
    d.x = sample_index(px, rng);
    d.a = sample_index(pi_0[d.x], rng);
    d.e = sample_index(p_e[d.x][d.a], rng);
    const double mu = q[d.x][d.a][d.e];
    const double var = std::max(0.0, m2[d.x][d.a][d.e] - mu * mu);
    if (family == RewardFamily::TwoPoint) {
        const double s = std::sqrt(var);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        d.r = unif(rng) < 0.5 ? mu - s : mu + s;
    } else {
        std::normal_distribution<double> norm(mu, std::sqrt(var));
        d.r = norm(rng);
    }
    return d;
}

double exact_value(const TabularInstance& inst, const std::vector<std::vector<double>>& pi) {
    const long long states =
        1LL * inst.num_contexts() * inst.num_actions() * inst.num_embeds();
    if (states > 1000000LL)
        throw std::invalid_argument("instance too large to enumerate");
    double v = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (pi[x][a] <= 0.0) continue;
            for (int e = 0; e < inst.num_embeds(); ++e)
                v += inst.px[x] * pi[x][a] * inst.p_e[x][a][e] * inst.q[x][a][e];
        }
    return v;
}

double exact_ips_deficiency_bias(const TabularInstance& inst) {
    double b = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a)
            if (inst.pi_0[x][a] <= 0.0)
                b += inst.px[x] * inst.pi_t[x][a] * inst.q_xa(x, a);
    return b;
}

double exact_mips_bias(const TabularInstance& inst) {
    if (!inst.common_embed_support())
        throw std::domain_error(
            "exact_mips_bias requires common embedding support; "
            "use exact_bias_deficient_embedding for the unsupported-embedding bias");
    const int X = inst.num_contexts(), A = inst.num_actions(), E = inst.num_embeds();
    double bias = 0.0;
    for (int x = 0; x < X; ++x) {
        for (int e = 0; e < E; ++e) {
            const double p0e = inst.marginal_e(x, e, inst.pi_0);
            if (p0e <= 0.0) continue;
            double inner = 0.0;
            for (int a = 0; a < A; ++a) {
                const double pa = inst.posterior0(x, a, e);
                if (pa <= 0.0) continue;
                const double wa = inst.vanilla_weight(x, a);
                for (int b = a + 1; b < A; ++b) {
                    const double pb = inst.posterior0(x, b, e);
                    if (pb <= 0.0) continue;
                    const double wb = inst.vanilla_weight(x, b);
                    inner += pa * pb * (inst.q[x][a][e] - inst.q[x][b][e]) * (wb - wa);
                }
            }
            bias += inst.px[x] * p0e * inner;
        }
    }
    return bias;
}

double single_sample_mean_ips(const TabularInstance& inst) {
    double m = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            const double w = inst.pi_t[x][a] / inst.pi_0[x][a];
            if (w == 0.0) continue;
            for (int e = 0; e < inst.num_embeds(); ++e)
                m += inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e] * w * inst.q[x][a][e];
        }
    return m;
}

double single_sample_mean_mips(const TabularInstance& inst) {
    double m = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            for (int e = 0; e < inst.num_embeds(); ++e) {
                if (inst.p_e[x][a][e] <= 0.0) continue;
                m += inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e] *
                     inst.marginal_weight(x, e) * inst.q[x][a][e];
            }
        }
    return m;
}

double single_sample_mean_weighted(const TabularInstance& inst,
                                   const std::vector<std::vector<double>>& w_hat) {
    double m = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            for (int e = 0; e < inst.num_embeds(); ++e)
                m += inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e] * w_hat[x][e] *
                     inst.q[x][a][e];
        }
    return m;
}

double single_sample_variance_weighted(const TabularInstance& inst,
                                       const std::vector<std::vector<double>>& w_hat) {
    double mean = single_sample_mean_weighted(inst, w_hat);
    double second = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            for (int e = 0; e < inst.num_embeds(); ++e)
                second += inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e] * w_hat[x][e] *
                          w_hat[x][e] * inst.m2[x][a][e];
        }
    return second - mean * mean;
}

VarianceReduction exact_variance_reduction(const TabularInstance& inst) {
    if (!inst.common_support())
        throw std::domain_error("exact_variance_reduction requires common action support");
    if (!inst.common_embed_support())
        throw std::domain_error("exact_variance_reduction requires common embedding support");
    // No-direct-effect is deliberately not required: the formula value equals
    // var_ips - var_mips only under it, but both cross-check variances (and
    // the non-negativity of their difference) remain meaningful without it.

    const int X = inst.num_contexts(), A = inst.num_actions(), E = inst.num_embeds();
    VarianceReduction out;

    // Formula: E_{p(x)p(e|x,pi0)}[ E[r^2|x,e] * V_{pi0(a|x,e)}[w(x,a)] ].
    for (int x = 0; x < X; ++x)
        for (int e = 0; e < E; ++e) {
            const double p0e = inst.marginal_e(x, e, inst.pi_0);
            if (p0e <= 0.0) continue;
            double m2bar = 0.0, wbar = 0.0, w2bar = 0.0;
            for (int a = 0; a < A; ++a) {
                const double pa = inst.posterior0(x, a, e);
                if (pa <= 0.0) continue;
                const double w = inst.vanilla_weight(x, a);
                m2bar += pa * inst.m2[x][a][e];
                wbar += pa * w;
                w2bar += pa * w * w;
            }
            out.reduction += inst.px[x] * p0e * m2bar * (w2bar - wbar * wbar);
        }

    // First-principles single-sample variances.
    double mean_ips = single_sample_mean_ips(inst);
    double mean_mips = single_sample_mean_mips(inst);
    double sec_ips = 0.0, sec_mips = 0.0;
    for (int x = 0; x < X; ++x)
        for (int a = 0; a < A; ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            const double w = inst.pi_t[x][a] / inst.pi_0[x][a];
            for (int e = 0; e < E; ++e) {
                if (inst.p_e[x][a][e] <= 0.0) continue;
                const double mass = inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e];
                const double we = inst.marginal_weight(x, e);
                sec_ips += mass * w * w * inst.m2[x][a][e];
                sec_mips += mass * we * we * inst.m2[x][a][e];
            }
        }
    out.var_ips = sec_ips - mean_ips * mean_ips;
    out.var_mips = sec_mips - mean_mips * mean_mips;
    return out;
}

double exact_mse_gain(const TabularInstance& inst, long long n) {
    if (!inst.common_support())
        throw std::domain_error("exact_mse_gain requires common action support");
    if (!inst.common_embed_support())
        throw std::domain_error("exact_mse_gain requires common embedding support");
    double first = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int a = 0; a < inst.num_actions(); ++a) {
            if (inst.pi_0[x][a] <= 0.0) continue;
            const double wa = inst.pi_t[x][a] / inst.pi_0[x][a];
            for (int e = 0; e < inst.num_embeds(); ++e) {
                if (inst.p_e[x][a][e] <= 0.0) continue;
                const double we = inst.marginal_weight(x, e);
                first += inst.px[x] * inst.pi_0[x][a] * inst.p_e[x][a][e] *
                         (wa * wa - we * we) * inst.m2[x][a][e];
            }
        }
    const double bias = exact_mips_bias(inst);
    const double v = exact_value(inst, inst.pi_t);
    return first + 2.0 * v * bias + (1.0 - static_cast<double>(n)) * bias * bias;
}

BiasVariance exact_estimated_weight_bias_variance(
    const TabularInstance& inst, const std::vector<std::vector<double>>& delta) {
    if (!inst.common_embed_support())
        throw std::domain_error(
            "exact_estimated_weight_bias_variance requires common embedding support");
    const int X = inst.num_contexts(), A = inst.num_actions(), E = inst.num_embeds();
    BiasVariance out;

    // Bias = Bias(true-weight mips) - E_{p(x)p(e|x,pi)}[ delta(x,e) q(x,pi0,e) ].
    out.bias = exact_mips_bias(inst);
    std::vector<std::vector<double>> qbar(X, std::vector<double>(E, 0.0));
    std::vector<std::vector<double>> s2bar(X, std::vector<double>(E, 0.0));
    for (int x = 0; x < X; ++x)
        for (int e = 0; e < E; ++e)
            for (int a = 0; a < A; ++a) {
                const double pa = inst.posterior0(x, a, e);
                if (pa <= 0.0) continue;
                qbar[x][e] += pa * inst.q[x][a][e];
                s2bar[x][e] += pa * (inst.m2[x][a][e] - inst.q[x][a][e] * inst.q[x][a][e]);
            }
    for (int x = 0; x < X; ++x)
        for (int e = 0; e < E; ++e)
            out.bias -= inst.px[x] * inst.marginal_e(x, e, inst.pi_t) * delta[x][e] * qbar[x][e];

    // Three-term variance display (n * V of the single-sample term).
    double term1 = 0.0, term2 = 0.0, mean_mx = 0.0, second_mx = 0.0;
    for (int x = 0; x < X; ++x) {
        double inner_mean = 0.0, inner_second = 0.0, mx = 0.0;
        for (int e = 0; e < E; ++e) {
            const double pte = inst.marginal_e(x, e, inst.pi_t);
            const double p0e = inst.marginal_e(x, e, inst.pi_0);
            const double one_minus = 1.0 - delta[x][e];
            const double w = p0e > 0.0 ? pte / p0e : 0.0;
            term1 += inst.px[x] * pte * one_minus * one_minus * w * s2bar[x][e];
            mx += pte * one_minus * qbar[x][e];
            const double w_hat = one_minus * w;
            for (int a = 0; a < A; ++a) {
                if (inst.pi_0[x][a] <= 0.0 || inst.p_e[x][a][e] <= 0.0) continue;
                const double mass = inst.pi_0[x][a] * inst.p_e[x][a][e];
                const double term = w_hat * inst.q[x][a][e];
                inner_mean += mass * term;
                inner_second += mass * term * term;
            }
        }
        term2 += inst.px[x] * (inner_second - inner_mean * inner_mean);
        mean_mx += inst.px[x] * mx;
        second_mx += inst.px[x] * mx * mx;
    }
    out.variance = term1 + term2 + (second_mx - mean_mx * mean_mx);
    return out;
}

double exact_bias_deficient_embedding(const TabularInstance& inst) {
    if (!inst.no_direct_effect(1e-9))
        throw std::domain_error(
            "exact_bias_deficient_embedding requires no direct effect of actions");
    double b = 0.0;
    for (int x = 0; x < inst.num_contexts(); ++x)
        for (int e = 0; e < inst.num_embeds(); ++e) {
            if (inst.marginal_e(x, e, inst.pi_0) > 0.0) continue;
            const double pte = inst.marginal_e(x, e, inst.pi_t);
            if (pte <= 0.0) continue;
            // q(x,e) weighted by how pi reaches this unsupported embedding.
            double qe = 0.0;
            for (int a = 0; a < inst.num_actions(); ++a)
                qe += inst.pi_t[x][a] * inst.p_e[x][a][e] * inst.q[x][a][e];
            b += inst.px[x] * qe;
        }
    return b;
}

LemmaSides lemma_a1_identity(std::span<const double> f, std::span<const double> g,
                             std::span<const double> h) {
    const size_t m = f.size();
    if (g.size() != m || h.size() != m || m < 1)
        throw std::invalid_argument("lemma identity requires equal-length vectors, m >= 1");
    double gsum = 0.0, gh = 0.0;
    for (size_t i = 0; i < m; ++i) {
        gsum += g[i];
        gh += g[i] * h[i];
    }
    if (std::abs(gsum - 1.0) > 1e-9)
        throw std::invalid_argument("lemma identity requires g on the simplex");
    LemmaSides out;
    for (size_t a = 0; a < m; ++a) {
        out.lhs += f[a] * g[a] * (h[a] - gh);
        for (size_t b = a + 1; b < m; ++b)
            out.rhs += g[a] * g[b] * (h[a] - h[b]) * (f[a] - f[b]);
    }
    return out;
}

TabularInstance random_instance(const InstanceOptions& opts, std::mt19937_64& rng) {
    const int X = opts.num_contexts, A = opts.num_actions, E = opts.num_embeds;
    if (X < 1 || A < 2 || E < 1)
        throw std::invalid_argument("random instance needs X >= 1, A >= 2, E >= 1");
    if (opts.deficient_actions >= A)
        throw std::invalid_argument("too many deficient actions");
    if (opts.deficient_embeds >= E)
        throw std::invalid_argument("too many deficient embeddings");
    const int alien = (opts.deficient_embeds > 0 && opts.deficient_actions == 0)
                          ? 1
                          : opts.deficient_actions;

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto spiky_simplex = [&](int k, const std::vector<bool>& zero, double floor) {
        std::vector<double> p(k, 0.0);
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
            if (!zero.empty() && zero[i]) continue;
            // Fourth power biases toward occasional near-floor entries.
            p[i] = std::pow(unif(rng), 4.0) + floor;
            s += p[i];
        }
        if (s <= 0.0) throw std::logic_error("empty support while building simplex");
        for (double& v : p) v /= s;
        return p;
    };

    TabularInstance inst;
    inst.family = TabularInstance::RewardFamily::TwoPoint;
    inst.px = spiky_simplex(X, {}, 0.05);
    inst.pi_t.resize(X);
    inst.pi_0.resize(X);
    inst.p_e.assign(X, std::vector<std::vector<double>>(A));
    inst.q.assign(X, std::vector<std::vector<double>>(A, std::vector<double>(E, 0.0)));
    inst.m2 = inst.q;

    // Deficient actions: zero logging propensity, positive target propensity.
    std::vector<bool> action_deficient(A, false);
    for (int i = 0; i < alien; ++i) action_deficient[A - 1 - i] = true;
    std::vector<bool> embed_deficient(E, false);
    for (int i = 0; i < opts.deficient_embeds; ++i) embed_deficient[E - 1 - i] = true;

    for (int x = 0; x < X; ++x) {
        inst.pi_0[x] = spiky_simplex(A, action_deficient, opts.propensity_floor);
        if (opts.enforce_common_support && alien == 0) {
            inst.pi_t[x] = spiky_simplex(A, action_deficient, opts.propensity_floor);
        } else {
            inst.pi_t[x] = spiky_simplex(A, {}, opts.propensity_floor);
        }
        for (int a = 0; a < A; ++a) {
            if (action_deficient[a]) {
                // Alien actions are the only route to deficient embeddings.
                std::vector<bool> zero(E, false);
                inst.p_e[x][a] = spiky_simplex(E, zero, opts.propensity_floor);
            } else {
                inst.p_e[x][a] = spiky_simplex(E, embed_deficient, opts.propensity_floor);
            }
        }
        if (opts.enforce_common_embed_support && opts.deficient_embeds == 0 && alien > 0) {
            // Alien actions must not open embedding mass the logging policy lacks;
            // with full-support p(e|x,a) rows for supported actions this holds.
        }
        for (int e = 0; e < E; ++e) {
            const double q_shared = 0.1 + 1.9 * unif(rng);
            const double var_shared = 0.05 + unif(rng);
            for (int a = 0; a < A; ++a) {
                double qv = q_shared, var = var_shared;
                if (!opts.enforce_no_direct_effect) {
                    qv = 0.1 + 1.9 * unif(rng);
                    var = 0.05 + unif(rng);
                }
                inst.q[x][a][e] = qv;
                inst.m2[x][a][e] = qv * qv + var;
            }
        }
    }
    inst.validate();
    return inst;
}

void save_instance(const TabularInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(17);
    out << "tabular-instance 1\n";
    out << inst.num_contexts() << ' ' << inst.num_actions() << ' ' << inst.num_embeds() << ' '
        << (inst.family == TabularInstance::RewardFamily::TwoPoint ? "two-point" : "gaussian")
        << '\n';
    for (double v : inst.px) out << v << ' ';
    out << '\n';
    auto dump_policy = [&](const std::vector<std::vector<double>>& pi) {
        for (const auto& row : pi) {
            for (double v : row) out << v << ' ';
            out << '\n';
        }
    };
    dump_policy(inst.pi_t);
    dump_policy(inst.pi_0);
    auto dump_cube = [&](const std::vector<std::vector<std::vector<double>>>& c) {
        for (const auto& plane : c)
            for (const auto& row : plane) {
                for (double v : row) out << v << ' ';
                out << '\n';
            }
    };
    dump_cube(inst.p_e);
    dump_cube(inst.q);
    dump_cube(inst.m2);
    if (!out) throw std::runtime_error("failed writing " + path);
}

TabularInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "tabular-instance" || version != 1)
        throw std::runtime_error(path + ": not a tabular instance file");
    int X, A, E;
    std::string fam;
    in >> X >> A >> E >> fam;
    TabularInstance inst;
    inst.family = fam == "gaussian" ? TabularInstance::RewardFamily::Gaussian
                                    : TabularInstance::RewardFamily::TwoPoint;
    inst.px.resize(X);
    for (double& v : inst.px) in >> v;
    auto read_policy = [&](std::vector<std::vector<double>>& pi) {
        pi.assign(X, std::vector<double>(A));
        for (auto& row : pi)
            for (double& v : row) in >> v;
    };
    read_policy(inst.pi_t);
    read_policy(inst.pi_0);
    auto read_cube = [&](std::vector<std::vector<std::vector<double>>>& c) {
        c.assign(X, std::vector<std::vector<double>>(A, std::vector<double>(E)));
        for (auto& plane : c)
            for (auto& row : plane)
                for (double& v : row) in >> v;
    };
    read_cube(inst.p_e);
    read_cube(inst.q);
    read_cube(inst.m2);
    if (!in) throw std::runtime_error(path + ": truncated instance file");
    inst.validate();
    return inst;
}

TabularInstance table1_instance() {
    TabularInstance inst;
    inst.px = {1.0};
    inst.pi_0 = {{0.0, 0.2, 0.8}};
    inst.pi_t = {{0.2, 0.8, 0.0}};
    inst.p_e = {{{0.25, 0.25, 0.5}, {0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}}};
    inst.q = {{{1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}}};
    inst.m2 = {{{1.5, 1.5, 1.5}, {1.5, 1.5, 1.5}, {1.5, 1.5, 1.5}}};
    inst.validate();
    return inst;
}

} // namespace ope
