#include "marcz/discretize.hpp"

#include "marcz/analysis.hpp"
#include "marcz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marcz {

namespace {

void check_plan(const DiscreteSpace& space, const SamplePlan& plan) {
    if (plan.size() == 0) throw std::invalid_argument("plan: empty");
    if (plan.weights.size() != plan.size())
        throw std::invalid_argument("plan: weights/indices size mismatch");
    for (int idx : plan.indices) {
        if (idx < 0 || idx >= space.size())
            throw std::invalid_argument("plan: atom index out of range");
        if (space.weights[idx] <= 0.0)
            throw std::invalid_argument("plan: index references a zero-mass atom");
    }
    if ((plan.weights.array() < 0.0).any())
        throw std::invalid_argument("plan: negative weight");
}

Eigen::MatrixXd plan_rows(const Subspace& sub, const SamplePlan& plan) {
    Eigen::MatrixXd rows(plan.size(), sub.dimension());
    for (int i = 0; i < plan.size(); ++i) rows.row(i) = sub.values.row(plan.indices[i]);
    return rows;
}

}  // namespace

SamplePlan sample_random(const DiscreteSpace& space, int m, std::uint64_t seed) {
    space.validate();
    if (m < 1) throw std::invalid_argument("sample_random: m must be positive");
    Eigen::VectorXd cdf(space.size());
    double acc = 0.0;
    for (int j = 0; j < space.size(); ++j) {
        acc += space.weights[j];
        cdf[j] = acc;
    }
    rng::Engine eng(rng::derive(seed, 0xA11));
    SamplePlan plan;
    plan.indices.resize(m);
    for (int i = 0; i < m; ++i) {
        double u = eng.uniform() * acc;
        const double* begin = cdf.data();
        const double* it = std::upper_bound(begin, begin + space.size(), u);
        int j = static_cast<int>(std::min<std::ptrdiff_t>(it - begin, space.size() - 1));
        plan.indices[i] = j;
    }
    plan.weights = Eigen::VectorXd::Constant(m, 1.0 / m);
    plan.p = 2.0;
    plan.provenance = "random";
    return plan;
}

SamplePlan full_grid_plan(const DiscreteSpace& space, double p) {
    space.validate();
    SamplePlan plan;
    std::vector<double> w;
    for (int j = 0; j < space.size(); ++j) {
        if (space.weights[j] > 0.0) {
            plan.indices.push_back(j);
            w.push_back(space.weights[j]);
        }
    }
    plan.weights = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
    plan.p = p;
    plan.provenance = "full-grid";
    return plan;
}

int suggest_m(int N, double K1, double eps, double C) {
    if (N < 2) throw std::invalid_argument("suggest_m: need N >= 2");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("suggest_m: need 0 < eps < 1");
    if (!(K1 > 0.0) || !(C > 0.0)) throw std::invalid_argument("suggest_m: bad constants");
    double v = C * K1 * N * std::log(static_cast<double>(N)) / (eps * eps);
    return static_cast<int>(std::ceil(v));
}

Certificate certify_exact_l2(const Subspace& sub, const SamplePlan& plan) {
    if (plan.p != 2.0) throw std::invalid_argument("certify_exact_l2: plan.p must be 2");
    check_plan(sub.space, plan);
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    Eigen::MatrixXd rows = plan_rows(ortho, plan);
    Eigen::MatrixXd g = rows.transpose() * plan.weights.asDiagonal() * rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    Certificate cert;
    cert.p = 2.0;
    cert.C1 = std::max(0.0, es.eigenvalues().minCoeff());
    cert.C2 = std::max(0.0, es.eigenvalues().maxCoeff());
    cert.method = "exact-eigen";
    cert.detail["lambda_min"] = es.eigenvalues().minCoeff();
    cert.detail["lambda_max"] = es.eigenvalues().maxCoeff();
    cert.detail["plan_size"] = plan.size();
    return cert;
}

namespace {

/// Ratio R(c) = sum_nu lambda_nu |(P c)_nu|^p / sum_j mu_j |(U c)_j|^p and its
/// extreme-tracking evaluation helpers for the heuristic certificate.
struct RatioProblem {
    const Eigen::MatrixXd& rows;      // plan rows of the orthonormal basis
    const Eigen::VectorXd& lambda;    // plan weights
    const Subspace& sub;              // orthonormal subspace
    double p;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;

    double power_sum(const Eigen::VectorXd& y, const Eigen::VectorXd& w) const {
        double acc = 0.0;
        if (p == 2.0) {
            acc = (w.array() * y.array().square()).sum();
        } else if (p == 1.0) {
            acc = (w.array() * y.array().abs()).sum();
        } else {
            for (int i = 0; i < y.size(); ++i)
                acc += w[i] * std::pow(std::abs(y[i]), p);
        }
        return acc;
    }

    /// Gradient of sum_i w_i |y_i|^p with respect to y, divided by p.
    Eigen::VectorXd power_grad(const Eigen::VectorXd& y, const Eigen::VectorXd& w) const {
        Eigen::VectorXd g(y.size());
        for (int i = 0; i < y.size(); ++i) {
            double a = std::abs(y[i]);
            if (a <= 1e-12) {
                g[i] = 0.0;  // subgradient at exact zeros
            } else {
                double s = y[i] > 0.0 ? 1.0 : -1.0;
                g[i] = w[i] * std::pow(a, p - 1.0) * s;
            }
        }
        return g;
    }

    double eval(const Eigen::VectorXd& c) {
        Eigen::VectorXd num_y = rows * c;
        Eigen::VectorXd den_y = sub.values * c;
        double num = power_sum(num_y, lambda);
        double den = power_sum(den_y, sub.space.weights);
        if (!std::isfinite(num) || !std::isfinite(den))
            throw std::runtime_error("certify_heuristic_lp: non-finite objective");
        if (den <= 0.0) return -1.0;
        double r = num / den;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        return r;
    }

    /// Gradient of log R at c.
    Eigen::VectorXd grad(const Eigen::VectorXd& c) const {
        Eigen::VectorXd num_y = rows * c;
        Eigen::VectorXd den_y = sub.values * c;
        double num = power_sum(num_y, lambda);
        double den = power_sum(den_y, sub.space.weights);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(c.size());
        if (num > 0.0) g += rows.transpose() * power_grad(num_y, lambda) / num;
        if (den > 0.0) g -= sub.values.transpose() * power_grad(den_y, sub.space.weights) / den;
        return g;
    }

    void polish(Eigen::VectorXd c, int direction, int iters) {
        c /= c.norm();
        double cur = eval(c);
        double step = 0.25;
        for (int it = 0; it < iters; ++it) {
            Eigen::VectorXd g = grad(c) * direction;
            double gn = g.norm();
            if (gn < 1e-14) break;
            bool moved = false;
            for (int ls = 0; ls < 25; ++ls) {
                Eigen::VectorXd cand = c + (step / gn) * g;
                cand /= cand.norm();
                double val = eval(cand);
                if (direction * (val - cur) > std::abs(cur) * 1e-14) {
                    c = cand;
                    cur = val;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved || step < 1e-13) break;
        }
    }
};

}  // namespace

Certificate certify_heuristic_lp(const Subspace& sub, const SamplePlan& plan,
                                 int restarts, std::uint64_t seed) {
    if (std::isinf(plan.p) || !(plan.p >= 1.0))
        throw std::invalid_argument("certify_heuristic_lp: need finite p >= 1");
    if (restarts < 1) throw std::invalid_argument("certify_heuristic_lp: restarts >= 1");
    check_plan(sub.space, plan);
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int n = ortho.dimension();
    Eigen::MatrixXd rows = plan_rows(ortho, plan);
    RatioProblem prob{rows, plan.weights, ortho, plan.p};

    const int iters = 200;
    // The p = 2 extremes are exact warm starts for nearby exponents.
    Eigen::MatrixXd g2 = rows.transpose() * plan.weights.asDiagonal() * rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g2);
    prob.polish(es.eigenvectors().col(0), -1, iters);
    prob.polish(es.eigenvectors().col(n - 1), +1, iters);
    for (int i = 0; i < n; ++i) {
        prob.polish(Eigen::VectorXd::Unit(n, i), -1, iters);
        prob.polish(Eigen::VectorXd::Unit(n, i), +1, iters);
    }
    for (int r = 0; r < restarts; ++r) {
        rng::Engine eng(rng::derive(seed, 300 + r));
        Eigen::VectorXd c = eng.sphere(n);
        prob.polish(c, -1, iters);
        prob.polish(c, +1, iters);
    }

    Certificate cert;
    cert.p = plan.p;
    cert.C1 = prob.lo;
    cert.C2 = prob.hi;
    cert.method = "heuristic";
    cert.detail["restarts"] = restarts;
    cert.detail["iterations"] = iters;
    cert.detail["plan_size"] = plan.size();
    return cert;
}

std::pair<double, double> net_transfer(double c1, double c2, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("net_transfer: need 0 < eps < 1");
    double lo = c1 * (1.0 - eps) - c2 * eps * (1.0 + eps) / (1.0 - eps);
    double hi = c2 * (1.0 + eps) / (1.0 - eps);
    return {lo, hi};
}

Certificate certify_via_net(const Subspace& sub, const SamplePlan& plan,
                            double net_radius, std::uint64_t seed, int pool,
                            int probe_budget) {
    if (std::isinf(plan.p) || !(plan.p >= 1.0))
        throw std::invalid_argument("certify_via_net: need finite p >= 1");
    if (!(net_radius > 0.0 && net_radius < 1.0))
        throw std::invalid_argument("certify_via_net: need 0 < net_radius < 1");
    if (sub.dimension() > 10)
        throw std::invalid_argument("certify_via_net: N > 10 exceeds the cost guard");
    check_plan(sub.space, plan);
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int n = ortho.dimension();
    const double p = plan.p;
    const int max_net = 20000;

    auto gauge = [&](const Eigen::VectorXd& c) {
        return lp_norm(ortho.space, ortho.values * c, p);
    };
    rng::Engine eng(rng::derive(seed, 0x9e7));
    auto ball_point = [&]() {
        Eigen::VectorXd z = eng.gaussian(n);
        double gz = gauge(z);
        while (gz < 1e-300) {
            z = eng.gaussian(n);
            gz = gauge(z);
        }
        double radial = std::pow(eng.uniform(), 1.0 / n);
        return Eigen::VectorXd(z * (radial / gz));
    };

    std::vector<Eigen::VectorXd> members;          // coefficients
    std::vector<Eigen::VectorXd> member_values;    // cached B c
    auto min_dist = [&](const Eigen::VectorXd& v) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& mv : member_values)
            best = std::min(best, lp_norm(ortho.space, v - mv, p));
        return best;
    };
    auto insert = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& v) {
        members.push_back(c);
        member_values.push_back(v);
        if (static_cast<int>(members.size()) > max_net)
            throw std::runtime_error("certify_via_net: net exceeds size budget");
    };

    // Farthest-point phase over a candidate pool.
    std::vector<Eigen::VectorXd> cand(pool), cand_values(pool);
    std::vector<double> dist(pool, std::numeric_limits<double>::infinity());
    for (int i = 0; i < pool; ++i) {
        cand[i] = ball_point();
        cand_values[i] = ortho.values * cand[i];
    }
    insert(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(ortho.atoms()));
    while (true) {
        int best = -1;
        double best_d = net_radius;
        for (int i = 0; i < pool; ++i) {
            dist[i] = std::min(dist[i],
                               lp_norm(ortho.space, cand_values[i] - member_values.back(), p));
            if (dist[i] > best_d) {
                best_d = dist[i];
                best = i;
            }
        }
        if (best < 0) break;
        insert(cand[best], cand_values[best]);
    }

    // Maximality probe: any rejection candidate still insertable extends the set.
    int probe_insertions = 0;
    for (int t = 0; t < probe_budget; ++t) {
        Eigen::VectorXd c = ball_point();
        Eigen::VectorXd v = ortho.values * c;
        if (min_dist(v) >= net_radius) {
            insert(c, v);
            ++probe_insertions;
        }
    }

    Eigen::MatrixXd rows = plan_rows(ortho, plan);
    double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
    int used = 0;
    for (size_t i = 0; i < members.size(); ++i) {
        double den = lp_norm(ortho.space, member_values[i], p);
        if (den < 1e-12) continue;
        Eigen::VectorXd y = rows * members[i];
        double num = 0.0;
        for (int j = 0; j < y.size(); ++j)
            num += plan.weights[j] * std::pow(std::abs(y[j]), p);
        double r = std::pow(num, 1.0 / p) / den;
        c1 = std::min(c1, r);
        c2 = std::max(c2, r);
        ++used;
    }
    if (used == 0) throw std::runtime_error("certify_via_net: degenerate net");

    auto [lo, hi] = net_transfer(c1, c2, net_radius);
    if (lo <= 0.0)
        throw std::runtime_error(
            "certify_via_net: transferred lower constant is nonpositive; shrink net_radius");

    Certificate cert;
    cert.p = p;
    // The transfer bounds norms; certificates compare p-th powers.
    cert.C1 = std::pow(lo, p);
    cert.C2 = std::pow(hi, p);
    cert.method = "net-rigorous";
    cert.detail["net_radius"] = net_radius;
    cert.detail["net_size"] = static_cast<double>(members.size());
    cert.detail["c1_net"] = c1;
    cert.detail["c2_net"] = c2;
    cert.detail["c1_transfer"] = lo;
    cert.detail["c2_transfer"] = hi;
    cert.detail["probe_insertions"] = probe_insertions;
    cert.detail["probe_budget"] = probe_budget;
    return cert;
}

ConcentrationReport verify_concentration(const Subspace& sub, const FunctionVec& f,
                                         double p, int m, double eps, int trials,
                                         std::uint64_t seed) {
    if (std::isinf(p) || !(p >= 1.0))
        throw std::invalid_argument("verify_concentration: need finite p >= 1");
    if (m < 1 || trials < 1) throw std::invalid_argument("verify_concentration: m, trials >= 1");
    Eigen::VectorXd v = evaluate(sub, f);
    if (std::abs(lp_norm(sub.space, v, p) - 1.0) > 1e-9)
        throw std::invalid_argument("verify_concentration: ||f||_p must equal 1");

    const auto& mu = sub.space.weights;
    Eigen::VectorXd powers(v.size());
    for (int j = 0; j < v.size(); ++j) powers[j] = std::pow(std::abs(v[j]), p);

    double m1 = 0.0, minf = 0.0;
    for (int j = 0; j < v.size(); ++j) {
        if (mu[j] <= 0.0) continue;
        double dev = std::abs(powers[j] - 1.0);
        m1 += mu[j] * dev;
        minf = std::max(minf, dev);
    }

    Eigen::VectorXd cdf(mu.size());
    double acc = 0.0;
    for (int j = 0; j < mu.size(); ++j) {
        acc += mu[j];
        cdf[j] = acc;
    }

    int failures = 0;
    for (int t = 0; t < trials; ++t) {
        rng::Engine eng(rng::derive(seed, 5000 + t));
        double sum = 0.0;
        for (int i = 0; i < m; ++i) {
            double u = eng.uniform() * acc;
            const double* begin = cdf.data();
            const double* it = std::upper_bound(begin, begin + cdf.size(), u);
            int j = static_cast<int>(std::min<std::ptrdiff_t>(it - begin, cdf.size() - 1));
            sum += powers[j];
        }
        if (std::abs(sum / m - 1.0) >= eps) ++failures;
    }

    ConcentrationReport rep;
    rep.m = m;
    rep.trials = trials;
    rep.eps = eps;
    rep.p = p;
    rep.M1 = m1;
    rep.Minf = minf;
    rep.empirical_rate = static_cast<double>(failures) / trials;
    rep.bound = (m1 * minf > 0.0) ? 2.0 * std::exp(-m * eps * eps / (4.0 * m1 * minf)) : 0.0;
    rep.stderr_ = std::sqrt(rep.empirical_rate * (1.0 - rep.empirical_rate) / trials);
    rep.passed = rep.empirical_rate <= rep.bound + 4.0 * rep.stderr_;
    return rep;
}

TwoStageResult two_stage_discretize(const Subspace& sub, double p, double eps,
                                    std::uint64_t seed, const TwoStageConfig& cfg) {
    if (!(p >= 1.0 && p <= 2.0))
        throw std::invalid_argument("two_stage_discretize: need 1 <= p <= 2");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("two_stage_discretize: need 0 < eps < 1");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int n = ortho.dimension();
    const double k1 = ortho.values.rowwise().norm().cwiseAbs2().maxCoeff() / n;
    const double ln_n = std::log(static_cast<double>(n));

    int m1 = std::max<int>(n, static_cast<int>(std::ceil(
                                  cfg.C * k1 * n * static_cast<double>(n) * ln_n / (eps * eps))));
    int target = std::max<int>(n, static_cast<int>(std::ceil(cfg.Cp * k1 * n * ln_n * ln_n * ln_n)));
    target = std::min(target, m1);

    SamplePlan stage1 = sample_random(ortho.space, m1, rng::derive(seed, 1));

    TwoStageResult result;
    result.stage1_size = m1;
    result.alpha = (n >= 2 && k1 > 0.0) ? std::log(k1) / ln_n : 0.0;
    double best_violation = std::numeric_limits<double>::infinity();

    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        // Partial Fisher-Yates draw of `target` stage-1 slots without replacement.
        rng::Engine eng(rng::derive(seed, 100 + attempt));
        std::vector<int> slots(m1);
        for (int i = 0; i < m1; ++i) slots[i] = i;
        SamplePlan plan;
        plan.indices.resize(target);
        for (int i = 0; i < target; ++i) {
            int j = i + static_cast<int>(eng.below(m1 - i));
            std::swap(slots[i], slots[j]);
            plan.indices[i] = stage1.indices[slots[i]];
        }
        plan.weights = Eigen::VectorXd::Constant(target, 1.0 / target);
        plan.p = p;
        plan.provenance = "two-stage";

        Certificate cert = (p == 2.0)
                               ? certify_exact_l2(ortho, plan)
                               : certify_heuristic_lp(ortho, plan, cfg.heuristic_restarts,
                                                      rng::derive(seed, 40000 + attempt));
        double violation =
            std::max({1.0 - eps - cert.C1, cert.C2 - (1.0 + eps), 0.0});
        if (violation < best_violation) {
            best_violation = violation;
            result.plan = plan;
            result.certificate = cert;
        }
        result.attempts = attempt + 1;
        if (violation <= 1e-12) {
            result.accepted = true;
            break;
        }
    }
    result.certificate.detail["alpha"] = result.alpha;
    result.certificate.detail["stage1_size"] = m1;
    result.certificate.detail["target_size"] = target;
    result.certificate.detail["attempts"] = result.attempts;
    return result;
}

}  // namespace marcz
