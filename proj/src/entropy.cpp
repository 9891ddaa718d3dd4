#include "marcz/entropy.hpp"

#include "marcz/analysis.hpp"
#include "marcz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marcz {

namespace {

/// Support-restricted "distance >= threshold" test with early exit: far
/// members are confirmed as soon as the running norm crosses the threshold,
/// close members reject the candidate after a full scan.
struct Metric {
    const std::vector<int>& support;
    const Eigen::VectorXd& mu;
    double q;

    bool at_least(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  double threshold) const {
        if (std::isinf(q)) {
            for (int j : support)
                if (std::abs(a[j] - b[j]) >= threshold) return true;
            return false;
        }
        const double target = std::pow(threshold, q);
        double acc = 0.0;
        if (q == 2.0) {
            for (int j : support) {
                double d = a[j] - b[j];
                acc += mu[j] * d * d;
                if (acc >= target) return true;
            }
        } else if (q == 1.0) {
            for (int j : support) {
                acc += mu[j] * std::abs(a[j] - b[j]);
                if (acc >= target) return true;
            }
        } else {
            for (int j : support) {
                acc += mu[j] * std::pow(std::abs(a[j] - b[j]), q);
                if (acc >= target) return true;
            }
        }
        return false;
    }
};

struct GreedySet {
    std::vector<Eigen::VectorXd> values;
    const Metric& metric;
    double eps_eff;
    int cap;
    bool saturated = false;

    bool try_insert(const Eigen::VectorXd& v) {
        if (saturated) return false;
        for (const auto& m : values)
            if (!metric.at_least(v, m, eps_eff)) return false;
        values.push_back(v);
        if (static_cast<int>(values.size()) >= cap) saturated = true;
        return true;
    }
};

}  // namespace

EntropyEstimate pack_greedy(const Subspace& sub, double p, double q, double eps,
                            long budget, std::uint64_t seed, const PackOptions& opts) {
    if (!(eps > 0.0)) throw std::invalid_argument("pack_greedy: eps must be positive");
    if (budget < 1000) throw std::invalid_argument("pack_greedy: budget must be >= 1000");
    if (std::isinf(p) || !(p >= 1.0))
        throw std::invalid_argument("pack_greedy: ball exponent must be finite and >= 1");
    if (!(q >= 1.0)) throw std::invalid_argument("pack_greedy: metric exponent must be >= 1");
    const int n = sub.dimension();
    const int m = sub.atoms();

    std::vector<int> support;
    for (int j = 0; j < m; ++j)
        if (sub.space.weights[j] > 0.0) support.push_back(j);
    Metric metric{support, sub.space.weights, q};
    GreedySet set{{}, metric, eps * (1.0 - 1e-9), opts.set_cap, false};

    auto gauge = [&](const Eigen::VectorXd& c) { return lp_norm(sub.space, sub.values * c, p); };

    // Axis extremes, scaled to the ball boundary.
    for (int i = 0; i < n && !set.saturated; ++i) {
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd c = s * Eigen::VectorXd::Unit(n, i);
            double g = gauge(c);
            if (g > 0.0) set.try_insert(sub.values * (c / g));
        }
    }

    // Coefficient lattice with per-axis step eps measured in the metric norm;
    // recovers exact interval packings and seeds the ball interior.
    {
        Eigen::VectorXd colq(n), colp(n);
        bool usable = true;
        for (int i = 0; i < n; ++i) {
            colq[i] = lp_norm(sub.space, sub.values.col(i), q);
            colp[i] = lp_norm(sub.space, sub.values.col(i), p);
            if (colq[i] <= 0.0 || colp[i] <= 0.0) usable = false;
        }
        if (usable) {
            std::vector<int> range(n);
            double total = 1.0;
            for (int i = 0; i < n; ++i) {
                range[i] = static_cast<int>(std::floor(colq[i] / (eps * colp[i]) + 1e-9));
                total *= 2.0 * range[i] + 1.0;
                if (total > opts.lattice_cap) {
                    usable = false;
                    break;
                }
            }
            if (usable) {
                std::vector<std::pair<double, Eigen::VectorXd>> lattice;
                std::vector<int> z(n, 0);
                for (int i = 0; i < n; ++i) z[i] = -range[i];
                while (true) {
                    Eigen::VectorXd c(n);
                    for (int i = 0; i < n; ++i) c[i] = z[i] * eps / colq[i];
                    double g = gauge(c);
                    if (g <= 1.0 + 1e-12) lattice.emplace_back(g, c);
                    int axis = n - 1;
                    while (axis >= 0 && z[axis] == range[axis]) {
                        z[axis] = -range[axis];
                        --axis;
                    }
                    if (axis < 0) break;
                    ++z[axis];
                }
                std::stable_sort(lattice.begin(), lattice.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                for (const auto& [g, c] : lattice) {
                    if (set.saturated) break;
                    set.try_insert(sub.values * c);
                }
            }
        }
    }

    // Random rejection phase under the cone measure of the ball.
    rng::Engine eng(rng::derive(seed, 0xBA11));
    long last_insert = -1;
    long processed = 0;
    for (long t = 0; t < budget && !set.saturated; ++t) {
        Eigen::VectorXd z = eng.gaussian(n);
        double g = gauge(z);
        if (g < 1e-300) continue;
        double radial = std::pow(eng.uniform(), 1.0 / n);
        if (set.try_insert(sub.values * (z * (radial / g)))) last_insert = t;
        processed = t + 1;
    }

    EntropyEstimate est;
    est.p = p;
    est.q = q;
    est.eps = eps;
    est.budget = budget;
    est.count = static_cast<int>(set.values.size());
    est.lower = est.upper = std::log2(static_cast<double>(std::max(1, est.count)));
    est.flagged = set.saturated;
    est.maximality_probed =
        !set.saturated && processed >= 1000 &&
        (last_insert < 0 || last_insert < processed - std::max<long>(processed / 4, 500));
    return est;
}

EntropyEstimate entropy_number(const Subspace& sub, double p, double q, int k,
                               long budget, std::uint64_t seed, const PackOptions& opts) {
    if (k < 1) throw std::invalid_argument("entropy_number: k must be >= 1");
    int eval = 0;
    auto bits_at = [&](double eps) {
        EntropyEstimate e = pack_greedy(sub, p, q, eps, budget, rng::derive(seed, ++eval), opts);
        return e.upper;
    };

    double diam = 2.0;
    if (q > p) {
        double ratio = detail::max_norm_ratio(sub.orthonormal ? sub : orthonormalize(sub), q,
                                              p, 8, rng::derive(seed, 0xD1A));
        diam = 2.0 * ratio;
    }

    double hi = diam;
    int guard = 0;
    while (bits_at(hi) > k && guard++ < 20) hi *= 1.5;

    double lo = hi;
    bool found = false;
    while (guard++ < 80) {
        double next = lo * 0.7;
        if (bits_at(next) > k) {
            lo = next;
            found = true;
            break;
        }
        lo = next;
        hi = next;  // eps_k is below this scale too
        if (lo < 1e-9 * diam) break;
    }

    EntropyEstimate est;
    est.p = p;
    est.q = q;
    est.k = k;
    est.budget = budget;
    est.method = "greedy-packing";
    if (!found) {
        est.lower = 0.0;
        est.upper = hi;
        est.flagged = true;
        return est;
    }
    while (hi / lo > 1.10 && guard++ < 140) {
        double mid = std::sqrt(hi * lo);
        if (bits_at(mid) <= k)
            hi = mid;
        else
            lo = mid;
    }
    est.lower = lo;
    est.upper = hi;
    est.flagged = hi / lo > 1.10 + 1e-12;
    return est;
}

double volumetric_lower_bound(int N, double eps) {
    if (N < 1) throw std::invalid_argument("volumetric_lower_bound: N must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("volumetric_lower_bound: eps must be positive");
    double ln_value = 0.5 * (N - 1) * std::log(M_PI) + std::lgamma((N + 1) / 2.0) -
                      N * std::log(2.0) - N * std::log(eps);
    return ln_value / std::log(2.0);
}

SandwichReport check_ball_entropy_sandwich(int N, double p, double eps, long budget,
                                           std::uint64_t seed) {
    if (N < 1 || N > 5)
        throw std::invalid_argument("check_ball_entropy_sandwich: need 1 <= N <= 5");
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("check_ball_entropy_sandwich: need 0 < eps <= 1");
    // Realize the coefficient p-ball in its own norm: N uniform atoms with
    // basis N^{1/p} I makes the L_p(mu) norm equal the coefficient l_p norm.
    DiscreteSpace space;
    space.weights = Eigen::VectorXd::Constant(N, 1.0 / N);
    space.label = "coefficient-ball";
    Subspace sub;
    sub.space = space;
    sub.values = std::pow(static_cast<double>(N), 1.0 / p) *
                 Eigen::MatrixXd::Identity(N, N);
    EntropyEstimate est = pack_greedy(sub, p, p, eps, budget, seed);

    SandwichReport rep;
    rep.N = N;
    rep.p = p;
    rep.eps = eps;
    rep.count = est.count;
    rep.estimate_bits = est.upper;
    rep.lower_band = N * std::log2(1.0 / eps) - 1.0;
    rep.upper_band = N * std::log2(1.0 + 2.0 / eps);
    rep.passed = rep.estimate_bits <= rep.upper_band + 1e-9 &&
                 rep.estimate_bits >= rep.lower_band - 1e-9;
    return rep;
}

TransferReport check_transfer_inequality(const Subspace& sub, double p, double q,
                                         const std::vector<double>& eps_list,
                                         long budget, std::uint64_t seed) {
    if (!(p >= 1.0 && p < 2.0))
        throw std::invalid_argument("check_transfer_inequality: need 1 <= p < 2");
    if (!(q > 2.0)) throw std::invalid_argument("check_transfer_inequality: need q > 2");
    if (sub.dimension() > 5)
        throw std::invalid_argument("check_transfer_inequality: N > 5 exceeds the cost guard");
    const double invq = std::isinf(q) ? 0.0 : 1.0 / q;
    const double theta = (0.5 - invq) / (1.0 / p - invq);
    const double a = std::pow(2.0, theta / (1.0 - theta));

    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    double diam2q =
        2.0 * detail::max_norm_ratio(ortho, q, 2.0, 8, rng::derive(seed, 0xD2));

    TransferReport rep;
    rep.p = p;
    rep.q = q;
    rep.theta = theta;
    rep.a = a;
    rep.passed = true;
    PackOptions lhs_opts;
    lhs_opts.set_cap = 4096;
    PackOptions rhs_opts;
    rhs_opts.set_cap = 2048;

    int stream = 0;
    for (double eps : eps_list) {
        TransferCase tc;
        tc.eps = eps;
        EntropyEstimate lhs =
            pack_greedy(ortho, p, q, eps, budget, rng::derive(seed, 100 + ++stream), lhs_opts);
        tc.lhs_bits = lhs.lower;
        tc.lhs_saturated = lhs.flagged;

        double rhs = 0.0;
        const double eps_theta = std::pow(eps, theta);
        for (int s = 0;; ++s) {
            double scale = 0.125 * std::pow(a, s - 1) * eps_theta;
            if (scale >= diam2q) break;
            EntropyEstimate term = pack_greedy(ortho, 2.0, q, scale, budget,
                                               rng::derive(seed, 500 + ++stream), rhs_opts);
            rhs += term.upper;
            tc.terms.push_back({scale, term.upper, term.flagged});
            if (s > 64) break;
        }
        if (eps_theta < diam2q) {
            EntropyEstimate tail = pack_greedy(ortho, 2.0, q, eps_theta, budget,
                                               rng::derive(seed, 900 + ++stream), rhs_opts);
            rhs += tail.upper;
            tc.terms.push_back({eps_theta, tail.upper, tail.flagged});
        }
        tc.rhs_bits = rhs;
        tc.passed = tc.lhs_bits <= tc.rhs_bits + 2.0 + 1e-9;
        rep.passed = rep.passed && tc.passed;
        rep.cases.push_back(std::move(tc));
    }
    return rep;
}

ScalingReport check_scaling_thm41(const std::vector<Subspace>& family, double p,
                                  double q, std::uint64_t seed, long budget) {
    if (family.empty()) throw std::invalid_argument("check_scaling_thm41: empty family");
    if (!(p >= 1.0 && p <= 2.0))
        throw std::invalid_argument("check_scaling_thm41: need 1 <= p <= 2");
    const double invq = std::isinf(q) ? 0.0 : 1.0 / q;
    const double beta = 1.0 / p - invq;

    std::vector<Subspace> sorted = family;
    std::sort(sorted.begin(), sorted.end(), [](const Subspace& x, const Subspace& y) {
        return x.dimension() < y.dimension();
    });

    ScalingReport rep;
    rep.p = p;
    rep.q = q;
    rep.beta = beta;
    std::vector<double> member_max;
    int stream = 0;
    for (const auto& member : sorted) {
        const int n = member.dimension();
        if (n > 12)
            throw std::invalid_argument("check_scaling_thm41: member dimension exceeds 12");
        SpectralProfile prof = christoffel(member);
        rep.k1_values.push_back(prof.K1);
        rep.k2_values.push_back(prof.K2);
        double normalizer_base = prof.K1 * prof.K2 * prof.K2 * std::log2(std::max(2, n));
        double local_max = 0.0;
        for (int k : {1, (n + 3) / 4, (n + 1) / 2, n}) {
            k = std::max(1, std::min(k, n));
            EntropyEstimate est =
                entropy_number(member, p, q, k, budget, rng::derive(seed, 1000 + ++stream));
            ScalingEntry entry;
            entry.N = n;
            entry.k = k;
            entry.eps_upper = est.upper;
            double denom = std::pow(normalizer_base, beta) *
                           std::pow(static_cast<double>(n) / k, beta);
            entry.normalized = denom > 0.0 ? est.upper / denom : 0.0;
            local_max = std::max(local_max, entry.normalized);
            rep.entries.push_back(entry);
        }
        member_max.push_back(local_max);
    }
    rep.S0 = 2.0 * member_max.front();
    rep.passed = true;
    for (const auto& e : rep.entries)
        if (e.normalized > rep.S0 + 1e-9) rep.passed = false;
    for (size_t i = 1; i < member_max.size(); ++i)
        if (member_max[i] >= 2.0 * member_max[i - 1]) rep.growth_flag = true;
    return rep;
}

NikolskiiEntropyReport check_nikolskii_from_entropy(const Subspace& sub, double p,
                                                    std::uint64_t seed, long budget) {
    const int n = sub.dimension();
    EntropyEstimate eps1 = entropy_number(sub, p, std::numeric_limits<double>::infinity(),
                                          1, budget, seed);
    NikolskiiEntropyReport rep;
    rep.eps1_lower = eps1.lower;
    rep.eps1_upper = eps1.upper;
    rep.nikolskii =
        n == 1 ? detail::max_norm_ratio(sub.orthonormal ? sub : orthonormalize(sub),
                                        std::numeric_limits<double>::infinity(), p, 8, seed)
               : nikolskii_constant(sub, p, std::numeric_limits<double>::infinity());
    rep.B = eps1.upper / std::pow(static_cast<double>(n), 1.0 / p);
    rep.bound = 4.0 * rep.B * std::pow(static_cast<double>(n), 1.0 / p);
    rep.slack = 4.0 * (eps1.upper - eps1.lower);
    rep.passed = rep.nikolskii <= rep.bound + rep.slack + 1e-9;
    return rep;
}

}  // namespace marcz
