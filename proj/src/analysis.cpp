#include "marcz/analysis.hpp"

#include "marcz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace marcz {

Subspace orthonormalize(const Subspace& sub) {
    sub.space.validate();
    Eigen::MatrixXd g = sub.gram();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    double lmax = es.eigenvalues().maxCoeff();
    if (lmax <= 0.0 || es.eigenvalues().minCoeff() < 1e-10 * lmax)
        throw std::runtime_error("orthonormalize: rank deficient basis");
    Eigen::MatrixXd inv_sqrt =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    Subspace out;
    out.space = sub.space;
    out.values = sub.values * inv_sqrt;
    out.orthonormal = true;
    return out;
}

namespace {

Eigen::VectorXd christoffel_weights(const Subspace& sub) {
    return sub.values.rowwise().norm();
}

/// Gradient of log ||v||_p with respect to the value vector; for p = inf the
/// subgradient concentrates on the achieving atom.
Eigen::VectorXd log_norm_gradient(const DiscreteSpace& space, const Eigen::VectorXd& v,
                                  double p, double norm) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    if (norm <= 0.0) return g;
    if (std::isinf(p)) {
        int best = -1;
        double top = -1.0;
        for (int j = 0; j < v.size(); ++j) {
            if (space.weights[j] <= 0.0) continue;
            double a = std::abs(v[j]);
            if (a > top) {
                top = a;
                best = j;
            }
        }
        if (best >= 0 && top > 0.0)
            g[best] = (v[best] > 0.0 ? 1.0 : -1.0) / norm;
        return g;
    }
    double denom = 0.0;
    for (int j = 0; j < v.size(); ++j) {
        double w = space.weights[j];
        if (w <= 0.0) continue;
        double a = std::abs(v[j]);
        if (a <= 1e-12 * norm) continue;  // subgradient 0 at exact zeros
        double t = w * std::pow(a / norm, p - 1.0);
        g[j] = t * (v[j] > 0.0 ? 1.0 : -1.0);
        denom += w * std::pow(a / norm, p);
    }
    if (denom > 0.0) g /= denom * norm;
    return g;
}

}  // namespace

namespace detail {

double max_norm_ratio(const Subspace& sub, double num, double den, int restarts,
                      std::uint64_t seed) {
    const int n = sub.dimension();
    const int m = sub.atoms();
    const auto& space = sub.space;
    double best = 0.0;

    auto ratio_at = [&](const Eigen::VectorXd& c) {
        Eigen::VectorXd v = sub.values * c;
        double dn = lp_norm(space, v, den);
        if (dn <= 0.0) return 0.0;
        double r = lp_norm(space, v, num) / dn;
        best = std::max(best, r);
        return r;
    };

    // Structured starts: basis axes, the all-ones direction, atom rows.
    for (int i = 0; i < n; ++i) ratio_at(Eigen::VectorXd::Unit(n, i));
    ratio_at(Eigen::VectorXd::Ones(n));
    if (m <= 8192) {
        for (int j = 0; j < m; ++j) {
            if (space.weights[j] <= 0.0) continue;
            Eigen::VectorXd row = sub.values.row(j).transpose();
            if (row.norm() > 0.0) ratio_at(row);
        }
    }

    const int iters = 200;
    for (int r = 0; r < restarts; ++r) {
        rng::Engine eng(rng::derive(seed, 7000 + r));
        Eigen::VectorXd c = eng.sphere(n);
        double step = 0.5;
        double cur = ratio_at(c);
        for (int it = 0; it < iters; ++it) {
            Eigen::VectorXd v = sub.values * c;
            double dn = lp_norm(space, v, den);
            double nn = lp_norm(space, v, num);
            if (dn <= 0.0 || nn <= 0.0) break;
            Eigen::VectorXd grad =
                sub.values.transpose() * (log_norm_gradient(space, v, num, nn) -
                                          log_norm_gradient(space, v, den, dn));
            double gn = grad.norm();
            if (gn < 1e-14) break;
            bool moved = false;
            for (int ls = 0; ls < 20; ++ls) {
                Eigen::VectorXd cand = c + (step / gn) * grad;
                cand /= cand.norm();
                double val = ratio_at(cand);
                if (val > cur * (1.0 + 1e-14)) {
                    c = cand;
                    cur = val;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved || step < 1e-12) break;
        }
    }
    return best;
}

}  // namespace detail

SpectralProfile christoffel(const Subspace& sub, bool with_k2) {
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int n = ortho.dimension();
    SpectralProfile prof;
    prof.christoffel = christoffel_weights(ortho);
    prof.K1 = prof.christoffel.cwiseAbs2().maxCoeff() / static_cast<double>(n);

    // Trace identity sanity: sum_j mu_j w(x_j)^2 = N.
    double trace = (ortho.space.weights.array() * prof.christoffel.array().square()).sum();
    if (std::abs(trace - n) > 1e-6 * std::max(1.0, static_cast<double>(n)))
        throw std::runtime_error("christoffel: trace identity violated");

    // Spot-check the sup-ratio identity at a few atoms: the sup of
    // |f(x)| / ||f||_2 over the unit ball equals w(x), attained at
    // coefficients proportional to the basis row.
    rng::Engine eng(rng::derive(0xC0FFEE, n));
    const int m = ortho.atoms();
    for (int probe = 0; probe < 5; ++probe) {
        int j = static_cast<int>(eng.below(m));
        if (ortho.space.weights[j] <= 0.0) continue;
        double w = prof.christoffel[j];
        for (int t = 0; t < 64; ++t) {
            Eigen::VectorXd c = eng.sphere(n);
            double val = std::abs(ortho.values.row(j).dot(c));
            if (val > w + 1e-6)
                throw std::runtime_error("christoffel: sup-ratio identity violated");
        }
        if (w > 0.0) {
            Eigen::VectorXd c = ortho.values.row(j).transpose() / w;
            if (std::abs(std::abs(ortho.values.row(j).dot(c)) - w) > 1e-6 * std::max(1.0, w))
                throw std::runtime_error("christoffel: maximizer identity violated");
        }
    }

    prof.q_logN = std::max(2, static_cast<int>(std::ceil(std::log2(std::max(2, n)))));
    if (with_k2) {
        prof.K2 = n >= 2 ? k2_constant(ortho)
                         : detail::max_norm_ratio(ortho, std::numeric_limits<double>::infinity(),
                                                  2.0, 4, 0x5eed);
    }
    return prof;
}

double k2_constant(const Subspace& sub, int restarts, std::uint64_t seed) {
    if (sub.dimension() < 2) throw std::invalid_argument("k2_constant: need N >= 2");
    if (restarts < 1) throw std::invalid_argument("k2_constant: restarts must be positive");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    int q = std::max(2, static_cast<int>(std::ceil(std::log2(ortho.dimension()))));
    return detail::max_norm_ratio(ortho, std::numeric_limits<double>::infinity(),
                                  static_cast<double>(q), restarts, seed);
}

double nikolskii_constant(const Subspace& sub, double p, double q, int restarts,
                          std::uint64_t seed) {
    if (!(p >= 1.0) || std::isinf(p))
        throw std::invalid_argument("nikolskii_constant: need 1 <= p < q");
    if (!(q > p)) throw std::invalid_argument("nikolskii_constant: need q > p");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    double measured = detail::max_norm_ratio(ortho, q, p, restarts, seed);
    double k1 = christoffel_weights(ortho).cwiseAbs2().maxCoeff() / ortho.dimension();
    double invq = std::isinf(q) ? 0.0 : 1.0 / q;
    double bound = std::pow(k1 * ortho.dimension(), 1.0 / p - invq);
    if (measured > bound + 1e-6)
        throw std::runtime_error("nikolskii_constant: measured ratio exceeds (K1 N)^{1/p-1/q}");
    return measured;
}

double sphere_moment(int N, double q) {
    if (N < 1) throw std::invalid_argument("sphere_moment: N must be positive");
    if (!(q >= 1.0)) throw std::invalid_argument("sphere_moment: q must be >= 1");
    double lg = std::lgamma(N / 2.0) + std::lgamma((q + 1.0) / 2.0) -
                std::lgamma(0.5) - std::lgamma((N + q) / 2.0);
    return std::exp(lg / q);
}

MeanNormEstimate gaussian_mean_norm(const Subspace& sub, double q, int trials,
                                    std::uint64_t seed) {
    if (!sub.orthonormal)
        throw std::invalid_argument("gaussian_mean_norm: subspace must be orthonormal");
    if (std::isinf(q) || !(q >= 1.0))
        throw std::invalid_argument("gaussian_mean_norm: q must be finite and >= 1");
    if (trials < 100) throw std::invalid_argument("gaussian_mean_norm: need trials >= 100");
    const int n = sub.dimension();
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        rng::Engine eng(rng::derive(seed, t));
        Eigen::VectorXd xi = eng.sphere(n);
        double v = lp_norm(sub.space, sub.values * xi, q);
        sum += v;
        sumsq += v * v;
    }
    MeanNormEstimate est;
    est.trials = trials;
    est.mean = sum / trials;
    double var = std::max(0.0, sumsq / trials - est.mean * est.mean);
    est.stderr_ = std::sqrt(var / trials);
    return est;
}

}  // namespace marcz
