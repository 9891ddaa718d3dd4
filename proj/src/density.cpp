#include "marcz/density.hpp"

#include "marcz/analysis.hpp"
#include "marcz/rng.hpp"
#include "marcz/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace marcz {

namespace {

/// phi = u G^{-1/2} with G = N u^T diag(mu F^{p-2}) u, so that the
/// F^{p-2}-weighted Gram of phi equals I/N exactly.
Eigen::MatrixXd reweighted_basis(const Subspace& ortho, const Eigen::VectorXd& f,
                                 double p) {
    const int m = ortho.atoms();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < m; ++j) {
        double mu = ortho.space.weights[j];
        if (mu > 0.0 && f[j] > 0.0) w[j] = mu * std::pow(f[j], p - 2.0);
    }
    Eigen::MatrixXd g =
        static_cast<double>(ortho.dimension()) *
        (ortho.values.transpose() * w.asDiagonal() * ortho.values);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0.0) || es.eigenvalues().minCoeff() < 1e-14 * lmax)
        throw ConvergenceError("lewis_basis: support collapsed below the dimension");
    Eigen::MatrixXd inv_sqrt =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    return ortho.values * inv_sqrt;
}

}  // namespace

LewisBasis lewis_basis(const Subspace& sub, double p, double tol, int max_iter,
                       const Eigen::VectorXd* init) {
    if (!(p >= 1.0 && p <= 2.0))
        throw std::invalid_argument("lewis_basis: need 1 <= p <= 2");
    if (!(tol > 0.0) || max_iter < 1)
        throw std::invalid_argument("lewis_basis: bad tolerance or iteration budget");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int m = ortho.atoms();

    Eigen::VectorXd f;
    if (init) {
        if (init->size() != m) throw std::invalid_argument("lewis_basis: bad init size");
        f = init->cwiseAbs();
    } else {
        f = ortho.values.rowwise().norm();  // Christoffel start
    }
    // Atoms where every basis function vanishes stay off the support.
    Eigen::VectorXd row_norms = ortho.values.rowwise().norm();
    for (int j = 0; j < m; ++j)
        if (row_norms[j] <= 0.0 || ortho.space.weights[j] <= 0.0) f[j] = 0.0;
    double nrm = lp_norm(ortho.space, f, p);
    if (!(nrm > 0.0)) throw std::invalid_argument("lewis_basis: zero initial density");
    f /= nrm;

    LewisBasis out;
    out.p = p;
    std::vector<double> history;
    bool averaging = false;

    for (int it = 1; it <= max_iter; ++it) {
        Eigen::MatrixXd phi = reweighted_basis(ortho, f, p);
        Eigen::VectorXd f_next = phi.rowwise().norm();
        for (int j = 0; j < m; ++j)
            if (ortho.space.weights[j] <= 0.0) f_next[j] = 0.0;
        f_next /= lp_norm(ortho.space, f_next, p);

        double residual = 0.0;
        for (int j = 0; j < m; ++j) {
            if (f[j] > 0.0 && ortho.space.weights[j] > 0.0)
                residual = std::max(residual, std::abs(f_next[j] / f[j] - 1.0));
        }
        history.push_back(residual);
        if (!averaging && history.size() >= 10 &&
            residual >= history[history.size() - 10]) {
            averaging = true;  // oscillation safeguard
            out.damped = true;
        }
        if (averaging && residual >= tol) {
            f_next = 0.5 * (f + f_next);
            f_next /= lp_norm(ortho.space, f_next, p);
        }
        f = f_next;
        out.iterations = it;
        out.residual = residual;
        if (residual < tol) break;
        if (it == max_iter)
            throw ConvergenceError("lewis_basis: no convergence in " +
                                   std::to_string(max_iter) +
                                   " iterations, residual " + std::to_string(residual));
    }

    // One more reweighting against the converged F makes the weighted Gram
    // identity exact for the stored pair.
    out.phi = reweighted_basis(ortho, f, p);
    out.F = f;
    return out;
}

std::pair<DiscreteSpace, Subspace> change_of_density(const Subspace& sub,
                                                     const LewisBasis& lewis) {
    const int m = sub.atoms();
    const int n = sub.dimension();
    if (lewis.phi.rows() != m || lewis.phi.cols() != n)
        throw std::invalid_argument("change_of_density: basis shape mismatch");
    const double p = lewis.p;

    Eigen::VectorXd nu(m);
    for (int j = 0; j < m; ++j)
        nu[j] = lewis.F[j] > 0.0 ? sub.space.weights[j] * std::pow(lewis.F[j], p) : 0.0;
    double total = nu.sum();
    if (std::abs(total - 1.0) > 1e-9)
        throw std::runtime_error("change_of_density: F^p d(mu) is not a probability measure");
    nu /= total;

    // Off the support every function of the subspace vanishes.
    for (int j = 0; j < m; ++j) {
        if (sub.space.weights[j] > 0.0 && lewis.F[j] <= 0.0 &&
            sub.values.row(j).cwiseAbs().maxCoeff() > 1e-12)
            throw std::runtime_error("change_of_density: F = 0 at an atom carrying the subspace");
    }

    DiscreteSpace space_nu;
    space_nu.weights = nu;
    space_nu.coords = sub.space.coords;
    space_nu.label = sub.space.label + "+density";

    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(m, n);
    const double root_n = std::sqrt(static_cast<double>(n));
    for (int j = 0; j < m; ++j)
        if (lewis.F[j] > 0.0) psi.row(j) = (root_n / lewis.F[j]) * lewis.phi.row(j);

    Subspace transformed;
    transformed.space = space_nu;
    transformed.values = psi;
    transformed.orthonormal = true;

    // Transformed Christoffel is identically sqrt(N) on the support.
    for (int j = 0; j < m; ++j) {
        if (nu[j] <= 0.0) continue;
        double wsq = psi.row(j).squaredNorm();
        if (std::abs(wsq - n) > 1e-6 * n)
            throw std::runtime_error("change_of_density: transformed Christoffel is not flat");
    }

    // Norm isometry ||f/F||_{p,nu} = ||f||_{p,mu} on random functions.
    rng::Engine eng(rng::derive(0xD0, m * 131 + n));
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd c = eng.gaussian(n);
        Eigen::VectorXd v = sub.values * c;
        Eigen::VectorXd uv = Eigen::VectorXd::Zero(m);
        for (int j = 0; j < m; ++j)
            if (lewis.F[j] > 0.0) uv[j] = v[j] / lewis.F[j];
        double a = lp_norm(space_nu, uv, p);
        double b = lp_norm(sub.space, v, p);
        if (std::abs(a - b) > 1e-9 * std::max(1.0, b))
            throw std::runtime_error("change_of_density: norm isometry violated");
    }

    return {std::move(space_nu), std::move(transformed)};
}

WeightedResult weighted_discretize_lp(const Subspace& sub, double p, double eps,
                                      std::uint64_t seed, const TwoStageConfig& cfg) {
    if (!(p >= 1.0 && p <= 2.0))
        throw std::invalid_argument("weighted_discretize_lp: need 1 <= p <= 2");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    LewisBasis lewis = lewis_basis(ortho, p);
    auto [space_nu, psi] = change_of_density(ortho, lewis);

    TwoStageResult inner = two_stage_discretize(psi, p, eps, seed, cfg);
    const int m = inner.plan.size();

    WeightedResult result;
    result.F = lewis.F;
    result.plan.indices = inner.plan.indices;
    result.plan.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        double fv = lewis.F[inner.plan.indices[i]];
        result.plan.weights[i] = 1.0 / (m * std::pow(fv, p));
    }
    result.plan.p = p;
    result.plan.provenance = "weighted";
    result.accepted = inner.accepted;

    result.certificate =
        (p == 2.0) ? certify_exact_l2(ortho, result.plan)
                   : certify_heuristic_lp(ortho, result.plan, cfg.heuristic_restarts,
                                          rng::derive(seed, 77));
    result.certificate.detail["stage1_size"] = inner.stage1_size;
    result.certificate.detail["attempts"] = inner.attempts;
    result.certificate.detail["transformed_C1"] = inner.certificate.C1;
    result.certificate.detail["transformed_C2"] = inner.certificate.C2;
    return result;
}

WeightedResult weighted_discretize_l2(const Subspace& sub, double b, std::uint64_t seed) {
    if (!(b > 1.0 && b <= 2.0))
        throw std::invalid_argument("weighted_discretize_l2: need b in (1, 2]");
    Subspace ortho = sub.orthonormal ? sub : orthonormalize(sub);
    const int n = ortho.dimension();
    LewisBasis lewis = lewis_basis(ortho, 2.0);
    auto [space_nu, psi] = change_of_density(ortho, lewis);

    // Random oversampling on the flat-Christoffel side, screened so the
    // intermediate comparison is two-sided with constants [1/2, 3/2].
    const int m0 = n >= 2 ? suggest_m(n, 1.0, 0.5) : 2;
    SamplePlan stage_a;
    Certificate cert_a;
    bool screened = false;
    for (int attempt = 0; attempt < 50 && !screened; ++attempt) {
        stage_a = sample_random(space_nu, m0, rng::derive(seed, 9000 + attempt));
        cert_a = certify_exact_l2(psi, stage_a);
        screened = cert_a.C1 >= 0.5 - 1e-12 && cert_a.C2 <= 1.5 + 1e-12;
    }

    // Subselect on the sampled multiset with the barrier method.
    DiscreteSpace plan_space;
    plan_space.weights = Eigen::VectorXd::Constant(m0, 1.0 / m0);
    plan_space.label = "stage-a";
    Subspace restricted;
    restricted.space = plan_space;
    restricted.values.resize(m0, n);
    for (int i = 0; i < m0; ++i)
        restricted.values.row(i) = psi.row(stage_a.indices[i]);
    Subspace y = orthonormalize(restricted);
    SamplePlan bss_plan = bss_select(y, b);

    // Pull back: positions -> original atoms, weights w / F^2, merged by atom.
    std::map<int, double> merged;
    for (int i = 0; i < bss_plan.size(); ++i) {
        int atom = stage_a.indices[bss_plan.indices[i]];
        double fv = lewis.F[atom];
        merged[atom] += bss_plan.weights[i] / (fv * fv);
    }
    WeightedResult result;
    result.F = lewis.F;
    result.plan.p = 2.0;
    result.plan.provenance = "weighted";
    std::vector<double> w;
    for (const auto& [atom, weight] : merged) {
        result.plan.indices.push_back(atom);
        w.push_back(weight);
    }
    result.plan.weights = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());

    Certificate cert = certify_exact_l2(ortho, result.plan);
    if (cert.C1 <= 0.0) throw std::runtime_error("weighted_discretize_l2: degenerate plan");
    result.plan.weights /= cert.C1;
    result.certificate = certify_exact_l2(ortho, result.plan);
    result.certificate.detail["b"] = b;
    result.certificate.detail["ratio_bound"] = bss_ratio_bound(b);
    result.certificate.detail["stage_a_size"] = m0;
    result.certificate.detail["stage_a_C1"] = cert_a.C1;
    result.certificate.detail["stage_a_C2"] = cert_a.C2;
    result.accepted = screened;
    return result;
}

}  // namespace marcz
