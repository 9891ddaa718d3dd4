#include "marcz/sparsify.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace marcz {

double bss_ratio_bound(double b) {
    if (!(b > 1.0)) throw std::invalid_argument("bss_ratio_bound: need b > 1");
    double rb = std::sqrt(b);
    return (b + 1.0 + 2.0 * rb) / (b + 1.0 - 2.0 * rb);
}

SamplePlan bss_select(const Subspace& sub, double b, const SamplePlan* start_plan,
                      BssTrace* trace, bool allow_large_b) {
    if (!(b > 1.0) || (!allow_large_b && b > 4.0))
        throw std::invalid_argument("bss_select: need b in (1, 4] (or allow_large_b)");
    if (!sub.orthonormal)
        throw std::invalid_argument("bss_select: subspace must be orthonormal");
    const int n = sub.dimension();

    // Candidate vectors v_j = sqrt(mass_j) * basis row.
    std::vector<int> atoms;
    std::vector<double> mass;
    if (start_plan) {
        for (int i = 0; i < start_plan->size(); ++i) {
            atoms.push_back(start_plan->indices[i]);
            mass.push_back(start_plan->weights[i]);
        }
    } else {
        for (int j = 0; j < sub.atoms(); ++j) {
            if (sub.space.weights[j] > 0.0) {
                atoms.push_back(j);
                mass.push_back(sub.space.weights[j]);
            }
        }
    }
    const int m = static_cast<int>(atoms.size());
    if (m == 0) throw std::invalid_argument("bss_select: empty candidate set");
    Eigen::MatrixXd v(m, n);
    for (int i = 0; i < m; ++i)
        v.row(i) = std::sqrt(mass[i]) * sub.values.row(atoms[i]);
    Eigen::MatrixXd ident_check = v.transpose() * v;
    if ((ident_check - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("bss_select: candidate decomposition of identity violated");

    // Standard two-barrier schedule for oversampling b.
    const double rb = std::sqrt(b);
    const double eps_l = 1.0 / rb;
    const double eps_u = (rb - 1.0) / (b + rb);
    const double delta_l = 1.0;
    const double delta_u = (rb + 1.0) / (rb - 1.0);
    const int steps = static_cast<int>(std::ceil(b * n));

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    double u_bar = n / eps_u;
    double l_bar = -n / eps_l;
    std::vector<double> picked(m, 0.0);

    for (int step = 0; step < steps; ++step) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const Eigen::VectorXd& lam = es.eigenvalues();
        const double u_next = u_bar + delta_u;
        const double l_next = l_bar + delta_l;

        double phi_u = 0.0, phi_u_next = 0.0, phi_l = 0.0, phi_l_next = 0.0;
        for (int k = 0; k < n; ++k) {
            phi_u += 1.0 / (u_bar - lam[k]);
            phi_u_next += 1.0 / (u_next - lam[k]);
            phi_l += 1.0 / (lam[k] - l_bar);
            phi_l_next += 1.0 / (lam[k] - l_next);
        }
        const double du = phi_u - phi_u_next;   // > 0
        const double dl = phi_l_next - phi_l;   // > 0

        Eigen::MatrixXd vq = v * es.eigenvectors();  // m x n
        Eigen::ArrayXd inv_u = (u_next - lam.array()).inverse();
        Eigen::ArrayXd inv_l = (lam.array() - l_next).inverse();
        Eigen::VectorXd uq1 = (vq.array().square().rowwise() * inv_u.transpose()).rowwise().sum();
        Eigen::VectorXd uq2 =
            (vq.array().square().rowwise() * inv_u.square().transpose()).rowwise().sum();
        Eigen::VectorXd lq1 = (vq.array().square().rowwise() * inv_l.transpose()).rowwise().sum();
        Eigen::VectorXd lq2 =
            (vq.array().square().rowwise() * inv_l.square().transpose()).rowwise().sum();

        int best = -1;
        double best_gap = -1e-12;
        double best_bound_u = 0.0, best_bound_l = 0.0;
        for (int i = 0; i < m; ++i) {
            if (v.row(i).squaredNorm() < 1e-30) continue;
            double upper = uq2[i] / du + uq1[i];
            double lower = lq2[i] / dl - lq1[i];
            double gap = lower - upper;
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
                best_bound_u = upper;
                best_bound_l = lower;
            }
        }
        if (best < 0)
            throw std::runtime_error("bss_select: no admissible candidate (identity breach)");

        double t = 2.0 / (best_bound_u + best_bound_l);
        a.noalias() += t * v.row(best).transpose() * v.row(best);
        picked[best] += t;
        u_bar = u_next;
        l_bar = l_next;

        if (trace) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> post(a);
            BarrierStep rec;
            rec.step = step;
            rec.chosen = best;
            rec.t = t;
            rec.l_bar = l_bar;
            rec.u_bar = u_bar;
            rec.lambda_min = post.eigenvalues().minCoeff();
            rec.lambda_max = post.eigenvalues().maxCoeff();
            trace->push_back(rec);
        }
    }

    // Merge repeated picks by atom, then rescale so that C1 = 1 exactly.
    std::map<int, double> merged;
    for (int i = 0; i < m; ++i)
        if (picked[i] > 0.0) merged[atoms[i]] += picked[i] * mass[i];

    SamplePlan plan;
    plan.p = 2.0;
    plan.provenance = "bss";
    plan.indices.reserve(merged.size());
    std::vector<double> w;
    for (const auto& [atom, weight] : merged) {
        plan.indices.push_back(atom);
        w.push_back(weight);
    }
    plan.weights = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());

    Certificate cert = certify_exact_l2(sub, plan);
    if (cert.C1 <= 0.0) throw std::runtime_error("bss_select: degenerate output");
    plan.weights /= cert.C1;
    return plan;
}

}  // namespace marcz
