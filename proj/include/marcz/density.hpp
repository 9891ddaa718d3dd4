#pragma once

#include "marcz/discretize.hpp"
#include "marcz/space.hpp"

#include <cstdint>
#include <stdexcept>

namespace marcz {

/// Thrown when a fixed-point or screening loop exhausts its budget.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Basis {phi_j} whose F = (sum_j phi_j^2)^{1/2} has unit L_p norm and whose
/// F^{p-2}-weighted Gram matrix equals I/N.
struct LewisBasis {
    Eigen::MatrixXd phi;  ///< M x N basis values
    Eigen::VectorXd F;    ///< M-vector, ||F||_p = 1
    double p = 2.0;
    double residual = 0.0;  ///< achieved fixed-point residual
    int iterations = 0;
    bool damped = false;  ///< averaging safeguard was triggered
};

struct WeightedResult {
    SamplePlan plan;
    Certificate certificate;  ///< recomputed against the original subspace
    bool accepted = false;
    Eigen::VectorXd F;  ///< density used for the pullback weights
};

/// Fixed-point computation of the Lewis basis for 1 <= p <= 2: reweighted
/// orthonormalization under F^{p-2} d(mu) with Christoffel initialization and
/// a multiplicative convergence test. `init` overrides the starting density
/// (used by uniqueness probes).
LewisBasis lewis_basis(const Subspace& sub, double p, double tol = 1e-10,
                       int max_iter = 500, const Eigen::VectorXd* init = nullptr);

/// Change of density d(nu) = F^p d(mu) together with the transformed
/// subspace spanned by psi_j = sqrt(N) phi_j / F, which is orthonormal in
/// L2(nu) and has constant Christoffel function sqrt(N) on the support
/// (that is, K1 = 1). Atom indexing is preserved; excluded atoms get mass 0.
std::pair<DiscreteSpace, Subspace> change_of_density(const Subspace& sub,
                                                     const LewisBasis& lewis);

/// Weighted discretization for 1 <= p <= 2: run the two-stage pipeline on
/// the density-transformed pair (where K1 = 1) and pull the plan back with
/// weights lambda_nu = (1/m) F(xi_nu)^{-p}.
WeightedResult weighted_discretize_lp(const Subspace& sub, double p, double eps,
                                      std::uint64_t seed, const TwoStageConfig& cfg = {});

/// Weighted L2 discretization to at most ceil(bN) points, b in (1, 2]:
/// density transform, random oversampling screened by the exact certificate,
/// then barrier-method subselection; final weights w_j / F(x_j)^2, rescaled
/// so the exact certificate gives C1 = 1.
WeightedResult weighted_discretize_l2(const Subspace& sub, double b, std::uint64_t seed);

}  // namespace marcz
