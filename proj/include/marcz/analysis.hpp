#pragma once

#include "marcz/space.hpp"

#include <cstdint>

namespace marcz {

/// Pointwise Christoffel data of an orthonormal basis together with the
/// measured uniform-norm constants.
struct SpectralProfile {
    Eigen::VectorXd christoffel;  ///< w(x_j) = sqrt(sum_i u_i(x_j)^2)
    double K1 = 0.0;              ///< max_j w(x_j)^2 / N
    double K2 = 0.0;              ///< measured sup ||f||_inf / ||f||_q, q = q_logN
    int q_logN = 2;               ///< max(2, ceil(log2 N))
};

struct MeanNormEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials = 0;
};

/// Map onto a mu-orthonormal basis of the same span via the symmetric
/// inverse square root of the Gram matrix. Throws when the smallest Gram
/// eigenvalue falls below 1e-10 of the largest.
Subspace orthonormalize(const Subspace& sub);

/// Christoffel function of the subspace. Orthonormalizes internally when
/// needed. Verifies the sup-ratio identity at a few atoms (the maximizer of
/// |f(x)| over the unit L2 ball is c proportional to the basis row at x).
/// with_k2 = false skips the K2 measurement (useful on hot paths).
SpectralProfile christoffel(const Subspace& sub, bool with_k2 = true);

/// Measured sup ||f||_inf / ||f||_q with q = max(2, ceil(log2 N)), by
/// multistart maximization; a lower bound on the true constant.
double k2_constant(const Subspace& sub, int restarts = 64, std::uint64_t seed = 0x5eed);

/// Measured sup ||f||_q / ||f||_p for 1 <= p < q <= inf. Checks the
/// (K1 N)^{1/p - 1/q} bound as a postcondition.
double nikolskii_constant(const Subspace& sub, double p, double q,
                          int restarts = 64, std::uint64_t seed = 0x5eed);

/// Closed form of the q-th moment of a coordinate of a uniform point on
/// S^{N-1}: (Gamma(N/2) Gamma((q+1)/2) / (Gamma(1/2) Gamma((N+q)/2)))^{1/q}.
double sphere_moment(int N, double q);

/// Monte Carlo mean of || sum_j xi_j u_j ||_q over uniform xi on S^{N-1},
/// with per-trial seeds derived from (seed, trial index).
MeanNormEstimate gaussian_mean_norm(const Subspace& sub, double q, int trials,
                                    std::uint64_t seed);

namespace detail {
/// Multistart ascent of log ||B c||_num - log ||B c||_den over coefficients.
/// Atom-row starts make the (p, inf) cases exact on discrete spaces.
double max_norm_ratio(const Subspace& sub, double num, double den, int restarts,
                      std::uint64_t seed);
}  // namespace detail

}  // namespace marcz
