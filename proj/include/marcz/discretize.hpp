#pragma once

#include "marcz/space.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace marcz {

/// Point set with nonnegative weights: the object a Marcinkiewicz-type
/// comparison quantifies. Duplicate atoms are kept with multiplicity.
struct SamplePlan {
    std::vector<int> indices;  ///< atom indices into the space
    Eigen::VectorXd weights;   ///< nonnegative; equal-weight plans use 1/m exactly
    double p = 2.0;            ///< norm exponent targeted
    std::string provenance;    ///< random | bss | two-stage | full-grid | weighted

    int size() const { return static_cast<int>(indices.size()); }
};

/// Two-sided constants for a plan at a given p, with method provenance.
/// C1 and C2 bound the ratio  sum_nu lambda_nu |f(xi_nu)|^p / ||f||_p^p.
struct Certificate {
    double p = 2.0;
    double C1 = 0.0;
    double C2 = 0.0;
    std::string method;  ///< exact-eigen | net-rigorous | heuristic
    std::map<std::string, double> detail;

    double ratio() const { return C1 > 0.0 ? C2 / C1 : std::numeric_limits<double>::infinity(); }
};

struct ConcentrationReport {
    double empirical_rate = 0.0;
    double bound = 0.0;    ///< 2 exp(-m eps^2 / (4 M1 Minf))
    double M1 = 0.0;       ///< mean absolute deviation of |f|^p
    double Minf = 0.0;     ///< sup deviation of |f|^p
    double stderr_ = 0.0;  ///< binomial standard error of the empirical rate
    int m = 0;
    int trials = 0;
    double eps = 0.0;
    double p = 1.0;
    bool passed = false;
};

struct TwoStageConfig {
    double C = 8.0;           ///< stage-1 oversampling constant
    double Cp = 8.0;          ///< stage-2 target-size constant
    int max_attempts = 200;   ///< screened subselection budget
    int heuristic_restarts = 10;
};

struct TwoStageResult {
    SamplePlan plan;
    Certificate certificate;
    bool accepted = false;  ///< certificate within [1-eps, 1+eps]
    int attempts = 0;
    int stage1_size = 0;
    double alpha = 0.0;  ///< ln K1 / ln N, recorded for the K1-growth caveat
};

/// m i.i.d. draws from mu (with replacement), equal weights 1/m.
/// Deterministic given the seed.
SamplePlan sample_random(const DiscreteSpace& space, int m, std::uint64_t seed);

/// Degenerate plan with every positive-mass atom at its own mass; certifies
/// C1 = C2 = 1 at every p.
SamplePlan full_grid_plan(const DiscreteSpace& space, double p);

/// ceil(C K1 eps^{-2} N ln N): the sample-size regime in which random
/// equal-weight points discretize the L2 norm of an orthonormal system.
int suggest_m(int N, double K1, double eps, double C = 8.0);

/// Tightest constants at p = 2, exactly: the extreme eigenvalues of
/// G = sum_nu lambda_nu u(xi_nu) u(xi_nu)^T in an orthonormal basis.
Certificate certify_exact_l2(const Subspace& sub, const SamplePlan& plan);

/// Projected-gradient multistart search for the extreme ratios at general p.
/// The returned C1 is an upper bound on the true C1 and C2 a lower bound on
/// the true C2 (extremes actually found).
Certificate certify_heuristic_lp(const Subspace& sub, const SamplePlan& plan,
                                 int restarts, std::uint64_t seed);

/// Net-transfer constants: given two-sided constants (c1, c2) on an eps-net
/// of the unit ball, bounds valid on the whole space.
std::pair<double, double> net_transfer(double c1, double c2, double eps);

/// Certificate from ratio extremes over a maximal net_radius-separated set of
/// the unit L_p ball, transferred to the whole ball. Rigor is conditional on
/// net maximality, which is probed with rejection candidates and logged.
Certificate certify_via_net(const Subspace& sub, const SamplePlan& plan,
                            double net_radius, std::uint64_t seed,
                            int pool = 4096, int probe_budget = 100000);

/// Empirical check of the Bernstein-type tail bound for the deviation of the
/// empirical p-th moment of f at random points. Requires ||f||_p = 1.
ConcentrationReport verify_concentration(const Subspace& sub, const FunctionVec& f,
                                         double p, int m, double eps, int trials,
                                         std::uint64_t seed);

/// Oversample-then-subselect pipeline: stage 1 draws
/// ceil(C K1 eps^{-2} N^2 ln N) points, stage 2 screens random equal-weight
/// subsets of size ceil(Cp K1 N (ln N)^3) until the certificate lies in
/// [1-eps, 1+eps]. For p = 2 screening is exact, otherwise heuristic.
TwoStageResult two_stage_discretize(const Subspace& sub, double p, double eps,
                                    std::uint64_t seed, const TwoStageConfig& cfg = {});

}  // namespace marcz
