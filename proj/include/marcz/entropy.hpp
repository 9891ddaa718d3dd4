#pragma once

#include "marcz/space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace marcz {

/// Estimate of a covering/packing entropy H (bits) at a scale, or of an
/// entropy number eps_k (a scale) at an index k. `lower` is rigorous in the
/// packing direction; `upper` is conditional on maximality of the greedy
/// separated set, which is probed by the rejection budget and flagged.
struct EntropyEstimate {
    double p = 2.0;  ///< ball exponent
    double q = 2.0;  ///< metric exponent
    double eps = 0.0;
    int k = 0;
    double lower = 0.0;
    double upper = 0.0;
    std::string method = "greedy-packing";
    long budget = 0;
    int count = 0;  ///< separated-set size behind an H estimate
    bool maximality_probed = false;
    bool flagged = false;  ///< saturated set cap or exhausted bisection budget
};

struct PackOptions {
    int set_cap = 8192;       ///< hard cap on the separated-set size
    int lattice_cap = 100000; ///< max enumerated lattice candidates
};

/// Greedy maximal eps-separated set in the unit L_p ball of the subspace
/// under the L_q metric: deterministic axis/lattice seeds, then `budget`
/// random ball candidates by rejection. log2(count) estimates H_eps from
/// both sides (upper conditional on maximality).
EntropyEstimate pack_greedy(const Subspace& sub, double p, double q, double eps,
                            long budget, std::uint64_t seed, const PackOptions& opts = {});

/// Bracketing [lower, upper] for eps_k = inf { eps : H_eps <= k } by
/// geometric bisection over pack_greedy estimates, relative gap <= 10%.
EntropyEstimate entropy_number(const Subspace& sub, double p, double q, int k,
                               long budget, std::uint64_t seed,
                               const PackOptions& opts = {});

/// log2 of the volume-ratio expression pi^{(N-1)/2} Gamma((N+1)/2) / (2 eps)^N
/// times 2^N ... i.e. a rigorous lower bound on the entropy of the Euclidean
/// ball in the l1-metric at scale 2 eps.
double volumetric_lower_bound(int N, double eps);

struct SandwichReport {
    int N = 0;
    double p = 2.0;
    double eps = 0.0;
    double estimate_bits = 0.0;
    double lower_band = 0.0;  ///< N log2(1/eps) - 1
    double upper_band = 0.0;  ///< N log2(1 + 2/eps)
    int count = 0;
    bool passed = false;
};

/// Packs the coefficient unit p-ball in its own norm and checks the estimate
/// against the volumetric sandwich for ball entropies.
SandwichReport check_ball_entropy_sandwich(int N, double p, double eps, long budget,
                                           std::uint64_t seed);

struct TransferTerm {
    double scale = 0.0;
    double bits = 0.0;
    bool saturated = false;
};

struct TransferCase {
    double eps = 0.0;
    double lhs_bits = 0.0;
    double rhs_bits = 0.0;
    bool lhs_saturated = false;
    std::vector<TransferTerm> terms;
    bool passed = false;
};

struct TransferReport {
    double p = 1.0, q = 0.0, theta = 0.0, a = 0.0;
    std::vector<TransferCase> cases;
    bool passed = false;
};

/// Empirical check of the entropy transfer chain: the packing estimate of
/// H_eps(X^p, L_q) against the truncated sum of H estimates on X^2 at scales
/// 2^{-3} a^{s-1} eps^theta plus the H estimate at eps^theta, with two bits
/// of slack.
TransferReport check_transfer_inequality(const Subspace& sub, double p, double q,
                                         const std::vector<double>& eps_list,
                                         long budget, std::uint64_t seed);

struct ScalingEntry {
    int N = 0;
    int k = 0;
    double eps_upper = 0.0;
    double normalized = 0.0;  ///< eps_upper / ((K1 K2^2 log2 N)^beta (N/k)^beta)
};

struct ScalingReport {
    double p = 2.0, q = 0.0, beta = 0.0;
    double S0 = 0.0;  ///< 2x the max normalized value of the smallest member
    std::vector<ScalingEntry> entries;
    std::vector<double> k1_values, k2_values;
    bool passed = false;
    bool growth_flag = false;  ///< normalized max doubled across the family
};

/// Boundedness of the normalized entropy numbers across a family of
/// subspaces: s(N, k) = eps_k-upper / ((K1 K2^2 log2 N)^beta (N/k)^beta)
/// stays below a single family-wide constant fixed by the smallest member.
ScalingReport check_scaling_thm41(const std::vector<Subspace>& family, double p,
                                  double q, std::uint64_t seed, long budget = 20000);

struct NikolskiiEntropyReport {
    double nikolskii = 0.0;
    double eps1_lower = 0.0, eps1_upper = 0.0;
    double B = 0.0;
    double bound = 0.0;  ///< 4 B N^{1/p}
    double slack = 0.0;  ///< from the eps_1 bracket width
    bool passed = false;
};

/// Reads the k = 1 entropy number back into the Nikolskii direction:
/// measured sup ||f||_inf / ||f||_p must not exceed 4 B N^{1/p} with
/// B = eps_1-upper / N^{1/p}.
NikolskiiEntropyReport check_nikolskii_from_entropy(const Subspace& sub, double p,
                                                    std::uint64_t seed,
                                                    long budget = 20000);

}  // namespace marcz
