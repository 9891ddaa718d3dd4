#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace marcz {

/// Finite probability space (Omega_M, mu). Every L_p norm in this library is
/// an exact weighted sum over the atoms, so there is no quadrature error
/// anywhere downstream.
struct DiscreteSpace {
    Eigen::VectorXd weights;                ///< probability masses, sum to 1
    std::optional<Eigen::MatrixXd> coords;  ///< M x d point coordinates (grid-backed spaces)
    std::string label;

    int size() const { return static_cast<int>(weights.size()); }
    int dim() const { return coords ? static_cast<int>(coords->cols()) : 0; }

    /// Enforce: weights nonnegative, sum to 1 within 1e-12.
    void validate() const;
};

/// Finite frequency set Q in Z^d.
struct IndexSet {
    int dim = 1;
    std::vector<std::vector<int>> freqs;  ///< sorted, duplicate-free

    int size() const { return static_cast<int>(freqs.size()); }
};

/// N-dimensional function space given by its basis values on the atoms
/// (column i = basis function i evaluated on Omega_M).
struct Subspace {
    DiscreteSpace space;
    Eigen::MatrixXd values;  ///< M x N
    bool orthonormal = false;

    int dimension() const { return static_cast<int>(values.cols()); }
    int atoms() const { return static_cast<int>(values.rows()); }

    /// mu-weighted Gram matrix of the basis columns.
    Eigen::MatrixXd gram() const;

    /// Enforce: full numerical rank (relative 1e-10) and, when the flag is
    /// set, Gram = identity within 1e-8 entrywise.
    void validate() const;
};

/// Coordinates of a function in the subspace's current basis.
using FunctionVec = Eigen::VectorXd;

/// Equispaced grid on [0, 2pi)^d with uniform masses. M = points_per_axis^d.
DiscreteSpace make_uniform_torus(int d, int points_per_axis,
                                 std::int64_t max_atoms = 10'000'000);

/// Step hyperbolic cross Q_n: union over ||s||_1 <= n of the dyadic blocks
/// { k : floor(2^{s_j-1}) <= |k_j| < 2^{s_j} }.
IndexSet hyperbolic_cross(int d, int n);

/// Full one-dimensional range {-kmax, ..., kmax}.
IndexSet frequency_range(int kmax);

/// Real trigonometric system on a torus grid: constant for k = 0, and
/// sqrt(2) cos(k.x), sqrt(2) sin(k.x) with one representative per antipodal
/// pair {k, -k}. Exactly orthonormal when the grid resolves all frequency
/// differences; throws when the grid aliases the system to rank deficiency.
Subspace build_trig(const DiscreteSpace& space, const IndexSet& Q);

/// The 2^N sign-pattern realization of the first N Rademacher functions:
/// M = 2^N equal-mass atoms, column k = k-th bit sign pattern.
std::pair<DiscreteSpace, Subspace> build_rademacher(int N);

/// Exact L_p(mu) norm of a value vector; p = infinity takes the max over
/// atoms with positive mass.
double lp_norm(const DiscreteSpace& space, const Eigen::VectorXd& values, double p);

/// Pointwise values B * coeffs.
Eigen::VectorXd evaluate(const Subspace& sub, const FunctionVec& coeffs);

/// Restriction to the leading n basis columns.
Subspace leading_columns(const Subspace& sub, int n);

/// Uniform space with one heavy atom (atom 0 carries spike_mass).
DiscreteSpace make_spiked_uniform(int M, double spike_mass,
                                  const std::string& label = "spiked");

/// Seeded Gaussian values orthonormalized against the space measure.
Subspace make_random_subspace(const DiscreteSpace& space, int N, std::uint64_t seed);

}  // namespace marcz
