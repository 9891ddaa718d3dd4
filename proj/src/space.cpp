#include "marcz/space.hpp"

#include "marcz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace marcz {

void DiscreteSpace::validate() const {
    if (weights.size() == 0) throw std::invalid_argument("DiscreteSpace: empty");
    if ((weights.array() < 0.0).any())
        throw std::invalid_argument("DiscreteSpace: negative mass");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteSpace: masses do not sum to 1");
    if (coords && coords->rows() != weights.size())
        throw std::invalid_argument("DiscreteSpace: coords/weights size mismatch");
}

Eigen::MatrixXd Subspace::gram() const {
    return values.transpose() * space.weights.asDiagonal() * values;
}

void Subspace::validate() const {
    space.validate();
    if (values.rows() != space.size())
        throw std::invalid_argument("Subspace: values/space size mismatch");
    if (values.cols() < 1) throw std::invalid_argument("Subspace: empty basis");
    Eigen::MatrixXd g = gram();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    double lmax = es.eigenvalues().maxCoeff();
    if (lmax <= 0.0 || es.eigenvalues().minCoeff() < 1e-10 * lmax)
        throw std::invalid_argument("Subspace: rank deficient under the measure");
    if (orthonormal) {
        double dev = (g - Eigen::MatrixXd::Identity(g.rows(), g.cols()))
                         .cwiseAbs()
                         .maxCoeff();
        if (dev > 1e-8)
            throw std::invalid_argument("Subspace: orthonormal flag set but Gram != I");
    }
}

DiscreteSpace make_uniform_torus(int d, int points_per_axis, std::int64_t max_atoms) {
    if (d < 1) throw std::invalid_argument("make_uniform_torus: d must be positive");
    if (points_per_axis < 1)
        throw std::invalid_argument("make_uniform_torus: points_per_axis must be positive");
    std::int64_t m = 1;
    for (int i = 0; i < d; ++i) {
        if (m > max_atoms / points_per_axis)
            throw std::invalid_argument("make_uniform_torus: atom count exceeds maximum");
        m *= points_per_axis;
    }
    DiscreteSpace s;
    s.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    Eigen::MatrixXd coords(m, d);
    const double step = 2.0 * M_PI / points_per_axis;
    for (std::int64_t j = 0; j < m; ++j) {
        std::int64_t rem = j;
        for (int axis = d - 1; axis >= 0; --axis) {
            coords(j, axis) = step * static_cast<double>(rem % points_per_axis);
            rem /= points_per_axis;
        }
    }
    s.coords = std::move(coords);
    s.label = "torus_d" + std::to_string(d) + "_m" + std::to_string(points_per_axis);
    return s;
}

namespace {

void enumerate_block(const std::vector<int>& s, int axis, std::vector<int>& k,
                     std::set<std::vector<int>>& out) {
    if (axis == static_cast<int>(s.size())) {
        out.insert(k);
        return;
    }
    int lo = s[axis] == 0 ? 0 : (1 << (s[axis] - 1));
    int hi = (1 << s[axis]) - 1;  // inclusive
    for (int a = lo; a <= hi; ++a) {
        k[axis] = a;
        enumerate_block(s, axis + 1, k, out);
        if (a != 0) {
            k[axis] = -a;
            enumerate_block(s, axis + 1, k, out);
        }
    }
}

void enumerate_shells(int d, int budget, std::vector<int>& s, int axis,
                      std::set<std::vector<int>>& out) {
    if (axis == d) {
        std::vector<int> k(d, 0);
        enumerate_block(s, 0, k, out);
        return;
    }
    for (int v = 0; v <= budget; ++v) {
        s[axis] = v;
        enumerate_shells(d, budget - v, s, axis + 1, out);
    }
    s[axis] = 0;
}

}  // namespace

IndexSet hyperbolic_cross(int d, int n) {
    if (d < 1) throw std::invalid_argument("hyperbolic_cross: d must be positive");
    if (n < 0) throw std::invalid_argument("hyperbolic_cross: n must be nonnegative");
    std::set<std::vector<int>> out;
    std::vector<int> s(d, 0);
    enumerate_shells(d, n, s, 0, out);
    IndexSet q;
    q.dim = d;
    q.freqs.assign(out.begin(), out.end());
    return q;
}

IndexSet frequency_range(int kmax) {
    if (kmax < 0) throw std::invalid_argument("frequency_range: kmax must be nonnegative");
    IndexSet q;
    q.dim = 1;
    for (int k = -kmax; k <= kmax; ++k) q.freqs.push_back({k});
    return q;
}

Subspace build_trig(const DiscreteSpace& space, const IndexSet& Q) {
    space.validate();
    if (!space.coords)
        throw std::invalid_argument("build_trig: space has no point coordinates");
    if (space.dim() != Q.dim)
        throw std::invalid_argument("build_trig: dimension mismatch between grid and frequencies");
    if (Q.freqs.empty()) throw std::invalid_argument("build_trig: empty frequency set");

    bool has_zero = false;
    std::set<std::vector<int>> reps;  // one representative per antipodal pair
    for (const auto& k : Q.freqs) {
        bool zero = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
        if (zero) {
            has_zero = true;
            continue;
        }
        std::vector<int> neg(k.size());
        for (size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
        reps.insert(std::max(k, neg));
    }

    const int m = space.size();
    const int n = (has_zero ? 1 : 0) + 2 * static_cast<int>(reps.size());
    Eigen::MatrixXd values(m, n);
    int col = 0;
    if (has_zero) {
        values.col(col++).setOnes();
    }
    const double root2 = std::sqrt(2.0);
    for (const auto& k : reps) {
        for (int j = 0; j < m; ++j) {
            double phase = 0.0;
            for (int axis = 0; axis < Q.dim; ++axis)
                phase += k[axis] * (*space.coords)(j, axis);
            values(j, col) = root2 * std::cos(phase);
            values(j, col + 1) = root2 * std::sin(phase);
        }
        col += 2;
    }

    Subspace sub;
    sub.space = space;
    sub.values = std::move(values);
    Eigen::MatrixXd g = sub.gram();
    double dev = (g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (dev <= 1e-10) {
        sub.orthonormal = true;
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        if (es.eigenvalues().minCoeff() < 1e-10 * es.eigenvalues().maxCoeff())
            throw std::invalid_argument("build_trig: grid too coarse, system is rank deficient");
        sub.orthonormal = false;
    }
    sub.space.label += "_trig" + std::to_string(n);
    return sub;
}

std::pair<DiscreteSpace, Subspace> build_rademacher(int N) {
    if (N < 1) throw std::invalid_argument("build_rademacher: N must be positive");
    if (N > 24) throw std::invalid_argument("build_rademacher: N too large (atom count 2^N)");
    const int m = 1 << N;
    DiscreteSpace s;
    s.weights = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    s.label = "rademacher_n" + std::to_string(N);
    Eigen::MatrixXd values(m, N);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < N; ++k)
            values(j, k) = ((j >> (N - 1 - k)) & 1) ? -1.0 : 1.0;
    Subspace sub;
    sub.space = s;
    sub.values = std::move(values);
    sub.orthonormal = true;  // exact: columns are distinct sign patterns
    return {std::move(s), std::move(sub)};
}

double lp_norm(const DiscreteSpace& space, const Eigen::VectorXd& values, double p) {
    if (values.size() != space.weights.size())
        throw std::invalid_argument("lp_norm: size mismatch");
    if (std::isinf(p)) {
        double best = 0.0;
        for (int j = 0; j < values.size(); ++j)
            if (space.weights[j] > 0.0) best = std::max(best, std::abs(values[j]));
        return best;
    }
    if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
    // Factor out the sup to keep large exponents stable.
    double top = 0.0;
    for (int j = 0; j < values.size(); ++j)
        if (space.weights[j] > 0.0) top = std::max(top, std::abs(values[j]));
    if (top == 0.0) return 0.0;
    double acc = 0.0;
    for (int j = 0; j < values.size(); ++j) {
        double w = space.weights[j];
        if (w > 0.0) acc += w * std::pow(std::abs(values[j]) / top, p);
    }
    return top * std::pow(acc, 1.0 / p);
}

Eigen::VectorXd evaluate(const Subspace& sub, const FunctionVec& coeffs) {
    if (coeffs.size() != sub.dimension())
        throw std::invalid_argument("evaluate: coefficient length != subspace dimension");
    return sub.values * coeffs;
}

Subspace leading_columns(const Subspace& sub, int n) {
    if (n < 1 || n > sub.dimension())
        throw std::invalid_argument("leading_columns: bad column count");
    Subspace out;
    out.space = sub.space;
    out.values = sub.values.leftCols(n);
    out.orthonormal = sub.orthonormal;
    return out;
}

DiscreteSpace make_spiked_uniform(int M, double spike_mass, const std::string& label) {
    if (M < 2) throw std::invalid_argument("make_spiked_uniform: need at least 2 atoms");
    if (spike_mass <= 0.0 || spike_mass >= 1.0)
        throw std::invalid_argument("make_spiked_uniform: spike mass must be in (0,1)");
    DiscreteSpace s;
    s.weights = Eigen::VectorXd::Constant(M, (1.0 - spike_mass) / (M - 1));
    s.weights[0] = spike_mass;
    s.label = label;
    return s;
}

Subspace make_random_subspace(const DiscreteSpace& space, int N, std::uint64_t seed) {
    space.validate();
    if (N < 1 || N > space.size())
        throw std::invalid_argument("make_random_subspace: bad dimension");
    rng::Engine eng(rng::derive(seed, 0x5face));
    Eigen::MatrixXd b(space.size(), N);
    for (int j = 0; j < b.rows(); ++j)
        for (int i = 0; i < N; ++i) b(j, i) = eng.normal();
    // Symmetric Gram-eigen map onto a mu-orthonormal basis of the same span.
    Eigen::MatrixXd g = b.transpose() * space.weights.asDiagonal() * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    if (es.eigenvalues().minCoeff() < 1e-10 * es.eigenvalues().maxCoeff())
        throw std::runtime_error("make_random_subspace: degenerate draw");
    Eigen::MatrixXd inv_sqrt =
        es.eigenvectors() *
        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    Subspace sub;
    sub.space = space;
    sub.values = b * inv_sqrt;
    sub.orthonormal = true;
    return sub;
}

}  // namespace marcz
