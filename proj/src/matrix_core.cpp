#include "jordanflow/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace jflow {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::BranchObstruction: return "BranchObstruction";
    case ErrorKind::NotNilpotent: return "NotNilpotent";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::RankAmbiguous: return "RankAmbiguous";
    case ErrorKind::StiffnessSuspected: return "StiffnessSuspected";
    case ErrorKind::NoRealLog: return "NoRealLog";
    }
    return "Unknown";
}

void TolerancePolicy::validate() const {
    const double eps = std::numeric_limits<double>::epsilon();
    if (!(cluster_tol > 0.0) || !(residual_tol > 0.0) || !(sim_tol > 0.0))
        throw Error(ErrorKind::InvalidInput, "tolerances must be strictly positive");
    if (cluster_tol < 100.0 * eps)
        throw Error(ErrorKind::InvalidInput, "cluster_tol must be at least 100 machine epsilons");
}

void require_square_finite(const RealMatrix& A, const char* what) {
    if (A.rows() == 0 || A.rows() != A.cols())
        throw Error(ErrorKind::InvalidInput, std::string(what) + " must be a non-empty square matrix");
    if (A.rows() > kMaxDimension)
        throw Error(ErrorKind::InvalidInput,
                    std::string(what) + " exceeds the supported dimension " + std::to_string(kMaxDimension));
    if (!A.allFinite())
        throw Error(ErrorKind::InvalidInput, std::string(what) + " has non-finite entries");
}

double operator_norm(const RealMatrix& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<RealMatrix> svd(A);
    return svd.singularValues()(0);
}

RealMatrix projection_gram(const SpectralData& spec) {
    const int n = spec.dimension();
    RealMatrix M = RealMatrix::Zero(n, n);
    for (const auto& c : spec.clusters) {
        if (c.conjugate_pair)
            M += 2.0 * (c.complex_projection.adjoint() * c.complex_projection).real();
        else
            M += c.projection.transpose() * c.projection;
    }
    M = 0.5 * (M + M.transpose()).eval();
    M /= std::pow(M.determinant(), 1.0 / static_cast<double>(n));
    return M;
}

int SpectralData::dimension() const {
    int n = 0;
    for (const auto& c : clusters) n += c.real_dimension();
    return n;
}

namespace {

double scale_of(Complex a, Complex b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

// Exchanges the adjacent diagonal entries k, k+1 of the upper triangular T,
// updating the unitary factor so that A = U T U^H keeps holding.
void swap_adjacent(ComplexMatrix& T, ComplexMatrix& U, Eigen::Index k) {
    const Complex a = T(k, k);
    const Complex b = T(k, k + 1);
    const Complex c = T(k + 1, k + 1);
    Complex v0 = b;
    Complex v1 = c - a;
    const double r = std::hypot(std::abs(v0), std::abs(v1));
    if (r == 0.0) return;
    v0 /= r;
    v1 /= r;
    Eigen::Matrix2cd G;
    G << v0, -std::conj(v1), v1, std::conj(v0);
    T.middleRows(k, 2) = (G.adjoint() * T.middleRows(k, 2)).eval();
    T.middleCols(k, 2) = (T.middleCols(k, 2) * G).eval();
    U.middleCols(k, 2) = (U.middleCols(k, 2) * G).eval();
    T(k + 1, k) = 0.0;
}

// Spectral projection onto the invariant subspace of the diagonal entries
// flagged in `member`, via reordering and one triangular Sylvester solve.
ComplexMatrix cluster_projection(ComplexMatrix T, ComplexMatrix U, std::vector<int> member) {
    const Eigen::Index n = T.rows();
    Eigen::Index next = 0;
    for (Eigen::Index p = 0; p < n; ++p) {
        if (!member[p]) continue;
        for (Eigen::Index q = p; q > next; --q) {
            swap_adjacent(T, U, q - 1);
            std::swap(member[q - 1], member[q]);
        }
        ++next;
    }
    const Eigen::Index k = next;
    ComplexMatrix PT = ComplexMatrix::Zero(n, n);
    PT.topLeftCorner(k, k).setIdentity();
    if (k < n) {
        const ComplexMatrix T11 = T.topLeftCorner(k, k);
        const ComplexMatrix T12 = T.topRightCorner(k, n - k);
        const ComplexMatrix T22 = T.bottomRightCorner(n - k, n - k);
        // T11 X - X T22 = -T12, column by column.
        ComplexMatrix X(k, n - k);
        for (Eigen::Index j = 0; j < n - k; ++j) {
            Eigen::VectorXcd rhs = -T12.col(j);
            for (Eigen::Index i = 0; i < j; ++i) rhs += X.col(i) * T22(i, j);
            ComplexMatrix shifted = T11;
            shifted.diagonal().array() -= T22(j, j);
            X.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
        }
        PT.topRightCorner(k, n - k) = -X;
    }
    return U * PT * U.adjoint();
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

SpectralData complex_spectrum(const RealMatrix& A, const TolerancePolicy& pol) {
    require_square_finite(A, "matrix");
    pol.validate();
    const int n = static_cast<int>(A.rows());

    Eigen::ComplexSchur<ComplexMatrix> schur(A.cast<Complex>());
    if (schur.info() != Eigen::Success)
        throw Error(ErrorKind::NonConvergence, "complex Schur iteration did not converge");
    const ComplexMatrix& T = schur.matrixT();
    const ComplexMatrix& U = schur.matrixU();
    const Eigen::VectorXcd eig = T.diagonal();

    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(eig(i) - eig(j)) < pol.cluster_tol * scale_of(eig(i), eig(j))) uf.unite(i, j);

    std::vector<std::vector<int>> groups;
    {
        std::vector<int> root_index(n, -1);
        for (int i = 0; i < n; ++i) {
            const int r = uf.find(i);
            if (root_index[r] < 0) {
                root_index[r] = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            groups[root_index[r]].push_back(i);
        }
    }

    struct Group {
        std::vector<int> members;
        Complex mean;
    };
    std::vector<Group> real_groups, upper_groups, lower_groups;
    for (auto& g : groups) {
        Complex mean = 0.0;
        for (int i : g) mean += eig(i);
        mean /= static_cast<double>(g.size());
        if (std::abs(mean.imag()) < pol.cluster_tol * std::max(1.0, std::abs(mean)))
            real_groups.push_back({g, Complex(mean.real(), 0.0)});
        else if (mean.imag() > 0)
            upper_groups.push_back({g, mean});
        else
            lower_groups.push_back({g, mean});
    }
    if (upper_groups.size() != lower_groups.size())
        throw Error(ErrorKind::IllConditioned, "complex eigenvalues do not pair into conjugates at cluster_tol");
    {
        std::vector<bool> used(lower_groups.size(), false);
        for (const auto& up : upper_groups) {
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < lower_groups.size(); ++l) {
                if (used[l]) continue;
                const double d = std::abs(std::conj(up.mean) - lower_groups[l].mean);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(l);
                }
            }
            if (best < 0 || lower_groups[best].members.size() != up.members.size())
                throw Error(ErrorKind::IllConditioned, "conjugate eigenvalue clusters have unequal multiplicities");
            used[best] = true;
        }
    }

    SpectralData out;
    out.cluster_tol = pol.cluster_tol;
    auto build = [&](const Group& g, bool pair) {
        std::vector<int> member(n, 0);
        for (int i : g.members) member[i] = 1;
        SpectralCluster c;
        c.value = g.mean;
        c.multiplicity = static_cast<int>(g.members.size());
        c.conjugate_pair = pair;
        c.complex_projection = cluster_projection(T, U, member);
        c.projection = pair ? RealMatrix(2.0 * c.complex_projection.real()) : RealMatrix(c.complex_projection.real());
        if (!c.complex_projection.allFinite())
            throw Error(ErrorKind::IllConditioned, "eigenvalue clusters cannot be separated at cluster_tol");
        out.clusters.push_back(std::move(c));
    };
    for (const auto& g : real_groups) build(g, false);
    for (const auto& g : upper_groups) build(g, true);

    std::sort(out.clusters.begin(), out.clusters.end(), [](const SpectralCluster& a, const SpectralCluster& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        return a.value.imag() > b.value.imag();
    });

    out.min_gap_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (uf.find(i) != uf.find(j))
                out.min_gap_ratio = std::min(
                    out.min_gap_ratio, std::abs(eig(i) - eig(j)) / (pol.cluster_tol * scale_of(eig(i), eig(j))));

    RealMatrix sum = RealMatrix::Zero(n, n);
    for (const auto& c : out.clusters) {
        sum += c.projection;
        out.max_projection_norm = std::max(out.max_projection_norm, operator_norm(c.projection));
    }
    const double resolution_err = (sum - RealMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(resolution_err <= 1e-6 * std::max(1.0, out.max_projection_norm * out.max_projection_norm)))
        throw Error(ErrorKind::IllConditioned,
                    "spectral projections do not resolve the identity (error " + std::to_string(resolution_err) + ")");
    return out;
}

RealMatrix matrix_exp(const RealMatrix& A) {
    require_square_finite(A, "exponent");
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 > 700.0)
        throw Error(ErrorKind::Overflow, "matrix exponent norm " + std::to_string(norm1) + " exceeds the budget 700");
    RealMatrix result = A.exp();
    if (!result.allFinite()) throw Error(ErrorKind::Overflow, "matrix exponential overflowed");
    return result;
}

RealMatrix unipotent_log(const RealMatrix& u) {
    const Eigen::Index n = u.rows();
    const RealMatrix T = u - RealMatrix::Identity(n, n);
    RealMatrix power = T;
    RealMatrix out = RealMatrix::Zero(n, n);
    for (Eigen::Index k = 1; k < std::max<Eigen::Index>(n, 2); ++k) {
        out += ((k % 2 == 1) ? 1.0 : -1.0) / static_cast<double>(k) * power;
        power = (power * T).eval();
    }
    return out;
}

RealMatrix principal_log(const RealMatrix& A, const TolerancePolicy& pol) {
    const SpectralData spec = complex_spectrum(A, pol);
    if (spec.clusters.size() == 1 && !spec.clusters[0].conjugate_pair &&
        std::abs(spec.clusters[0].value - 1.0) < pol.cluster_tol)
        return unipotent_log(A);
    for (const auto& c : spec.clusters) {
        if (!c.conjugate_pair && c.value.real() <= pol.cluster_tol * std::max(1.0, std::abs(c.value)))
            throw Error(ErrorKind::BranchObstruction,
                        "eigenvalue " + std::to_string(c.value.real()) + " lies on the closed negative real axis");
    }
    const RealMatrix s_inv = spec.apply([](Complex z) { return 1.0 / z; });
    const RealMatrix u = s_inv * A;
    return spec.apply([](Complex z) { return std::log(z); }) + unipotent_log(u);
}

double spectral_radius(const RealMatrix& A, const TolerancePolicy& pol) {
    const SpectralData spec = complex_spectrum(A, pol);
    double r = 0.0;
    for (const auto& c : spec.clusters) r = std::max(r, std::abs(c.value));
    return r;
}

std::optional<int> nilpotency_index(const RealMatrix& A, const TolerancePolicy& pol) {
    require_square_finite(A, "matrix");
    const int n = static_cast<int>(A.rows());
    // Bound scaled by max(1, ‖A‖)^{k+1}: relative for large A, absolute near zero.
    const double norm = std::max(1.0, A.norm());
    RealMatrix power = A;
    double bound = norm;
    for (int k = 0; k < n; ++k) {
        if (power.norm() <= pol.residual_tol * bound) return k;
        power = (power * A).eval();
        bound *= norm;
    }
    return std::nullopt;
}

} // namespace jflow
