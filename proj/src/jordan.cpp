#include "jordanflow/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jflow {

namespace {

double max_abs(const RealMatrix& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void check_wedge_degree(Eigen::Index n, int p) {
    if (p < 1 || p > n)
        throw Error(ErrorKind::InvalidInput, "wedge degree " + std::to_string(p) + " outside [1, n]");
    if (binomial(static_cast<int>(n), p) > 1000)
        throw Error(ErrorKind::DimensionTooLarge, "wedge power dimension exceeds 1000");
}

} // namespace

SemisimpleNilpotent sn_decompose(const RealMatrix& A, const TolerancePolicy& pol) {
    const SpectralData spec = complex_spectrum(A, pol);
    SemisimpleNilpotent out;
    out.semisimple = spec.apply([](Complex z) { return z; });
    out.nilpotent = A - out.semisimple;
    return out;
}

AdditiveJordan additive_jordan(const RealMatrix& X, const TolerancePolicy& pol, Model model) {
    require_square_finite(X, "generator");
    const double n = static_cast<double>(X.rows());
    if (model == Model::Special && std::abs(X.trace()) > pol.residual_tol * n * std::max(1.0, max_abs(X)))
        throw Error(ErrorKind::InvalidInput, "generator is not traceless (trace " + std::to_string(X.trace()) + ")");

    AdditiveJordan out;
    out.source = X;
    out.spectrum = complex_spectrum(X, pol);
    const RealMatrix S = out.spectrum.apply([](Complex z) { return z; });
    out.hyperbolic = out.spectrum.apply([](Complex z) { return Complex(z.real(), 0.0); });
    out.elliptic = S - out.hyperbolic;
    out.nilpotent = X - S;
    return out;
}

MultiplicativeJordan multiplicative_jordan(const RealMatrix& g, const TolerancePolicy& pol, Model model) {
    require_square_finite(g, "group element");
    const int n = static_cast<int>(g.rows());
    const double det = g.determinant();
    const double scale = std::pow(std::max(1.0, max_abs(g)), n);
    if (std::abs(det) <= pol.residual_tol * scale)
        throw Error(ErrorKind::Singular, "group element is singular (det " + std::to_string(det) + ")");
    if (model == Model::Special && std::abs(det - 1.0) > std::max(pol.residual_tol, 1e-12) * n * scale)
        throw Error(ErrorKind::InvalidInput, "group element does not have determinant 1 (det " + std::to_string(det) + ")");

    MultiplicativeJordan out;
    out.source = g;
    out.spectrum = complex_spectrum(g, pol);
    const auto& spec = out.spectrum;
    const RealMatrix s_inv = spec.apply([](Complex z) { return 1.0 / z; });
    out.unipotent = s_inv * g;
    out.hyperbolic = spec.apply([](Complex z) { return Complex(std::abs(z), 0.0); });
    out.elliptic = spec.apply([](Complex z) { return z / std::abs(z); });
    out.log_hyperbolic = spec.apply([](Complex z) { return Complex(std::log(std::abs(z)), 0.0); });
    return out;
}

RealMatrix integer_power(const RealMatrix& A, std::int64_t k) {
    const Eigen::Index n = A.rows();
    RealMatrix base = k < 0 ? RealMatrix(A.inverse()) : A;
    std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
    RealMatrix result = RealMatrix::Identity(n, n);
    while (e) {
        if (e & 1u) result = (result * base).eval();
        base = (base * base).eval();
        e >>= 1u;
    }
    return result;
}

FlowFactors flow_at(double t, const AdditiveJordan& dec) {
    return {matrix_exp(t * dec.source), matrix_exp(t * dec.elliptic), matrix_exp(t * dec.hyperbolic),
            matrix_exp(t * dec.nilpotent)};
}

FlowFactors flow_at(std::int64_t t, const MultiplicativeJordan& dec) {
    const double td = static_cast<double>(t);
    return {integer_power(dec.source, t), integer_power(dec.elliptic, t), matrix_exp(td * dec.log_hyperbolic),
            matrix_exp(td * unipotent_log(dec.unipotent))};
}

InvariantMetric invariant_metric(const RealMatrix& e, const TolerancePolicy& pol) {
    const SpectralData spec = complex_spectrum(e, pol);
    const double circle_tol = 100.0 * std::max(pol.cluster_tol, pol.residual_tol);
    for (const auto& c : spec.clusters) {
        if (std::abs(std::abs(c.value) - 1.0) > circle_tol)
            throw Error(ErrorKind::NotElliptic, "eigenvalue of modulus " + std::to_string(std::abs(c.value)) +
                                                    " lies off the unit circle");
    }
    const RealMatrix s = spec.apply([](Complex z) { return z; });
    if (max_abs(e - s) > circle_tol * std::max(1.0, max_abs(e)))
        throw Error(ErrorKind::NotElliptic, "matrix is not semisimple");

    // Σ P_λᴴ P_λ is invariant because P_λ e = λ P_λ with |λ| = 1.
    return {projection_gram(spec)};
}

std::vector<std::vector<int>> wedge_basis(int n, int p) {
    std::vector<std::vector<int>> out;
    if (p < 0 || p > n) return out;
    std::vector<int> idx(p);
    for (int i = 0; i < p; ++i) idx[i] = i;
    while (true) {
        out.push_back(idx);
        int i = p - 1;
        while (i >= 0 && idx[i] == n - p + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

RealMatrix wedge_representation(const RealMatrix& g, int p) {
    require_square_finite(g, "matrix");
    check_wedge_degree(g.rows(), p);
    const auto basis = wedge_basis(static_cast<int>(g.rows()), p);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
    RealMatrix out(dim, dim);
    RealMatrix minor(p, p);
    for (Eigen::Index I = 0; I < dim; ++I)
        for (Eigen::Index J = 0; J < dim; ++J) {
            for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b) minor(a, b) = g(basis[I][a], basis[J][b]);
            out(I, J) = p == 1 ? minor(0, 0) : minor.determinant();
        }
    return out;
}

RealMatrix wedge_infinitesimal(const RealMatrix& X, int p) {
    require_square_finite(X, "matrix");
    check_wedge_degree(X.rows(), p);
    const int n = static_cast<int>(X.rows());
    const auto basis = wedge_basis(n, p);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
    auto index_of = [&](const std::vector<int>& set) {
        return static_cast<Eigen::Index>(std::lower_bound(basis.begin(), basis.end(), set) - basis.begin());
    };
    RealMatrix out = RealMatrix::Zero(dim, dim);
    for (Eigen::Index J = 0; J < dim; ++J) {
        const auto& cols = basis[J];
        for (int a = 0; a < p; ++a) {
            const int j = cols[a];
            for (int k = 0; k < n; ++k) {
                const double x = X(k, j);
                if (x == 0.0) continue;
                if (k == j) {
                    out(J, J) += x;
                    continue;
                }
                if (std::find(cols.begin(), cols.end(), k) != cols.end()) continue;
                // Moving e_k from slot a to its sorted slot crosses every index
                // strictly between j and k.
                int crossed = 0;
                for (int c : cols)
                    if (c != j && c > std::min(j, k) && c < std::max(j, k)) ++crossed;
                std::vector<int> target = cols;
                target[a] = k;
                std::sort(target.begin(), target.end());
                out(index_of(target), J) += (crossed % 2 ? -x : x);
            }
        }
    }
    return out;
}

RealVector wedge_product(const RealMatrix& columns) {
    const int n = static_cast<int>(columns.rows());
    const int p = static_cast<int>(columns.cols());
    check_wedge_degree(n, p);
    const auto basis = wedge_basis(n, p);
    RealVector out(static_cast<Eigen::Index>(basis.size()));
    RealMatrix minor(p, p);
    for (std::size_t I = 0; I < basis.size(); ++I) {
        for (int a = 0; a < p; ++a) minor.row(a) = columns.row(basis[I][a]);
        out(static_cast<Eigen::Index>(I)) = p == 1 ? minor(0, 0) : minor.determinant();
    }
    return out;
}

} // namespace jflow
