#include "jordanflow/flag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace jflow {

namespace {

RealMatrix positive_qr(const RealMatrix& B) {
    Eigen::HouseholderQR<RealMatrix> qr(B);
    RealMatrix Q = qr.householderQ() * RealMatrix::Identity(B.rows(), B.cols());
    const RealMatrix R = qr.matrixQR().topRows(B.cols()).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        if (R(j, j) < 0) Q.col(j) = -Q.col(j);
    return Q;
}

// Sines of the principal angles between span(B) and span(Q), both
// orthonormal, ascending. There are B.cols() of them.
RealVector principal_sines(const RealMatrix& B, const RealMatrix& Q) {
    const RealMatrix resid = B - Q * (Q.transpose() * B);
    Eigen::JacobiSVD<RealMatrix> svd(resid);
    RealVector s = svd.singularValues(); // descending, length min(rows, cols)
    RealVector out = RealVector::Zero(B.cols());
    for (Eigen::Index k = 0; k < s.size(); ++k) out(B.cols() - 1 - k) = std::min(1.0, s(k));
    return out;
}

// dim(span B ∩ span Q) with margin bookkeeping.
int intersection_dimension(const RealMatrix& B, const RealMatrix& Q, double tol, double& margin) {
    if (B.cols() == 0 || Q.cols() == 0) return 0;
    const RealVector s = principal_sines(B, Q);
    int dim = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        const double ratio = s(k) > 0 ? s(k) / tol : std::numeric_limits<double>::infinity();
        const double m = ratio >= 1 ? ratio : 1.0 / ratio;
        margin = std::min(margin, m);
        if (m < 100.0)
            throw Error(ErrorKind::RankAmbiguous, "principal angle sine " + std::to_string(s(k)) +
                                                      " is within a factor 100 of the rank threshold " +
                                                      std::to_string(tol));
        if (s(k) <= tol) ++dim;
    }
    return dim;
}

// Orthonormal bases of the partial sums of rate spaces taken in `order`.
std::vector<RealMatrix> filtration(const LinearFlow& flow, bool fastest_first) {
    const auto& spaces = flow.rate_spaces();
    const int n = flow.dimension();
    std::vector<RealMatrix> out;
    RealMatrix P = RealMatrix::Zero(n, n);
    int dim = 0;
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        const auto& rs = fastest_first ? spaces[k] : spaces[spaces.size() - 1 - k];
        P += rs.projection;
        dim += rs.dimension;
        out.push_back(dim == n ? RealMatrix(RealMatrix::Identity(n, n)) : orthonormal_range(P, dim));
    }
    return out;
}

// c[i][j] from r(i, j) = dim(V_i ∩ W_j) with V_{k+1} = ℝⁿ (residual row).
CellAssignment cells_from_filtration(const Flag& f, const std::vector<RealMatrix>& W, double tol) {
    const int k = f.type.length();
    const int n = f.type.n;
    const std::size_t cols = W.size();
    CellAssignment out;
    out.rank_margin = std::numeric_limits<double>::infinity();
    std::vector<std::vector<int>> r(static_cast<std::size_t>(k + 2), std::vector<int>(cols + 1, 0));
    for (int i = 1; i <= k + 1; ++i) {
        const RealMatrix Vi = i <= k ? f.subspace(i - 1) : RealMatrix(RealMatrix::Identity(n, n));
        for (std::size_t j = 1; j <= cols; ++j) {
            r[static_cast<std::size_t>(i)][j] =
                i == k + 1 ? static_cast<int>(W[j - 1].cols())
                           : intersection_dimension(Vi, W[j - 1], tol, out.rank_margin);
        }
    }
    out.cells.assign(static_cast<std::size_t>(k + 1), std::vector<int>(cols, 0));
    for (std::size_t i = 1; i <= static_cast<std::size_t>(k + 1); ++i)
        for (std::size_t j = 1; j <= cols; ++j)
            out.cells[i - 1][j - 1] = r[i][j] - r[i - 1][j] - r[i][j - 1] + r[i - 1][j - 1];
    return out;
}

void enumerate(std::vector<int>& rowrem, std::vector<int>& colrem, std::vector<std::vector<int>>& cells,
               std::size_t i, std::size_t j, std::vector<std::vector<std::vector<int>>>& out) {
    const std::size_t rows = rowrem.size(), cols = colrem.size();
    if (i == rows) {
        out.push_back(cells);
        return;
    }
    int later_cols = 0, later_rows = 0;
    for (std::size_t jj = j + 1; jj < cols; ++jj) later_cols += colrem[jj];
    for (std::size_t ii = i + 1; ii < rows; ++ii) later_rows += rowrem[ii];
    const int hi = std::min(rowrem[i], colrem[j]);
    const int lo = std::max({0, rowrem[i] - later_cols, colrem[j] - later_rows});
    for (int v = hi; v >= lo; --v) {
        cells[i][j] = v;
        rowrem[i] -= v;
        colrem[j] -= v;
        if (j + 1 == cols)
            enumerate(rowrem, colrem, cells, i + 1, 0, out);
        else
            enumerate(rowrem, colrem, cells, i, j + 1, out);
        rowrem[i] += v;
        colrem[j] += v;
    }
    cells[i][j] = 0;
}

void check_flag(const Flag& f, const LinearFlow& flow) {
    if (f.type.n != flow.dimension()) throw Error(ErrorKind::InvalidInput, "flag and flow dimensions differ");
}

} // namespace

FlagType::FlagType(int n_, std::vector<int> dims_) : n(n_), dims(std::move(dims_)) {
    if (dims.empty()) throw Error(ErrorKind::InvalidInput, "flag type needs at least one dimension");
    int prev = 0;
    for (int d : dims) {
        if (d <= prev || d >= n)
            throw Error(ErrorKind::InvalidInput,
                        "flag dimensions must satisfy 1 <= d1 < ... < dk < n (n = " + std::to_string(n) + ")");
        prev = d;
    }
}

FlagType FlagType::full(int n) {
    std::vector<int> d;
    for (int i = 1; i < n; ++i) d.push_back(i);
    return FlagType(n, d);
}

std::vector<int> FlagType::increments() const {
    std::vector<int> out;
    int prev = 0;
    for (int d : dims) {
        out.push_back(d - prev);
        prev = d;
    }
    out.push_back(n - prev);
    return out;
}

int FlagType::manifold_dimension() const {
    const auto inc = increments();
    int total = 0;
    for (std::size_t i = 0; i < inc.size(); ++i)
        for (std::size_t j = i + 1; j < inc.size(); ++j) total += inc[i] * inc[j];
    return total;
}

Flag Flag::from_basis(FlagType type, const RealMatrix& basis, bool* adjusted) {
    const int dk = type.dims.back();
    if (basis.rows() != type.n || basis.cols() != dk)
        throw Error(ErrorKind::InvalidInput, "flag basis must be n x d_k");
    if (!basis.allFinite()) throw Error(ErrorKind::InvalidInput, "flag basis has non-finite entries");
    Eigen::JacobiSVD<RealMatrix> svd(basis);
    const RealVector s = svd.singularValues();
    if (s(s.size() - 1) <= 1e-10 * std::max(1.0, s(0))) throw Error(ErrorKind::InvalidInput, "flag basis is rank deficient");
    const double off = (basis.transpose() * basis - RealMatrix::Identity(dk, dk)).cwiseAbs().maxCoeff();
    if (adjusted) *adjusted = off > 1e-8;
    return Flag{std::move(type), positive_qr(basis)};
}

Flag Flag::standard(FlagType type) {
    const int dk = type.dims.back();
    RealMatrix B = RealMatrix::Identity(type.n, dk);
    return Flag{std::move(type), B};
}

double flag_distance(const Flag& a, const Flag& b) {
    if (!(a.type == b.type)) throw Error(ErrorKind::InvalidInput, "flags of different types");
    double worst = 0.0;
    for (int i = 0; i < a.type.length(); ++i) {
        const RealMatrix A = a.subspace(i), B = b.subspace(i);
        worst = std::max(worst, operator_norm(A * A.transpose() - B * B.transpose()));
    }
    return worst;
}

ProjectivePoint plucker_embed(const RealMatrix& columns) { return ProjectivePoint(wedge_product(columns)); }

ComponentDimensions component_dimensions(const std::vector<std::vector<int>>& cells, const std::vector<double>& rates) {
    ComponentDimensions out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        for (std::size_t i2 = i + 1; i2 < cells.size(); ++i2)
            for (std::size_t a = 0; a < rates.size(); ++a)
                for (std::size_t b = 0; b < rates.size(); ++b) {
                    const int pairs = cells[i][a] * cells[i2][b];
                    if (!pairs) continue;
                    // Rates are already clustered: distinct indices mean distinct rates.
                    if (a == b)
                        out.component += pairs;
                    else if (rates[b] > rates[a])
                        out.unstable += pairs;
                    else
                        out.stable += pairs;
                }
    return out;
}

std::vector<FlagMorseComponent> enumerate_morse_components(const std::vector<double>& rates,
                                                           const std::vector<int>& multiplicities,
                                                           const FlagType& type) {
    if (rates.size() != multiplicities.size()) throw Error(ErrorKind::InvalidInput, "rates and multiplicities differ in length");
    int total = 0;
    for (int m : multiplicities) total += m;
    if (total != type.n) throw Error(ErrorKind::InvalidInput, "multiplicities do not sum to n");
    std::vector<int> rowrem = type.increments();
    std::vector<int> colrem = multiplicities;
    std::vector<std::vector<int>> cells(rowrem.size(), std::vector<int>(colrem.size(), 0));
    std::vector<std::vector<std::vector<int>>> tables;
    enumerate(rowrem, colrem, cells, 0, 0, tables);
    std::vector<FlagMorseComponent> out;
    out.reserve(tables.size());
    for (auto& t : tables) {
        FlagMorseComponent c;
        c.dims = component_dimensions(t, rates);
        c.cells = std::move(t);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<FlagMorseComponent> enumerate_morse_components(const LinearFlow& flow, const FlagType& type) {
    if (type.n != flow.dimension()) throw Error(ErrorKind::InvalidInput, "flag and flow dimensions differ");
    return enumerate_morse_components(flow.rates(), flow.multiplicities(), type);
}

std::size_t find_component(const std::vector<FlagMorseComponent>& components, const std::vector<std::vector<int>>& cells) {
    for (std::size_t k = 0; k < components.size(); ++k)
        if (components[k].cells == cells) return k;
    return components.size();
}

CellAssignment stable_cell(const Flag& f, const LinearFlow& flow) {
    check_flag(f, flow);
    CellAssignment out = cells_from_filtration(f, filtration(flow, false), flow.policy().residual_tol);
    // Columns came out slowest first; rate spaces are indexed fastest first.
    for (auto& row : out.cells) std::reverse(row.begin(), row.end());
    return out;
}

CellAssignment unstable_cell(const Flag& f, const LinearFlow& flow) {
    check_flag(f, flow);
    return cells_from_filtration(f, filtration(flow, true), flow.policy().residual_tol);
}

std::size_t bruhat_cell(const Flag& f, const LinearFlow& flow, const std::vector<FlagMorseComponent>& components) {
    return find_component(components, stable_cell(f, flow).cells);
}

std::size_t unstable_cell_index(const Flag& f, const LinearFlow& flow,
                                const std::vector<FlagMorseComponent>& components) {
    return find_component(components, unstable_cell(f, flow).cells);
}

double component_distance(const Flag& f, const LinearFlow& flow, const FlagMorseComponent& c) {
    check_flag(f, flow);
    const auto& spaces = flow.rate_spaces();
    double worst = 0.0;
    for (int i = 0; i < f.type.length(); ++i) {
        const RealMatrix Vi = f.subspace(i);
        for (std::size_t j = 0; j < spaces.size(); ++j) {
            int need = 0;
            for (int i2 = 0; i2 <= i; ++i2) need += c.cells[static_cast<std::size_t>(i2)][j];
            if (need == 0) continue;
            const RealVector s = principal_sines(Vi, spaces[j].basis);
            worst = std::max(worst, s(need - 1));
        }
    }
    return worst;
}

NearestComponent nearest_component(const Flag& f, const LinearFlow& flow,
                                   const std::vector<FlagMorseComponent>& components) {
    NearestComponent best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < components.size(); ++k) {
        const double d = component_distance(f, flow, components[k]);
        if (d < best.distance) best = {k, d};
    }
    return best;
}

Flag component_flag(const LinearFlow& flow, const FlagType& type, const FlagMorseComponent& c) {
    const auto& spaces = flow.rate_spaces();
    std::vector<int> used(spaces.size(), 0);
    RealMatrix B(type.n, type.dims.back());
    Eigen::Index col = 0;
    for (int i = 0; i < type.length(); ++i)
        for (std::size_t j = 0; j < spaces.size(); ++j)
            for (int r = 0; r < c.cells[static_cast<std::size_t>(i)][j]; ++r)
                B.col(col++) = spaces[j].basis.col(used[j]++);
    return Flag::from_basis(type, B);
}

std::vector<Flag> simulate_flag(const LinearFlow& flow, const Flag& start, const std::vector<double>& times) {
    check_flag(start, flow);
    const FlowStepper stepper(flow);
    std::vector<Flag> out;
    out.reserve(times.size());
    RealMatrix B = start.basis;
    double now = 0.0;
    for (double t : times) {
        B = stepper.advance(B, t - now, [](RealMatrix& m) { m = positive_qr(m); });
        now = t;
        out.push_back(Flag{start.type, B});
    }
    return out;
}

FlowClassification classify_flow(const LinearFlow& flow, const FlagType& type) {
    FlowClassification out;
    out.type = type;
    out.rates = flow.rates();
    out.multiplicities = flow.multiplicities();
    out.h_regular = std::all_of(out.multiplicities.begin(), out.multiplicities.end(), [](int m) { return m == 1; });
    out.conformal = flow.conformal();
    out.structurally_stable = out.h_regular;
    out.components = enumerate_morse_components(flow, type);
    out.attractor = 0;
    out.repeller = out.components.size() - 1;
    out.rate_gap_ratio = flow.rate_gap_ratio();
    out.nilpotent_norm = flow.nilpotent_norm();
    const auto& spec = flow.additive() ? flow.additive()->spectrum : flow.multiplicative()->spectrum;
    out.spectral_gap_ratio = spec.min_gap_ratio;
    return out;
}

bool flag_recurrent_membership(const Flag& f, const LinearFlow& flow) {
    check_flag(f, flow);
    const double tol = flow.policy().residual_tol;
    for (const RealMatrix* G : {&flow.hyperbolic_generator(), &flow.nilpotent_generator()}) {
        const double scale = std::max(1.0, operator_norm(*G));
        for (int i = 0; i < f.type.length(); ++i) {
            const RealMatrix B = f.subspace(i);
            const RealMatrix image = *G * B;
            if ((image - B * (B.transpose() * image)).norm() > tol * scale) return false;
        }
    }
    return true;
}

double height_lyapunov(const Flag& f, const RealMatrix& H) {
    if (H.rows() != f.type.n || H.cols() != f.type.n) throw Error(ErrorKind::InvalidInput, "dimension mismatch");
    double value = 0.0;
    for (int i = 0; i < f.type.length(); ++i) {
        const RealMatrix B = f.subspace(i);
        value -= (B.transpose() * H * B).trace();
    }
    return value;
}

double height_lyapunov(const Flag& f, const LinearFlow& flow) {
    check_flag(f, flow);
    // Coordinates y = Lᵀx with M = LLᵀ turn ⟨·,·⟩_M into the standard product.
    const Eigen::LLT<RealMatrix> llt(flow.adapted_metric());
    const RealMatrix U = llt.matrixU();
    const RealMatrix Ui = U.inverse();
    RealMatrix H = U * flow.hyperbolic_generator() * Ui;
    H = 0.5 * (H + H.transpose()).eval();
    return height_lyapunov(Flag{f.type, positive_qr(U * f.basis)}, H);
}

} // namespace jflow
