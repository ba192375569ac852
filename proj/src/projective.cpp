#include "jordanflow/projective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace jflow {

namespace {

RealVector sign_canonical(RealVector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0) v = -v;
            break;
        }
    }
    return v;
}

double chordal(const RealVector& x, const RealVector& y) {
    // min(‖x−y‖, ‖x+y‖) for unit vectors, without cancellation near 0.
    const double a = (x - y).norm(), b = (x + y).norm();
    return std::min(a, b);
}

std::vector<RealVector> fibonacci_hemisphere(int count) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<RealVector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / (2.0 * count);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        RealVector v(3);
        v << r * std::cos(phi), r * std::sin(phi), z;
        out.push_back(v);
    }
    return out;
}

} // namespace

ProjectivePoint::ProjectivePoint(const RealVector& v) {
    const double nrm = v.norm();
    if (!std::isfinite(nrm) || nrm == 0.0)
        throw Error(ErrorKind::InvalidInput, "projective point needs a finite nonzero vector");
    rep = sign_canonical(v / nrm);
}

ProjectivePoint basis_point(int n, int i) { return ProjectivePoint(RealVector::Unit(n, i)); }

double projective_distance(const ProjectivePoint& p, const ProjectivePoint& q) { return chordal(p.rep, q.rep); }

double projective_distance(const ProjectivePoint& p, const ProjectivePoint& q, const RealMatrix& M) {
    const Eigen::LLT<RealMatrix> llt(M);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidInput, "metric is not positive-definite");
    // ‖x‖_M = ‖Lᵀx‖ with M = LLᵀ.
    RealVector x = llt.matrixU() * p.rep, y = llt.matrixU() * q.rep;
    return chordal(x.normalized(), y.normalized());
}

double distance_to_subspace(const ProjectivePoint& p, const RealMatrix& Q) {
    if (Q.cols() == 0) return std::sqrt(2.0);
    const double c = std::min(1.0, (Q.transpose() * p.rep).norm());
    // Nearest point is the normalized orthogonal projection; ‖x − y‖² = 2 − 2c.
    // Written via sin² to keep precision when c ≈ 1.
    const double s2 = std::max(0.0, (p.rep - Q * (Q.transpose() * p.rep)).squaredNorm());
    return std::sqrt(s2 + (1.0 - c) * (1.0 - c));
}

ProjectiveMorseDecomposition morse_components_projective(const LinearFlow& flow) {
    ProjectiveMorseDecomposition out;
    for (const auto& rs : flow.rate_spaces())
        out.components.push_back({rs.rate, rs.growth, rs.basis, rs.projection});
    return out;
}

std::vector<double> projection_profile(const ProjectivePoint& p, const ProjectiveMorseDecomposition& morse) {
    std::vector<double> out;
    for (const auto& c : morse.components) out.push_back((c.projection * p.rep).norm());
    return out;
}

std::size_t stable_set_index(const ProjectivePoint& p, const LinearFlow& flow) {
    const auto profile = projection_profile(p, morse_components_projective(flow));
    for (std::size_t i = 0; i < profile.size(); ++i)
        if (profile[i] > flow.policy().residual_tol) return i;
    return profile.size() - 1;
}

std::size_t unstable_set_index(const ProjectivePoint& p, const LinearFlow& flow) {
    const auto profile = projection_profile(p, morse_components_projective(flow));
    for (std::size_t i = profile.size(); i-- > 0;)
        if (profile[i] > flow.policy().residual_tol) return i;
    return 0;
}

ProjectivePoint unipotent_limit(const ProjectivePoint& p, const RealMatrix& N, const TolerancePolicy& pol) {
    require_square_finite(N, "nilpotent matrix");
    if (N.rows() != p.rep.size()) throw Error(ErrorKind::InvalidInput, "dimension mismatch");
    const auto index = nilpotency_index(N, pol);
    if (!index) throw Error(ErrorKind::NotNilpotent, "matrix is not nilpotent");
    const double scale = std::max(1.0, operator_norm(N));
    std::vector<RealVector> powers{p.rep};
    for (int k = 1; k <= *index; ++k) powers.push_back(N * powers.back());
    for (int k = *index; k > 0; --k) {
        if (powers[k].norm() > pol.residual_tol * std::pow(scale, k)) return ProjectivePoint(powers[k]);
    }
    return p;
}

std::optional<std::size_t> fixed_component(const ProjectivePoint& p, const LinearFlow& flow) {
    const double tol = flow.policy().residual_tol;
    const auto& spaces = flow.rate_spaces();
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        const RealVector r = p.rep - spaces[i].projection * p.rep;
        if (r.norm() <= tol * std::max(1.0, operator_norm(spaces[i].projection))) return i;
    }
    return std::nullopt;
}

bool chain_recurrent_membership(const ProjectivePoint& p, const LinearFlow& flow) {
    return fixed_component(p, flow).has_value();
}

bool recurrent_membership(const ProjectivePoint& p, const LinearFlow& flow) {
    if (!fixed_component(p, flow)) return false;
    const RealMatrix& N = flow.nilpotent_generator();
    return (N * p.rep).norm() <= flow.policy().residual_tol * std::max(1.0, operator_norm(N));
}

std::vector<ProjectivePoint> simulate_projective(const LinearFlow& flow, const ProjectivePoint& start,
                                                 const std::vector<double>& times) {
    if (start.dimension() != flow.dimension()) throw Error(ErrorKind::InvalidInput, "dimension mismatch");
    const FlowStepper stepper(flow);
    std::vector<ProjectivePoint> out;
    out.reserve(times.size());
    RealMatrix x = start.rep;
    double now = 0.0;
    for (double t : times) {
        x = stepper.advance(x, t - now, [](RealMatrix& v) { v /= v.norm(); });
        now = t;
        out.emplace_back(x.col(0));
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const std::vector<ProjectivePoint>& points, const std::vector<double>& distance) {
    if (points.empty()) return;
    const int n = points.front().dimension();
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    os << ",distance\n";
    const auto old = os.precision(17);
    for (std::size_t k = 0; k < points.size(); ++k) {
        os << times[k];
        for (int i = 0; i < n; ++i) os << ',' << points[k].rep(i);
        os << ',' << (k < distance.size() ? distance[k] : 0.0) << '\n';
    }
    os.precision(old);
}

std::vector<ProjectivePoint> projective_grid(int n, int resolution) {
    if (resolution < 1) throw Error(ErrorKind::InvalidInput, "resolution must be positive");
    if (resolution > kMaxGridPoints)
        throw Error(ErrorKind::GridTooLarge,
                    "grid of " + std::to_string(resolution) + " points exceeds " + std::to_string(kMaxGridPoints));
    std::vector<ProjectivePoint> grid;
    if (n == 2) {
        for (int k = 0; k < resolution; ++k) {
            const double th = std::numbers::pi * k / resolution;
            RealVector v(2);
            v << std::cos(th), std::sin(th);
            grid.emplace_back(v);
        }
    } else if (n == 3) {
        for (const auto& v : fibonacci_hemisphere(resolution)) grid.emplace_back(v);
    } else {
        throw Error(ErrorKind::InvalidInput, "chain grids exist only for n = 2 or 3");
    }
    return grid;
}

ChainGraph build_chain_graph(const LinearFlow& flow, int resolution, double eps, double min_time) {
    if (!(eps > 0.0) || !(min_time > 0.0)) throw Error(ErrorKind::InvalidInput, "eps and min_time must be positive");
    ChainGraph graph;
    graph.grid = projective_grid(flow.dimension(), resolution);
    graph.eps = eps;
    graph.min_time = min_time;

    const int n = flow.dimension();
    const auto size = static_cast<Eigen::Index>(graph.grid.size());
    RealMatrix pts(n, size);
    for (Eigen::Index k = 0; k < size; ++k) pts.col(k) = graph.grid[static_cast<std::size_t>(k)].rep;

    if (n == 2) {
        graph.covering_radius = 2.0 * std::sin(std::numbers::pi / (4.0 * resolution));
    } else {
        // Probe with a denser Fibonacci set.
        double worst = 0.0;
        const RealMatrix pts_t = pts.transpose();
        for (const auto& v : fibonacci_hemisphere(8 * resolution)) {
            const RealVector dots = (pts_t * v).cwiseAbs();
            const double c = std::min(1.0, dots.maxCoeff());
            worst = std::max(worst, std::sqrt(2.0 - 2.0 * c));
        }
        graph.covering_radius = worst;
    }

    RealMatrix images = flow.propagator(min_time) * pts;
    for (Eigen::Index k = 0; k < size; ++k) images.col(k).normalize();
    if (!images.allFinite()) throw Error(ErrorKind::Overflow, "time-T map left the finite range");

    // d(x, y) < eps  ⇔  2 − 2|⟨x, y⟩| < eps² for unit vectors.
    const double cos_bound = 1.0 - 0.5 * eps * eps;
    graph.edges.assign(static_cast<std::size_t>(size), {});
    const RealMatrix pts_t = pts.transpose();
    RealVector dots(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        dots.noalias() = pts_t * images.col(i);
        for (Eigen::Index j = 0; j < size; ++j)
            if (std::abs(dots(j)) > cos_bound) graph.edges[static_cast<std::size_t>(i)].push_back(static_cast<int>(j));
    }
    return graph;
}

std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& edges) {
    const int n = static_cast<int>(edges.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int counter = 0, ncomp = 0;

    struct Frame {
        int v;
        std::size_t next;
    };
    std::vector<Frame> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const int v = f.v;
            if (f.next < edges[v].size()) {
                const int w = edges[v][f.next++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = ncomp;
                } while (w != v);
                ++ncomp;
            }
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
        }
    }
    return comp;
}

std::size_t ChainOracleResult::marked_count() const {
    return static_cast<std::size_t>(std::count(marked.begin(), marked.end(), true));
}

ChainOracleResult chain_oracle(const LinearFlow& flow, int resolution, double eps, double min_time,
                               std::optional<double> reference_radius) {
    ChainOracleResult out;
    out.graph = build_chain_graph(flow, resolution, eps, min_time);
    const auto& edges = out.graph.edges;
    const std::size_t size = edges.size();

    const auto comp = strongly_connected_components(edges);
    std::vector<int> comp_size(size, 0);
    for (int c : comp) ++comp_size[static_cast<std::size_t>(c)];
    out.marked.assign(size, false);
    for (std::size_t v = 0; v < size; ++v) {
        if (comp_size[static_cast<std::size_t>(comp[v])] > 1) {
            out.marked[v] = true;
            continue;
        }
        const auto& adj = edges[v];
        out.marked[v] = std::find(adj.begin(), adj.end(), static_cast<int>(v)) != adj.end();
    }

    out.reference_radius = reference_radius.value_or(eps);
    out.reference.assign(size, false);
    std::size_t agree = 0;
    for (std::size_t v = 0; v < size; ++v) {
        for (const auto& rs : flow.rate_spaces()) {
            if (distance_to_subspace(out.graph.grid[v], rs.basis) <= out.reference_radius) {
                out.reference[v] = true;
                break;
            }
        }
        if (out.reference[v] == out.marked[v]) ++agree;
    }
    out.agreement = size ? static_cast<double>(agree) / static_cast<double>(size) : 1.0;
    return out;
}

} // namespace jflow
