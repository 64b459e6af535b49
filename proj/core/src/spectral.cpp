#include "exitlab/spectral.hpp"

#include "exitlab/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace exitlab {

namespace {

std::atomic<double> g_max_residual{0.0};

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Subtraction-free elimination for the d=1 conductance matrix (graph
// Laplacian plus boundary excess). Every intermediate is a sum of positive
// terms, so the solution is componentwise accurate and positive for b >= 0.
class TridiagonalConductance {
public:
    TridiagonalConductance(const std::vector<double>& cl, const std::vector<double>& cr)
        : cl_(cl), cr_(cr), p_(cl.size()) {
        const std::size_t n = cl_.size();
        double excess = cl_[0];
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) excess = cl_[i] * excess / p_[i - 1];
            p_[i] = excess + cr_[i];
            if (!(p_[i] > 0.0)) throw Error(ErrorCode::SolverFailure, "conductance underflow in 1D elimination");
        }
    }

    [[nodiscard]] std::vector<double> solve(const std::vector<double>& b) const {
        const std::size_t n = cl_.size();
        std::vector<double> bp(n);
        std::vector<double> x(n);
        bp[0] = b[0];
        for (std::size_t i = 1; i < n; ++i) bp[i] = b[i] + cl_[i] * bp[i - 1] / p_[i - 1];
        x[n - 1] = bp[n - 1] / p_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = (bp[i] + cr_[i] * x[i + 1]) / p_[i];
        return x;
    }

private:
    const std::vector<double>& cl_;
    const std::vector<double>& cr_;
    std::vector<double> p_;
};

double max_abs(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

Eigen::VectorXd to_eigen(const std::vector<double>& x) {
    return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

std::vector<double> from_eigen(const Eigen::VectorXd& x) { return {x.data(), x.data() + x.size()}; }

// Interior neighbour of boundary node b along its face normal, with spacing.
// Returns false for corners and for boundary nodes with no interior neighbour.
bool inward_neighbor(const DomainGrid& g, std::size_t b, std::size_t& i1, std::size_t& i2, double& dx,
                     double& measure) {
    if (g.is_corner(b)) return false;
    const unsigned m = g.faces(b);
    const int ix = g.ix(b);
    const int iy = g.iy(b);
    int di = 0;
    int dj = 0;
    if (m & FaceXLo) di = 1;
    else if (m & FaceXHi) di = -1;
    else if (m & FaceYLo) dj = 1;
    else if (m & FaceYHi) dj = -1;
    const int axis = di != 0 ? 0 : 1;
    i1 = g.index(ix + di, iy + dj);
    i2 = g.index(ix + 2 * di, iy + 2 * dj);
    if (g.is_boundary(i1)) return false;
    dx = g.spacing(axis);
    measure = g.dim() == 1 ? 1.0 : g.spacing(1 - axis);
    return true;
}

double interpolate(const DomainGrid& g, const std::vector<double>& values, const Vec& x) {
    const Domain& d = g.domain();
    double t[2] = {0.0, 0.0};
    int i0[2] = {0, 0};
    for (int a = 0; a < d.dim; ++a) {
        const int n = a == 0 ? g.nx() : g.ny();
        const double s = std::clamp((x(a) - d.lo[a]) / g.spacing(a), 0.0, static_cast<double>(n - 1));
        i0[a] = std::min(static_cast<int>(std::floor(s)), n - 2);
        t[a] = s - i0[a];
    }
    if (d.dim == 1) return (1 - t[0]) * values[g.index(i0[0])] + t[0] * values[g.index(i0[0] + 1)];
    const double v00 = values[g.index(i0[0], i0[1])];
    const double v10 = values[g.index(i0[0] + 1, i0[1])];
    const double v01 = values[g.index(i0[0], i0[1] + 1)];
    const double v11 = values[g.index(i0[0] + 1, i0[1] + 1)];
    return (1 - t[0]) * (1 - t[1]) * v00 + t[0] * (1 - t[1]) * v10 + (1 - t[0]) * t[1] * v01 + t[0] * t[1] * v11;
}

}  // namespace

double GeneratorMatrix::weighted_symmetry_residual() const {
    SpMat wa = generator;
    for (int k = 0; k < wa.outerSize(); ++k)
        for (SpMat::InnerIterator it(wa, k); it; ++it) it.valueRef() *= weight[static_cast<std::size_t>(it.row())];
    const SpMat wat = SpMat(wa.transpose());
    const double num = (wa - wat).norm();
    const double den = wa.norm();
    return den > 0 ? num / den : 0.0;
}

bool GeneratorMatrix::m_matrix_sign_pattern() const {
    for (int k = 0; k < generator.outerSize(); ++k) {
        for (SpMat::InnerIterator it(generator, k); it; ++it) {
            if (it.row() == it.col() && !(it.value() > 0.0)) return false;
            if (it.row() != it.col() && it.value() > 0.0) return false;
        }
    }
    return true;
}

GeneratorMatrix assemble_generator(const PotentialField& p, const DomainGrid& grid, double h,
                                   const AssemblyOptions& opt) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
    if (grid.nx() - 2 < opt.min_interior_per_axis || (grid.dim() == 2 && grid.ny() - 2 < opt.min_interior_per_axis))
        throw Error(ErrorCode::GridTooCoarse, "fewer than " + std::to_string(opt.min_interior_per_axis) +
                                                  " interior nodes per axis");
    GeneratorMatrix a{.grid = grid, .h = h, .f_ref = 0.0, .f = {}, .unknowns = {}, .unknown_of = {}, .weight = {},
                      .generator = {}, .symmetric = {}, .cond_left = {}, .cond_right = {}};
    a.f.resize(grid.size());
    double gmax = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Vec x = grid.point(k);
        a.f[k] = p(x);
        gmax = std::max(gmax, p.grad(x).head(grid.dim()).norm());
    }
    a.f_ref = *std::min_element(a.f.begin(), a.f.end());
    double dxmax = grid.spacing(0);
    if (grid.dim() == 2) dxmax = std::max(dxmax, grid.spacing(1));
    if (h < opt.floor_factor * dxmax * gmax)
        throw Error(ErrorCode::FloorTemperature,
                    "h below " + std::to_string(opt.floor_factor * dxmax * gmax) + " on this grid");

    a.unknowns = grid.interior_nodes();
    a.unknown_of.assign(grid.size(), -1);
    for (std::size_t u = 0; u < a.unknowns.size(); ++u) a.unknown_of[a.unknowns[u]] = static_cast<long>(u);
    const std::size_t n = a.unknowns.size();
    a.weight.resize(n);
    for (std::size_t u = 0; u < n; ++u) a.weight[u] = std::exp(-2.0 * (a.f[a.unknowns[u]] - a.f_ref) / h);

    std::vector<Triplet> ta;
    std::vector<Triplet> ts;
    ta.reserve(n * 5);
    ts.reserve(n * 5);
    if (grid.dim() == 1) {
        a.cond_left.resize(n);
        a.cond_right.resize(n);
    }
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t k = a.unknowns[u];
        const double fi = a.f[k];
        double diag = 0.0;
        for (std::size_t nb : grid.axis_neighbors(k)) {
            const int axis = grid.iy(nb) == grid.iy(k) ? 0 : 1;
            const double c = 0.5 * h / (grid.spacing(axis) * grid.spacing(axis));
            const double fj = a.f[nb];
            const double e = std::exp((fi - fj) / h);
            diag += c * e;
            const long v = a.unknown_of[nb];
            if (v >= 0) {
                ta.emplace_back(static_cast<int>(u), static_cast<int>(v), -c * e);
                ts.emplace_back(static_cast<int>(u), static_cast<int>(v), -c);
            }
            if (grid.dim() == 1) {
                const double cond = c * std::exp(-(fi + fj - 2.0 * a.f_ref) / h);
                (nb < k ? a.cond_left : a.cond_right)[u] = cond;
            }
        }
        ta.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
        ts.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
    }
    a.generator.resize(static_cast<int>(n), static_cast<int>(n));
    a.symmetric.resize(static_cast<int>(n), static_cast<int>(n));
    a.generator.setFromTriplets(ta.begin(), ta.end());
    a.symmetric.setFromTriplets(ts.begin(), ts.end());
    const double res = a.weighted_symmetry_residual();
    double seen = g_max_residual.load();
    while (res > seen && !g_max_residual.compare_exchange_weak(seen, res)) {
    }
    return a;
}

double max_assembled_symmetry_residual() noexcept { return g_max_residual.load(); }

double SpectralSolution::uh_integral() const { return uh_integral_scaled * std::exp(-f_ref / h); }

double SpectralSolution::boundary_flux(std::size_t node) const { return flux_scaled[node] * std::exp(-f_ref / h); }

double SpectralSolution::flux_balance() const {
    double s = 0.0;
    for (std::size_t k = 0; k < flux_scaled.size(); ++k) s += flux_scaled[k] * boundary_measure[k];
    return s / (lambda_h * uh_integral_scaled);
}

SpectralSolution principal_eigenpair(const GeneratorMatrix& a, const EigenOptions& opt) {
    const DomainGrid& g = a.grid;
    const std::size_t n = a.unknowns.size();
    const double h = a.h;
    std::vector<double> v(n);  // symmetric-form eigenvector on the unknowns
    int it = 0;
    bool converged = false;

    if (g.dim() == 1) {
        const TridiagonalConductance solver(a.cond_left, a.cond_right);
        std::vector<double> u(n, 1.0);
        std::vector<double> rhs(n);
        for (it = 1; it <= opt.max_iterations; ++it) {
            for (std::size_t i = 0; i < n; ++i) rhs[i] = a.weight[i] * u[i];
            std::vector<double> next = solver.solve(rhs);
            const double m = max_abs(next);
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                next[i] /= m;
                diff = std::max(diff, std::abs(next[i] - u[i]));
            }
            u.swap(next);
            if (diff < opt.tol && it > 1) {
                converged = true;
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = u[i] * std::exp(-(a.f[a.unknowns[i]] - a.f_ref) / h);
    } else {
        Eigen::SimplicialLDLT<SpMat> ldlt(a.symmetric);
        if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse factorisation failed");
        Eigen::VectorXd x = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
        for (it = 1; it <= opt.max_iterations; ++it) {
            Eigen::VectorXd y = ldlt.solve(x);
            y /= y.cwiseAbs().maxCoeff();
            const double diff = (y - x).cwiseAbs().maxCoeff();
            x = y;
            if (diff < opt.tol && it > 1) {
                converged = true;
                break;
            }
        }
        v = from_eigen(x);
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "inverse iteration did not converge");

    const double dv = g.cell_volume();
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm * dv);
    for (double& x : v) x /= nrm;

    SpectralSolution s{.grid = g, .h = h, .f_ref = a.f_ref, .lambda_h = 0.0, .lambda_rayleigh = 0.0, .residual = 0.0,
                       .iterations = 0, .f = {}, .u = {}, .v = {}, .qsd = {}, .flux_scaled = {},
                       .boundary_measure = {}, .normal_derivative_3pt = {}, .uh_integral_scaled = 0.0};
    s.iterations = it;
    s.f = a.f;
    s.u.assign(g.size(), 0.0);
    s.v.assign(g.size(), 0.0);
    s.qsd.assign(g.size(), 0.0);
    s.flux_scaled.assign(g.size(), 0.0);
    s.boundary_measure.assign(g.size(), 0.0);
    s.normal_derivative_3pt.assign(g.size(), 0.0);

    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = a.unknowns[i];
        if (!(v[i] > 0.0)) throw Error(ErrorCode::SolverFailure, "eigenvector lost positivity");
        s.v[k] = v[i];
        s.u[k] = v[i] * std::exp(a.f[k] / h);
        const double m = v[i] * std::exp(-(a.f[k] - a.f_ref) / h);
        s.qsd[k] = m;
        mass += m;
    }
    for (double& q : s.qsd) q /= mass;
    s.uh_integral_scaled = mass * dv;

    double flux_total = 0.0;
    for (std::size_t b : g.boundary_nodes()) {
        std::size_t i1 = 0;
        std::size_t i2 = 0;
        double dx = 0.0;
        double meas = 0.0;
        if (!inward_neighbor(g, b, i1, i2, dx, meas)) continue;
        s.flux_scaled[b] = 0.5 * h / dx * std::exp(-(a.f[b] - a.f_ref) / h) * s.v[i1];
        s.boundary_measure[b] = meas;
        flux_total += s.flux_scaled[b] * meas;
        s.normal_derivative_3pt[b] = (-4.0 * s.u[i1] + s.u[i2]) / (2.0 * dx);
    }
    s.lambda_h = flux_total / s.uh_integral_scaled;

    const Eigen::VectorXd ve = to_eigen(v);
    const Eigen::VectorXd sv = a.symmetric * ve;
    s.lambda_rayleigh = ve.dot(sv) / ve.squaredNorm();
    double snorm = 0.0;
    for (int k = 0; k < a.symmetric.outerSize(); ++k) {
        double row = 0.0;
        for (SpMat::InnerIterator itr(a.symmetric, k); itr; ++itr) row += std::abs(itr.value());
        snorm = std::max(snorm, row);
    }
    s.residual = (sv - s.lambda_h * ve).norm() / (snorm * ve.norm());
    return s;
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below sigma.
std::size_t sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double sigma) {
    std::size_t count = 0;
    double d = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
        d = diag[i] - sigma - (i > 0 ? b2 / d : 0.0);
        if (d == 0.0) d = -std::numeric_limits<double>::min();
        if (d < 0.0) ++count;
    }
    return count;
}

// d=1: lambda_1 from the accurate inverse iteration, lambda_2 by Sturm
// bisection. Block iteration cannot separate the two when lambda_1 is many
// orders of magnitude below lambda_2.
std::pair<double, double> two_lowest_1d(const GeneratorMatrix& a, const EigenOptions& opt) {
    const std::size_t n = a.unknowns.size();
    std::vector<double> diag(n);
    std::vector<double> off(n > 0 ? n - 1 : 0, 0.0);
    for (int k = 0; k < a.symmetric.outerSize(); ++k) {
        for (SpMat::InnerIterator it(a.symmetric, k); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto c = static_cast<std::size_t>(it.col());
            if (r == c) diag[r] = it.value();
            else if (c == r + 1) off[r] = it.value();
        }
    }
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        hi = std::max(hi, diag[i] + (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0));
    const double lambda1 = principal_eigenpair(a, opt).lambda_h;
    double lo = lambda1;
    if (sturm_count(diag, off, hi) < 2) throw Error(ErrorCode::SolverFailure, "fewer than two eigenvalues");
    const double floor_tol = 4.0 * std::numeric_limits<double>::epsilon() * hi;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(diag, off, mid) >= 2) hi = mid;
        else lo = mid;
        if (hi - lo <= std::max(opt.tol * hi, floor_tol)) break;
    }
    return {lambda1, 0.5 * (lo + hi)};
}

}  // namespace

std::pair<double, double> two_lowest_eigenvalues(const GeneratorMatrix& a, const EigenOptions& opt) {
    if (a.grid.dim() == 1) return two_lowest_1d(a, opt);
    const DomainGrid& g = a.grid;
    const std::size_t n = a.unknowns.size();
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(N);
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
    auto ldlt = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(a.symmetric);
    if (ldlt->info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse factorisation failed");
    apply = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(ldlt->solve(x)); };
    auto inner = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.dot(w.cwiseProduct(y)); };

    Eigen::MatrixXd X(N, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec x = g.point(a.unknowns[i]);
        const double c = 0.5 * (g.domain().lo[0] + g.domain().hi[0]);
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = x(0) - c + 1e-3 * (x(1) + 0.1);
    }
    auto orthonormalize = [&](Eigen::MatrixXd& M) {
        for (int c = 0; c < 2; ++c) {
            for (int p = 0; p < c; ++p) M.col(c) -= inner(M.col(p), M.col(c)) * M.col(p);
            const double nn = std::sqrt(inner(M.col(c), M.col(c)));
            if (!(nn > 0)) throw Error(ErrorCode::SolverFailure, "subspace collapsed");
            M.col(c) /= nn;
        }
    };
    orthonormalize(X);
    double prev = 0.0;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Eigen::MatrixXd Y(N, 2);
        Y.col(0) = apply(X.col(0));
        Y.col(1) = apply(X.col(1));
        Eigen::Matrix2d T;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) T(r, c) = inner(X.col(r), Y.col(c));
        T = 0.5 * (T + T.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(T);
        // largest mu of the inverse is the smallest eigenvalue
        const double mu1 = es.eigenvalues()(1);
        const double mu2 = es.eigenvalues()(0);
        Eigen::MatrixXd Z(N, 2);
        Z.col(0) = Y * es.eigenvectors().col(1);
        Z.col(1) = Y * es.eigenvectors().col(0);
        // rescale before orthonormalising to keep the columns comparable
        Z.col(0) /= Z.col(0).cwiseAbs().maxCoeff();
        Z.col(1) /= Z.col(1).cwiseAbs().maxCoeff();
        orthonormalize(Z);
        X = Z;
        const double l2 = 1.0 / mu2;
        if (it > 2 && std::abs(l2 - prev) <= opt.tol * std::abs(l2)) return {1.0 / mu1, l2};
        prev = l2;
    }
    throw Error(ErrorCode::NoConvergence, "block inverse iteration did not converge");
}

std::vector<BoundaryArc> make_windows(const Landscape& l, double radius) {
    std::vector<BoundaryArc> out;
    const Domain& d = l.grid.domain();
    const double per = d.perimeter();
    for (const auto& z : l.zs) {
        if (d.dim == 1) {
            out.push_back(z.basin);
            continue;
        }
        const BoundaryArc& b = z.basin;
        const double len = b.length();
        const double off = std::fmod(z.coordinate - b.begin + 2 * per, per);
        const double lo = std::max(off - radius, 0.0);
        const double hi = std::min(off + radius, len);
        out.push_back(BoundaryArc{std::fmod(b.begin + lo, per), std::fmod(b.begin + hi, per), per, false});
    }
    return out;
}

ExitLaw exit_law(const SpectralSolution& sol, const std::vector<BoundaryArc>& windows) {
    for (std::size_t a = 0; a < windows.size(); ++a) {
        for (std::size_t b = a + 1; b < windows.size(); ++b) {
            const BoundaryArc& A = windows[a];
            const BoundaryArc& B = windows[b];
            const bool overlap = (A.point || B.point) ? (A.point && B.point && A.begin == B.begin)
                                                      : (A.contains(B.begin) || B.contains(A.begin) ||
                                                         std::abs(A.begin - B.begin) < 1e-14);
            if (overlap) throw Error(ErrorCode::WindowsOverlap, "exit windows overlap");
        }
    }
    const DomainGrid& g = sol.grid;
    const Domain& d = g.domain();
    ExitLaw law;
    law.probabilities.assign(windows.size(), 0.0);
    const double norm = sol.lambda_h * sol.uh_integral_scaled;
    for (std::size_t b : g.boundary_nodes()) {
        const double q = sol.flux_scaled[b] * sol.boundary_measure[b];
        if (q == 0.0) continue;
        const double s = d.boundary_coordinate(g.point(b));
        bool hit = false;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (windows[i].contains(s)) {
                law.probabilities[i] += q / norm;
                hit = true;
                break;
            }
        }
        if (!hit) law.remainder += q / norm;
    }
    return law;
}

RateTable transition_rates(const SpectralSolution& sol, const std::vector<BoundaryArc>& windows,
                           double* max_consistency_error) {
    const ExitLaw law = exit_law(sol, windows);
    const DomainGrid& g = sol.grid;
    const Domain& d = g.domain();
    RateTable t;
    t.h = sol.h;
    double worst = 0.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        double direct = 0.0;
        for (std::size_t b : g.boundary_nodes()) {
            const double q = sol.flux_scaled[b] * sol.boundary_measure[b];
            if (q != 0.0 && windows[i].contains(d.boundary_coordinate(g.point(b)))) direct += q;
        }
        direct /= sol.uh_integral_scaled;
        const double k = sol.lambda_h * law.probabilities[i];
        if (direct > 0) worst = std::max(worst, std::abs(k - direct) / direct);
        t.entries.push_back({static_cast<int>(i), k, Provenance::Spectral});
    }
    if (max_consistency_error) *max_consistency_error = worst;
    return t;
}

std::vector<double> harmonic_exit_solution(const PotentialField& p, const DomainGrid& grid, double h,
                                           const BoundaryArc& window) {
    const GeneratorMatrix a = assemble_generator(p, grid, h);
    const Domain& d = grid.domain();
    const std::size_t n = a.unknowns.size();
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t b : grid.boundary_nodes())
        if (window.contains(d.boundary_coordinate(grid.point(b)))) w[b] = 1.0;
    std::vector<double> rhs(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t k = a.unknowns[u];
        for (std::size_t nb : grid.axis_neighbors(k)) {
            if (a.unknown_of[nb] >= 0 || w[nb] == 0.0) continue;
            const int axis = grid.iy(nb) == grid.iy(k) ? 0 : 1;
            const double c = 0.5 * h / (grid.spacing(axis) * grid.spacing(axis));
            if (grid.dim() == 1) rhs[u] += c * std::exp(-(a.f[k] + a.f[nb] - 2.0 * a.f_ref) / h);
            else rhs[u] += c * std::exp(-(a.f[nb] - a.f_ref) / h);
        }
    }
    if (grid.dim() == 1) {
        const TridiagonalConductance solver(a.cond_left, a.cond_right);
        const std::vector<double> x = solver.solve(rhs);
        for (std::size_t u = 0; u < n; ++u) w[a.unknowns[u]] = x[u];
    } else {
        Eigen::SimplicialLDLT<SpMat> ldlt(a.symmetric);
        if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse factorisation failed");
        const Eigen::VectorXd y = ldlt.solve(to_eigen(rhs));
        if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "sparse solve failed");
        for (std::size_t u = 0; u < n; ++u)
            w[a.unknowns[u]] = y(static_cast<Eigen::Index>(u)) * std::exp((a.f[a.unknowns[u]] - a.f_ref) / h);
    }
    return w;
}

double harmonic_exit_probability(const PotentialField& p, const DomainGrid& grid, double h,
                                 const BoundaryArc& window, const Vec& x) {
    if (!grid.domain().contains(x)) throw Error(ErrorCode::InvalidArgument, "x must lie inside the domain");
    const auto w = harmonic_exit_solution(p, grid, h, window);
    return std::clamp(interpolate(grid, w, x), 0.0, 1.0);
}

ExitProbability1d exact_exit_probability_1d(const PotentialField& p, double z1, double z2, double h, double x) {
    if (p.dimension() != 1) throw Error(ErrorCode::InvalidArgument, "1D potential required");
    if (!(z1 < x && x < z2)) throw Error(ErrorCode::InvalidArgument, "x must lie in (z1,z2)");
    // split at interior maxima of f so every panel sees at most one peak of exp(2f/h)
    constexpr int kSamples = 4000;
    std::vector<double> cuts{z1};
    double fmax = -std::numeric_limits<double>::infinity();
    std::vector<double> fs(kSamples + 1);
    for (int i = 0; i <= kSamples; ++i) {
        fs[i] = p.value1(z1 + (z2 - z1) * i / kSamples);
        fmax = std::max(fmax, fs[i]);
    }
    for (int i = 1; i < kSamples; ++i)
        if (fs[i] >= fs[i - 1] && fs[i] > fs[i + 1]) cuts.push_back(z1 + (z2 - z1) * i / kSamples);
    cuts.push_back(z2);
    auto g = [&](double t) { return std::exp(2.0 * (p.value1(t) - fmax) / h); };
    auto integrate = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double lo = std::max(a, cuts[k]);
            const double hi = std::min(b, cuts[k + 1]);
            if (hi > lo) s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 20, 1e-12);
        }
        return s;
    };
    const double left = integrate(z1, x);
    const double right = integrate(x, z2);
    return {left / (left + right), right / (left + right)};
}

double ms_flux_expectation(const PotentialField& p, const DomainGrid& grid, double h,
                           const std::function<double(const Vec&)>& F) {
    const Domain& d = grid.domain();
    struct Node {
        Vec x;
        double dnf;
        double w;
    };
    std::vector<Node> nodes;
    if (d.dim == 1) {
        const Vec a(d.lo[0], 0.0);
        const Vec b(d.hi[0], 0.0);
        nodes.push_back({a, -p.grad(a)(0), 1.0});
        nodes.push_back({b, p.grad(b)(0), 1.0});
    } else {
        for (Face face : {FaceXLo, FaceXHi, FaceYLo, FaceYHi}) {
            const Vec nrm = DomainGrid::face_normal(face);
            const bool along_y = face == FaceXLo || face == FaceXHi;
            const int count = along_y ? grid.ny() : grid.nx();
            const double step = along_y ? grid.spacing(1) : grid.spacing(0);
            for (int t = 0; t < count; ++t) {
                std::size_t k = 0;
                if (face == FaceXLo) k = grid.index(0, t);
                if (face == FaceXHi) k = grid.index(grid.nx() - 1, t);
                if (face == FaceYLo) k = grid.index(t, 0);
                if (face == FaceYHi) k = grid.index(t, grid.ny() - 1);
                const Vec x = grid.point(k);
                const double wt = (t == 0 || t == count - 1) ? 0.5 * step : step;
                nodes.push_back({x, p.grad(x).dot(nrm), wt});
            }
        }
    }
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& nd : nodes) {
        if (!(nd.dnf > 0.0)) throw Error(ErrorCode::NegativeNormalDerivative, "normal derivative not positive");
        fmin = std::min(fmin, p(nd.x));
    }
    double num = 0.0;
    double den = 0.0;
    for (const auto& nd : nodes) {
        const double base = nd.w * nd.dnf * std::exp(-2.0 * (p(nd.x) - fmin) / h);
        num += F(nd.x) * base;
        den += base;
    }
    return num / den;
}

double mean_exit_time_qsd(const SpectralSolution& sol) { return 1.0 / sol.lambda_h; }

}  // namespace exitlab
