#pragma once

#include "exitlab/landscape.hpp"
#include "exitlab/rates.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace exitlab {

/// Dirichlet generator L = -(h/2) Laplacian + grad f . grad on the interior
/// nodes, finite-volume divergence form with edge conductance
/// (h/2) exp(-(f_i+f_j)/h) / dx^2. All exponentials are evaluated relative to
/// f_ref = min f on the grid.
struct GeneratorMatrix {
    DomainGrid grid;
    double h = 0.0;
    double f_ref = 0.0;
    std::vector<double> f;               // all grid nodes
    std::vector<std::size_t> unknowns;   // grid node of each unknown
    std::vector<long> unknown_of;        // grid node -> unknown, -1 on the boundary
    std::vector<double> weight;          // exp(-2(f-f_ref)/h) per unknown
    Eigen::SparseMatrix<double> generator;  // A = W^-1 K
    Eigen::SparseMatrix<double> symmetric;  // S = W^1/2 A W^-1/2
    // d=1 conductance form: left/right conductances of each unknown (scaled by exp(2 f_ref/h))
    std::vector<double> cond_left;
    std::vector<double> cond_right;

    /// ||W A - A^T W||_F / ||W A||_F
    [[nodiscard]] double weighted_symmetry_residual() const;
    /// Off-diagonals <= 0 and diagonal > 0.
    [[nodiscard]] bool m_matrix_sign_pattern() const;
};

struct AssemblyOptions {
    int min_interior_per_axis = 16;
    double floor_factor = 5.0;  // refuse h < floor_factor * dx * max|grad f|
};

GeneratorMatrix assemble_generator(const PotentialField& p, const DomainGrid& grid, double h,
                                   const AssemblyOptions& opt = {});

/// Largest weighted-symmetry residual over every generator assembled so far
/// in this process.
double max_assembled_symmetry_residual() noexcept;

struct SpectralSolution {
    DomainGrid grid;
    double h = 0.0;
    double f_ref = 0.0;
    double lambda_h = 0.0;          // flux quotient
    double lambda_rayleigh = 0.0;   // Rayleigh quotient of the symmetric form
    double residual = 0.0;          // ||S v - lambda v|| / (lambda ||v||)
    int iterations = 0;
    std::vector<double> f;
    std::vector<double> u;          // normalised: sum u^2 exp(-2f/h) dV = 1, zero on the boundary
    std::vector<double> v;          // symmetric-form vector, sum v^2 dV = 1
    std::vector<double> qsd;        // probability mass per node
    /// Boundary flux density -(h/2) d_n u exp(-2f/h) times exp(f_ref/h),
    /// per grid node (zero off the boundary and at corners).
    std::vector<double> flux_scaled;
    std::vector<double> boundary_measure;
    std::vector<double> normal_derivative_3pt;  // diagnostic, per boundary node
    double uh_integral_scaled = 0.0;            // sum u exp(-2f/h) dV times exp(f_ref/h)

    [[nodiscard]] double uh_integral() const;
    [[nodiscard]] double boundary_flux(std::size_t node) const;
    /// Sum of flux * measure over the boundary divided by lambda * uh_integral.
    [[nodiscard]] double flux_balance() const;
};

struct EigenOptions {
    double tol = 1e-10;
    int max_iterations = 2000;
};

SpectralSolution principal_eigenpair(const GeneratorMatrix& a, const EigenOptions& opt = {});

/// Two lowest Dirichlet eigenvalues. d=1: Sturm bisection for the second;
/// d=2: block inverse iteration.
std::pair<double, double> two_lowest_eigenvalues(const GeneratorMatrix& a, const EigenOptions& opt = {});

/// Exit windows Sigma_i: arcs of half-length `radius` around each z_i, clipped
/// to its basin. In d=1 each window is the endpoint itself.
std::vector<BoundaryArc> make_windows(const Landscape& l, double radius);

struct ExitLaw {
    std::vector<double> probabilities;
    double remainder = 0.0;  // mass on the boundary outside every window
};

ExitLaw exit_law(const SpectralSolution& sol, const std::vector<BoundaryArc>& windows);

/// k_i = lambda_h P_i with Spectral provenance. `max_consistency_error`
/// receives the largest relative gap between lambda P_i and the direct flux
/// quadrature of each rate.
RateTable transition_rates(const SpectralSolution& sol, const std::vector<BoundaryArc>& windows,
                           double* max_consistency_error = nullptr);

/// w(x) solving L w = 0 in the domain, w = 1 on the window and 0 elsewhere.
double harmonic_exit_probability(const PotentialField& p, const DomainGrid& grid, double h,
                                 const BoundaryArc& window, const Vec& x);
/// Whole nodal solution of the same problem.
std::vector<double> harmonic_exit_solution(const PotentialField& p, const DomainGrid& grid, double h,
                                           const BoundaryArc& window);

struct ExitProbability1d {
    double p = 0.0;           // exit at z2
    double complement = 0.0;  // exit at z1
};

/// Exact 1D probability of leaving (z1,z2) through z2 from x.
ExitProbability1d exact_exit_probability_1d(const PotentialField& p, double z1, double z2, double h, double x);

/// Boundary quadrature of F d_n f exp(-2f/h) normalised by the same integral
/// with F = 1. Throws NegativeNormalDerivative when d_n f <= 0 somewhere.
double ms_flux_expectation(const PotentialField& p, const DomainGrid& grid, double h,
                           const std::function<double(const Vec&)>& F);

double mean_exit_time_qsd(const SpectralSolution& sol);

}  // namespace exitlab
