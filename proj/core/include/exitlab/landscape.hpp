#pragma once

#include "exitlab/domain.hpp"
#include "exitlab/potential.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace exitlab {

struct CriticalPoint {
    Vec location = Vec::Zero();
    double f_value = 0.0;
    /// Number of negative Hessian eigenvalues (0 = minimum).
    int index = 0;
    std::vector<double> hess_eigenvalues;  // ascending
    Mat hessian = Mat::Zero();

    [[nodiscard]] bool is_minimum() const noexcept { return index == 0; }
    /// Determinant over the active dimensions.
    [[nodiscard]] double det_hess() const noexcept;
};

/// Open arc of the boundary loop in arc-length coordinates. In d=1 the basin
/// is the endpoint itself and begin == end == its coordinate.
struct BoundaryArc {
    double begin = 0.0;
    double end = 0.0;
    double perimeter = 0.0;
    bool point = false;

    [[nodiscard]] bool contains(double s) const noexcept;
    [[nodiscard]] double length() const noexcept;
};

struct BoundaryMinimum {
    Vec location = Vec::Zero();
    double f_value = 0.0;
    double normal_derivative = 0.0;
    /// Second derivative of f along the boundary; 1 by convention in d=1.
    double tangential_hess_det = 1.0;
    double coordinate = 0.0;  // arc-length position on the loop
    bool at_corner = false;
    BoundaryArc basin;
    int rank = 0;  // 1-based position in the f-ordering
};

struct SublevelComponent {
    int id = 0;
    std::vector<Vec> minima;
    bool touches_boundary = false;
    std::vector<std::size_t> nodes;
};

struct HypothesisReport {
    bool h1 = false;
    bool h2 = false;
    bool h3 = false;
    bool h_morse = false;
    bool h_min = false;
    int n = 0;
    int n0 = 0;
    int k0 = 0;
    /// Component of {f < min f on the boundary} holding argmin f (when unique).
    std::optional<SublevelComponent> component_c;
    std::vector<Vec> boundary_contacts;
    std::vector<std::string> failure_reasons;
};

struct CriticalPointOptions {
    double newton_tol = 1e-10;
    double dedupe_radius = 1e-6;
    double morse_tol = 1e-8;
    double seed_percentile = 0.10;
    int max_newton_iterations = 100;
};

Evaluation eval_all(const PotentialField& p, const Vec& x);

std::vector<CriticalPoint> find_critical_points(const PotentialField& p, const DomainGrid& seeds,
                                                const CriticalPointOptions& opt = {});

/// Sorted by f ascending; rank and basin filled in.
std::vector<BoundaryMinimum> boundary_minima(const PotentialField& p, const DomainGrid& grid);

/// Number of global boundary minimizers, ties at relative 1e-9.
int count_global(const std::vector<BoundaryMinimum>& zs, double rel_tol = 1e-9);

BoundaryArc boundary_basin(const BoundaryMinimum& z, const PotentialField& p, const DomainGrid& grid);

std::vector<SublevelComponent> sublevel_components(const PotentialField& p, const DomainGrid& grid, double level,
                                                   const std::vector<CriticalPoint>& minima = {});

HypothesisReport check_hypotheses(const PotentialField& p, const DomainGrid& grid);

/// Everything downstream modules need about one (potential, domain) pair.
struct Landscape {
    PotentialField potential;
    DomainGrid grid;
    std::vector<CriticalPoint> critical_points;
    std::vector<BoundaryMinimum> zs;
    std::optional<HypothesisReport> report;

    /// Interior minima attaining the global minimum value (ties at 1e-9).
    [[nodiscard]] std::vector<CriticalPoint> global_minima() const;
    [[nodiscard]] CriticalPoint x0() const;
    [[nodiscard]] int n0() const { return count_global(zs); }
    /// Channel index (0-based, in zs order) whose basin contains boundary point x.
    [[nodiscard]] std::optional<int> channel_of(const Vec& x) const;
};

Landscape analyze(const PotentialField& p, const DomainGrid& grid, bool with_report = true);

}  // namespace exitlab
