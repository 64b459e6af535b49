#pragma once

#include "exitlab/landscape.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exitlab {

enum class Provenance { Spectral, EkBoundary, EkInterior, User };

std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

struct RateEntry {
    int channel = 0;
    double rate = 0.0;  // 1/time
    Provenance provenance = Provenance::User;
};

struct RateTable {
    std::vector<RateEntry> entries;
    double h = 0.0;

    [[nodiscard]] double total() const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    [[nodiscard]] double rate(std::size_t i) const { return entries.at(i).rate; }
    /// Throws InvalidArgument on a negative or non-finite rate.
    void validate() const;
    static RateTable from_rates(std::span<const double> rates, Provenance prov, double h = 0.0);
};

struct SaddleData {
    double f_saddle = 0.0;
    double f_min = 0.0;
    double negative_eigenvalue = -1.0;  // lambda(z) < 0
    double det_hess_min = 1.0;
    double abs_det_hess_saddle = 1.0;
};

/// Curvature data of the deepest well(s). With several global minima (exact
/// ties) the determinant is the effective one, (sum_k det_k^{-1/2})^{-2},
/// which reduces to det Hess f(x_0) for a single minimum.
struct WellData {
    double f_min = 0.0;
    double det_hess = 1.0;
    int dim = 1;

    static WellData from(const CriticalPoint& x0, int dim);
    static WellData from(std::span<const CriticalPoint> global_minima, int dim);
};

double ek_rate_interior(const SaddleData& s, double h, bool half_factor);
double ek_rate_boundary(const BoundaryMinimum& z, const WellData& well, double h);
double ek_rate_boundary(const BoundaryMinimum& z, const CriticalPoint& x0, double h);

/// Sum of the boundary rates over the n0 global boundary minima.
double lambda_asymptotic(const Landscape& l, double h);
double lambda_asymptotic(std::span<const BoundaryMinimum> zs, const WellData& well, double h);

double uh_integral_asymptotic(const WellData& well, double h);
double uh_integral_asymptotic(const CriticalPoint& x0, double h, int dim);

/// C_i(h), negative under positive normal derivative.
double boundary_flux_constant(const BoundaryMinimum& z, const WellData& well, double h);

enum class WeightMode { GlobalMinima, ContactSet };

struct ExitWeights {
    std::vector<double> weights;  // one per boundary minimum, in zs order
    WeightMode mode = WeightMode::GlobalMinima;
    bool hypothesis_violation = false;  // advisory only
};

/// GlobalMinima mode: normalised d_n f / sqrt(det T) over the n0 global minima,
/// times exp(-2(f(z_i)-f(z_1))/h) for every z_i (relative weights).
/// ContactSet mode: the a_i over the boundary contacts of the component C.
ExitWeights exit_weights(const Landscape& l, double h);
double exit_weight(const Landscape& l, std::size_t i, double h);

double bovier_eigenvalue(const SaddleData& s, double h);

/// Rate table of boundary Eyring-Kramers rates for every z_i.
RateTable ek_rate_table(const Landscape& l, double h);

}  // namespace exitlab
