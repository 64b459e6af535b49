#include "exitlab/rates.hpp"

#include "exitlab/error.hpp"

#include <cmath>
#include <numbers>

namespace exitlab {

namespace {
constexpr double kPi = std::numbers::pi;

bool separated_minima(const Landscape& l) { return l.report && l.report->h1 && l.report->h2 && l.report->h3; }
bool single_well_contacts(const Landscape& l) { return l.report && l.report->h_morse && l.report->h_min; }
}  // namespace

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::Spectral: return "spectral";
        case Provenance::EkBoundary: return "ek_boundary";
        case Provenance::EkInterior: return "ek_interior";
        case Provenance::User: return "user";
    }
    return "user";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "spectral") return Provenance::Spectral;
    if (s == "ek_boundary") return Provenance::EkBoundary;
    if (s == "ek_interior") return Provenance::EkInterior;
    if (s == "user") return Provenance::User;
    throw Error(ErrorCode::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

double RateTable::total() const noexcept {
    double s = 0.0;
    for (const auto& e : entries) s += e.rate;
    return s;
}

void RateTable::validate() const {
    for (const auto& e : entries)
        if (!std::isfinite(e.rate) || e.rate < 0.0)
            throw Error(ErrorCode::InvalidArgument, "rates must be finite and non-negative");
}

RateTable RateTable::from_rates(std::span<const double> rates, Provenance prov, double h) {
    RateTable t;
    t.h = h;
    for (std::size_t i = 0; i < rates.size(); ++i) t.entries.push_back({static_cast<int>(i), rates[i], prov});
    t.validate();
    return t;
}

WellData WellData::from(const CriticalPoint& x0, int dim) { return {x0.f_value, x0.det_hess(), dim}; }

WellData WellData::from(std::span<const CriticalPoint> minima, int dim) {
    if (minima.empty()) throw Error(ErrorCode::InvalidArgument, "no minima");
    double s = 0.0;
    double fmin = minima.front().f_value;
    for (const auto& m : minima) {
        s += 1.0 / std::sqrt(m.det_hess());
        fmin = std::min(fmin, m.f_value);
    }
    return {fmin, 1.0 / (s * s), dim};
}

double ek_rate_interior(const SaddleData& s, double h, bool half_factor) {
    const double pref = std::abs(s.negative_eigenvalue) / (2.0 * kPi) * std::sqrt(s.det_hess_min) /
                        std::sqrt(s.abs_det_hess_saddle);
    return (half_factor ? 0.5 : 1.0) * pref * std::exp(-2.0 * (s.f_saddle - s.f_min) / h);
}

double ek_rate_boundary(const BoundaryMinimum& z, const WellData& w, double h) {
    return z.normal_derivative / std::sqrt(kPi * h) * std::sqrt(w.det_hess) / std::sqrt(z.tangential_hess_det) *
           std::exp(-2.0 * (z.f_value - w.f_min) / h);
}

double ek_rate_boundary(const BoundaryMinimum& z, const CriticalPoint& x0, double h) {
    return ek_rate_boundary(z, WellData::from(x0, 1), h);
}

double lambda_asymptotic(std::span<const BoundaryMinimum> zs, const WellData& well, double h) {
    const int n0 = count_global(std::vector<BoundaryMinimum>(zs.begin(), zs.end()));
    double s = 0.0;
    for (int i = 0; i < n0; ++i) s += ek_rate_boundary(zs[static_cast<std::size_t>(i)], well, h);
    return s;
}

double lambda_asymptotic(const Landscape& l, double h) {
    const auto mins = l.global_minima();
    return lambda_asymptotic(l.zs, WellData::from(mins, l.grid.dim()), h);
}

double uh_integral_asymptotic(const WellData& w, double h) {
    const double d = w.dim;
    return std::pow(kPi, d / 4.0) * std::pow(w.det_hess, -0.25) * std::pow(h, d / 4.0) * std::exp(-w.f_min / h);
}

double uh_integral_asymptotic(const CriticalPoint& x0, double h, int dim) {
    return uh_integral_asymptotic(WellData::from(x0, dim), h);
}

double boundary_flux_constant(const BoundaryMinimum& z, const WellData& w, double h) {
    const double d = w.dim;
    return -std::pow(w.det_hess, 0.25) * z.normal_derivative * 2.0 * std::pow(kPi, (d - 2.0) / 4.0) /
           std::sqrt(z.tangential_hess_det) * std::pow(h, (d - 6.0) / 4.0);
}

ExitWeights exit_weights(const Landscape& l, double h) {
    ExitWeights out;
    const std::size_t n = l.zs.size();
    out.weights.assign(n, 0.0);
    if (n == 0) return out;
    const bool t1 = separated_minima(l);
    const bool t2 = single_well_contacts(l);
    if (!t1 && t2 && !l.report->boundary_contacts.empty()) {
        out.mode = WeightMode::ContactSet;
        double norm = 0.0;
        std::vector<char> contact(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& c : l.report->boundary_contacts)
                if ((c - l.zs[i].location).norm() < 1e-9) contact[i] = 1;
            if (contact[i]) norm += l.zs[i].normal_derivative / std::sqrt(l.zs[i].tangential_hess_det);
        }
        for (std::size_t i = 0; i < n; ++i)
            if (contact[i]) out.weights[i] = l.zs[i].normal_derivative / std::sqrt(l.zs[i].tangential_hess_det) / norm;
        return out;
    }
    out.mode = WeightMode::GlobalMinima;
    out.hypothesis_violation = !t1 && !t2;
    const int n0 = l.n0();
    double norm = 0.0;
    for (int i = 0; i < n0; ++i) {
        const auto& z = l.zs[static_cast<std::size_t>(i)];
        norm += z.normal_derivative / std::sqrt(z.tangential_hess_det);
    }
    const double fz1 = l.zs.front().f_value;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& z = l.zs[i];
        out.weights[i] = z.normal_derivative / std::sqrt(z.tangential_hess_det) / norm *
                         std::exp(-2.0 * (z.f_value - fz1) / h);
    }
    return out;
}

double exit_weight(const Landscape& l, std::size_t i, double h) { return exit_weights(l, h).weights.at(i); }

double bovier_eigenvalue(const SaddleData& s, double h) { return ek_rate_interior(s, h, false); }

RateTable ek_rate_table(const Landscape& l, double h) {
    const auto mins = l.global_minima();
    const WellData w = WellData::from(mins, l.grid.dim());
    RateTable t;
    t.h = h;
    for (std::size_t i = 0; i < l.zs.size(); ++i) {
        // only points with outward-increasing f act as generalised saddles
        const double k = l.zs[i].normal_derivative > 0 ? ek_rate_boundary(l.zs[i], w, h) : 0.0;
        t.entries.push_back({static_cast<int>(i), k, Provenance::EkBoundary});
    }
    return t;
}

}  // namespace exitlab
