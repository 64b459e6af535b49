#include "exitlab/stats.hpp"

#include "exitlab/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace exitlab::stats {

double kolmogorov_q(double t) {
    if (t < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * t * t);
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double stephens(double d, double n_eff) {
    const double s = std::sqrt(n_eff);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

TestResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error(ErrorCode::BadSample, "empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return {d, stephens(d, n), 0.0};
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::BadSample, "empty sample");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return {d, stephens(d, na * nb / (na + nb)), 0.0};
}

double chi2_sf(double x, double dof) {
    if (dof <= 0.0) return 1.0;
    if (x <= 0.0) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

TestResult chi2_goodness_of_fit(std::span<const double> observed, std::span<const double> probabilities) {
    if (observed.size() != probabilities.size() || observed.empty())
        throw Error(ErrorCode::InvalidArgument, "observed/probability size mismatch");
    const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
    if (n <= 0.0) throw Error(ErrorCode::BadSample, "no observations");
    double stat = 0.0;
    int cells = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = n * probabilities[i];
        if (e <= 0.0) {
            if (observed[i] > 0.0) return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
            continue;
        }
        stat += (observed[i] - e) * (observed[i] - e) / e;
        ++cells;
    }
    const double dof = cells - 1;
    return {stat, chi2_sf(stat, dof), dof};
}

TestResult chi2_contingency(const std::vector<std::vector<double>>& table) {
    if (table.empty()) throw Error(ErrorCode::BadSample, "empty table");
    const std::size_t cols = table.front().size();
    std::vector<double> rs;
    std::vector<std::size_t> rows_kept;
    std::vector<double> cs(cols, 0.0);
    for (std::size_t r = 0; r < table.size(); ++r) {
        if (table[r].size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged table");
        const double s = std::accumulate(table[r].begin(), table[r].end(), 0.0);
        if (s <= 0.0) continue;
        rows_kept.push_back(r);
        rs.push_back(s);
        for (std::size_t c = 0; c < cols; ++c) cs[c] += table[r][c];
    }
    const double n = std::accumulate(rs.begin(), rs.end(), 0.0);
    if (n <= 0.0) throw Error(ErrorCode::BadSample, "empty table");
    double stat = 0.0;
    int ncols = 0;
    for (std::size_t c = 0; c < cols; ++c) {
        if (cs[c] <= 0.0) continue;
        ++ncols;
        for (std::size_t k = 0; k < rows_kept.size(); ++k) {
            const double e = rs[k] * cs[c] / n;
            const double o = table[rows_kept[k]][c];
            stat += (o - e) * (o - e) / e;
        }
    }
    const double dof = static_cast<double>((static_cast<int>(rows_kept.size()) - 1) * (ncols - 1));
    return {stat, chi2_sf(stat, dof), dof};
}

TestResult chi2_two_sample(std::span<const double> counts_a, std::span<const double> counts_b) {
    if (counts_a.size() != counts_b.size()) throw Error(ErrorCode::InvalidArgument, "category count mismatch");
    return chi2_contingency({std::vector<double>(counts_a.begin(), counts_a.end()),
                             std::vector<double>(counts_b.begin(), counts_b.end())});
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "histogram size mismatch");
    const double sa = std::accumulate(a.begin(), a.end(), 0.0);
    const double sb = std::accumulate(b.begin(), b.end(), 0.0);
    if (sa <= 0.0 || sb <= 0.0) throw Error(ErrorCode::BadSample, "empty histogram");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] / sa - b[i] / sb);
    return 0.5 * d;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "need >= 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw Error(ErrorCode::InvalidArgument, "degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (x.size() > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            ss += r * r;
        }
        fit.slope_stderr = std::sqrt(ss / static_cast<double>(x.size() - 2) / sxx);
    }
    return fit;
}

double mean(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorCode::BadSample, "empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw Error(ErrorCode::BadSample, "need >= 2 samples");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw Error(ErrorCode::BadSample, "empty sample");
    std::sort(x.begin(), x.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(x.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= x.size()) return x.back();
    return x[i] + (pos - static_cast<double>(i)) * (x[i + 1] - x[i]);
}

}  // namespace exitlab::stats
