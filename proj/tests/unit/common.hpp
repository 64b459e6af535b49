#pragma once

#include "exitlab/domain.hpp"
#include "exitlab/landscape.hpp"
#include "exitlab/potential.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace testing_support {

inline exitlab::DomainGrid catalog_grid(const std::string& id, int nodes) {
    return exitlab::DomainGrid::uniform(exitlab::default_domain(id), nodes);
}

inline exitlab::Landscape catalog_landscape(const std::string& id, int nodes, bool report = true) {
    return exitlab::analyze(exitlab::catalog::by_id(id), catalog_grid(id, nodes), report);
}

/// Plain bisection on a sign change of g over [a,b].
inline double bisect(const std::function<double(double)>& g, double a, double b) {
    double ga = g(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm < 0) == (ga < 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& g, double a, double b, int n = 20000) {
    const double dx = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * dx);
    return s * dx / 3.0;
}

}  // namespace testing_support
