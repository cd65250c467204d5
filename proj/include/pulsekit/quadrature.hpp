#pragma once

#include <functional>
#include <vector>

namespace pulsekit {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    // Cached rule of order n (nodes computed once, thread-safe init).
    static const GaussLegendre& rule(int n);
};

// Integral of f over [a, b] with a single n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n = 16);

// Partition of [0, 1] used by the correction integrals: the pulse's
// breakpoints (segment switches) refined until every panel is shorter
// than 1/min_panels.
std::vector<double> make_panels(const std::vector<double>& breakpoints, int min_panels);

}  // namespace pulsekit
