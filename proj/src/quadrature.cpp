#include "pulsekit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pulsekit {

namespace {

// Nodes/weights by Newton iteration on the Legendre polynomial P_n.
GaussLegendre compute_rule(int n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
    GaussLegendre r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-like initial guess for the i-th root.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Recurrence for P_n(x) and derivative.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

const GaussLegendre& GaussLegendre::rule(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& r = GaussLegendre::rule(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
    return sum * half;
}

std::vector<double> make_panels(const std::vector<double>& breakpoints, int min_panels) {
    std::vector<double> knots = {0.0, 1.0};
    for (double b : breakpoints)
        if (b > 0.0 && b < 1.0) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    const double max_len = 1.0 / static_cast<double>(min_panels);
    std::vector<double> panels;
    panels.push_back(0.0);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const int splits = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
        for (int s = 1; s <= splits; ++s) panels.push_back(a + (b - a) * s / splits);
    }
    panels.back() = 1.0;
    return panels;
}

}  // namespace pulsekit
