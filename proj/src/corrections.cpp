#include "pulsekit/corrections.hpp"

#include <cmath>
#include <numbers>

#include "pulsekit/quadrature.hpp"

namespace pulsekit {

namespace {

constexpr int kGlOrder = 16;

void check_y_axis(const PulseShape& pulse) {
    if ((pulse.axis - Eigen::Vector3d::UnitY()).norm() > 1e-12)
        throw UnsupportedAxisError(
            "eta_specific: pulse axis must be y (use general_residuals otherwise)");
}

std::vector<double> pulse_breakpoints(const PulseShape& pulse) {
    std::vector<double> b;
    if (pulse.kind == PulseShape::Kind::Piecewise)
        for (const Segment& s : pulse.segments) b.push_back(s.end);
    return b;
}

int initial_panels(const PulseShape& pulse) {
    if (pulse.kind == PulseShape::Kind::Piecewise)
        return std::max<int>(8, 2 * pulse.segments.size());
    // 64 nodes per period of the highest harmonic.
    const std::size_t kmax =
        std::max(pulse.harmonics.cos_coeffs.size(), pulse.harmonics.sin_coeffs.size());
    return std::max<int>(8, static_cast<int>(64 * std::max<std::size_t>(kmax, 1) / kGlOrder));
}

// Exact per-segment antiderivatives. The eta23 double integral reduces to
// a single cumulative pass,
//   eta23 = 2 int [sin(psi) C(t) - cos(psi) S(t)] dt,
// with C, S the running integrals of cos(psi), sin(psi); on a constant
// segment everything integrates in closed form.
CorrectionVector eta_piecewise_closed_form(const PulseShape& pulse) {
    CorrectionVector e;
    double psi = 0.0, t0 = 0.0, big_c = 0.0, big_s = 0.0, eta23_half = 0.0;
    for (const Segment& seg : pulse.segments) {
        const double t1 = seg.end, dt = t1 - t0;
        const double r = 2.0 * seg.amplitude;
        const double psi1 = psi + r * dt;
        double i_sin, i_cos, i_tsin, i_tcos, contrib;
        if (r != 0.0) {
            const double c0 = std::cos(psi), c1 = std::cos(psi1);
            const double s0 = std::sin(psi), s1 = std::sin(psi1);
            i_sin = (c0 - c1) / r;
            i_cos = (s1 - s0) / r;
            i_tsin = t0 * i_sin + (s1 - s0) / (r * r) - dt * c1 / r;
            i_tcos = t0 * i_cos + (c1 - c0) / (r * r) + dt * s1 / r;
            contrib = big_c * i_sin - big_s * i_cos + dt / r - std::sin(r * dt) / (r * r);
        } else {
            const double c0 = std::cos(psi), s0 = std::sin(psi);
            i_sin = s0 * dt;
            i_cos = c0 * dt;
            i_tsin = s0 * 0.5 * (t1 * t1 - t0 * t0);
            i_tcos = c0 * 0.5 * (t1 * t1 - t0 * t0);
            contrib = (s0 * big_c - c0 * big_s) * dt;
        }
        e.eta11 += i_sin;
        e.eta12 += i_cos;
        e.eta21 += i_tsin;
        e.eta22 += i_tcos;
        eta23_half += contrib;
        big_c += i_cos;
        big_s += i_sin;
        psi = psi1;
        t0 = t1;
    }
    e.eta23 = 2.0 * eta23_half;
    return e;
}

CorrectionVector eta_quadrature_pass(const PulseShape& pulse, const std::vector<double>& panels) {
    const auto& gl = GaussLegendre::rule(kGlOrder);
    auto sin_psi = [&](double t) { return std::sin(accumulated_angle(pulse, t)); };
    auto cos_psi = [&](double t) { return std::cos(accumulated_angle(pulse, t)); };

    CorrectionVector e;
    double big_c = 0.0, big_s = 0.0, eta23_half = 0.0;
    for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
        const double a = panels[p], b = panels[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double i_sin = 0.0, i_cos = 0.0;
        for (int q = 0; q < kGlOrder; ++q) {
            const double x = mid + half * gl.nodes[q];
            const double w = half * gl.weights[q];
            const double sp = sin_psi(x), cp = cos_psi(x);
            e.eta11 += w * sp;
            e.eta12 += w * cp;
            e.eta21 += w * x * sp;
            e.eta22 += w * x * cp;
            // Cumulative integrals up to x for the eta23 reduction.
            const double cx = big_c + gl_integrate(cos_psi, a, x, kGlOrder);
            const double sx = big_s + gl_integrate(sin_psi, a, x, kGlOrder);
            eta23_half += w * (sp * cx - cp * sx);
            i_sin += w * sp;
            i_cos += w * cp;
        }
        big_c += i_cos;
        big_s += i_sin;
    }
    e.eta23 = 2.0 * eta23_half;
    return e;
}

double max_abs_diff(const CorrectionVector& a, const CorrectionVector& b) {
    return std::max({std::abs(a.eta11 - b.eta11), std::abs(a.eta12 - b.eta12),
                     std::abs(a.eta21 - b.eta21), std::abs(a.eta22 - b.eta22),
                     std::abs(a.eta23 - b.eta23)});
}

GeneralResiduals general_pass(const std::function<AxisAngle(double)>& traj,
                              const std::vector<double>& panels) {
    const auto& gl = GaussLegendre::rule(kGlOrder);
    auto n_at = [&](double t) { return rotation_matrix(traj(t)); };
    constexpr auto eps = [](int i, int j, int k) -> int {
        if (i == j || j == k || i == k) return 0;
        return ((j - i + 3) % 3 == 1) ? +1 : -1;
    };

    GeneralResiduals r;
    r.first_order.setZero();
    r.second_order_a.setZero();
    std::array<std::array<double, 6>, 3> b_int{};
    std::array<double, 3> c_int{};

    Eigen::Matrix3d big_n = Eigen::Matrix3d::Zero();  // running integral of n
    for (std::size_t p = 0; p + 1 < panels.size(); ++p) {
        const double a = panels[p], b = panels[p + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        Eigen::Matrix3d panel_n = Eigen::Matrix3d::Zero();
        for (int q = 0; q < kGlOrder; ++q) {
            const double x = mid + half * gl.nodes[q];
            const double w = half * gl.weights[q];
            const Eigen::Matrix3d n = n_at(x);
            r.first_order += w * n;
            r.second_order_a += w * x * n;
            panel_n += w * n;

            // Cumulative integral N(x) via a nested rule on [a, x].
            Eigen::Matrix3d cum = big_n;
            {
                const double cmid = 0.5 * (a + x), chalf = 0.5 * (x - a);
                for (int q2 = 0; q2 < kGlOrder; ++q2)
                    cum += chalf * gl.weights[q2] * n_at(cmid + chalf * gl.nodes[q2]);
            }
            int pair = 0;
            for (auto [l, m] : GeneralResiduals::sym_pairs()) {
                for (int i = 0; i < 3; ++i) {
                    double acc = 0.0;
                    for (int j = 0; j < 3; ++j)
                        for (int k = 0; k < 3; ++k)
                            if (int e = eps(i, j, k); e != 0) acc += e * n(j, l) * cum(k, m);
                    b_int[i][pair] += w * acc;
                }
                ++pair;
            }
            pair = 0;
            for (auto [j, k] : GeneralResiduals::antisym_pairs()) {
                double acc = 0.0;
                for (int i = 0; i < 3; ++i) acc += n(i, j) * cum(i, k);
                c_int[pair] += w * acc;
                ++pair;
            }
        }
        big_n += panel_n;
    }

    // int int f(t1) g(t2) sgn(t1-t2) = 2 int f N_g - F(1) G(1).
    int pair = 0;
    for (auto [l, m] : GeneralResiduals::sym_pairs()) {
        for (int i = 0; i < 3; ++i) {
            double boundary = 0.0;
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    if (int e = eps(i, j, k); e != 0) boundary += e * big_n(j, l) * big_n(k, m);
            r.second_order_b[i][pair] = 2.0 * b_int[i][pair] - boundary;
        }
        ++pair;
    }
    pair = 0;
    for (auto [j, k] : GeneralResiduals::antisym_pairs()) {
        double boundary = 0.0;
        for (int i = 0; i < 3; ++i) boundary += big_n(i, j) * big_n(i, k);
        r.second_order_c[pair] = 2.0 * c_int[pair] - boundary;
        ++pair;
    }
    return r;
}

double max_abs_diff(const GeneralResiduals& a, const GeneralResiduals& b) {
    double d = (a.first_order - b.first_order).cwiseAbs().maxCoeff();
    d = std::max(d, (a.second_order_a - b.second_order_a).cwiseAbs().maxCoeff());
    for (int i = 0; i < 3; ++i)
        for (int p = 0; p < 6; ++p)
            d = std::max(d, std::abs(a.second_order_b[i][p] - b.second_order_b[i][p]));
    for (int p = 0; p < 3; ++p)
        d = std::max(d, std::abs(a.second_order_c[p] - b.second_order_c[p]));
    return d;
}

}  // namespace

Eigen::Matrix3d n_matrix(const PulseShape& pulse, double t) {
    return rotation_matrix({pulse.axis, accumulated_angle(pulse, t)});
}

Eigen::Vector3d n_vector(const PulseShape& pulse, double t, int coupling_axis) {
    if (coupling_axis < 0 || coupling_axis > 2)
        throw std::invalid_argument("n_vector: coupling_axis must be 0, 1, or 2");
    return n_matrix(pulse, t).col(coupling_axis);
}

CorrectionVector eta_specific(const PulseShape& pulse) {
    check_y_axis(pulse);
    if (pulse.kind == PulseShape::Kind::Piecewise) return eta_piecewise_closed_form(pulse);
    return eta_specific_quadrature(pulse);
}

CorrectionVector eta_specific_quadrature(const PulseShape& pulse, double tol) {
    check_y_axis(pulse);
    const std::vector<double> breaks = pulse_breakpoints(pulse);
    int panels = initial_panels(pulse);
    CorrectionVector prev = eta_quadrature_pass(pulse, make_panels(breaks, panels));
    for (int iter = 0; iter < 8; ++iter) {
        panels *= 2;
        CorrectionVector next = eta_quadrature_pass(pulse, make_panels(breaks, panels));
        if (max_abs_diff(prev, next) < tol) return next;
        prev = next;
    }
    return prev;
}

CorrectionVector eta_scaled(const CorrectionVector& unit, double tau_p) {
    return {tau_p * unit.eta11, tau_p * unit.eta12, tau_p * tau_p * unit.eta21,
            tau_p * tau_p * unit.eta22, tau_p * tau_p * unit.eta23};
}

GeneralResiduals general_residuals(const std::function<AxisAngle(double)>& trajectory,
                                   const std::vector<double>& breakpoints, double tol) {
    int panels = 16;
    GeneralResiduals prev = general_pass(trajectory, make_panels(breakpoints, panels));
    for (int iter = 0; iter < 7; ++iter) {
        panels *= 2;
        GeneralResiduals next = general_pass(trajectory, make_panels(breakpoints, panels));
        if (max_abs_diff(prev, next) < tol) return next;
        prev = next;
    }
    return prev;
}

GeneralResiduals general_residuals(const PulseShape& pulse, double tol) {
    auto traj = [&pulse](double t) { return AxisAngle{pulse.axis, accumulated_angle(pulse, t)}; };
    return general_residuals(traj, pulse_breakpoints(pulse), tol);
}

}  // namespace pulsekit
