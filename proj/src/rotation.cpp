#include "pulsekit/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pulsekit {

namespace {

using namespace std::complex_literals;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_unit_axis(const Eigen::Vector3d& axis) {
    if (std::abs(axis.norm() - 1.0) > 1e-12)
        throw std::domain_error("axis-angle: axis must be a unit vector");
}

// exp(-i sigma . w) in closed form.
Eigen::Matrix2cd su2_exp(const Eigen::Vector3d& w) {
    const double n = w.norm();
    Eigen::Matrix2cd u = std::cos(n) * Eigen::Matrix2cd::Identity();
    if (n > 0.0) {
        const Eigen::Vector3d a = w / n;
        const std::complex<double> s = -1i * std::sin(n);
        u(0, 0) += s * a.z();
        u(1, 1) -= s * a.z();
        u(0, 1) += s * (a.x() - 1i * a.y());
        u(1, 0) += s * (a.x() + 1i * a.y());
    }
    return u;
}

// U = alpha I - i beta . sigma for a special-unitary U.
void su2_components(const Eigen::Matrix2cd& u, double& alpha, Eigen::Vector3d& beta) {
    alpha = 0.5 * (u(0, 0) + u(1, 1)).real();
    beta.x() = 0.5 * (1i * (u(0, 1) + u(1, 0))).real();
    beta.y() = 0.5 * (u(1, 0) - u(0, 1)).real();
    beta.z() = 0.5 * (1i * (u(0, 0) - u(1, 1))).real();
}

}  // namespace

const Eigen::Matrix2cd& pauli(int i) {
    static const Eigen::Matrix2cd sx = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
    static const Eigen::Matrix2cd sy = (Eigen::Matrix2cd() << 0, -1i, 1i, 0).finished();
    static const Eigen::Matrix2cd sz = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
    switch (i) {
        case 0: return sx;
        case 1: return sy;
        default: return sz;
    }
}

SpinPropagator propagator(const AxisAngle& aa) {
    check_unit_axis(aa.axis);
    return su2_exp(0.5 * aa.angle * aa.axis);
}

Eigen::Matrix3d rotation_matrix(const AxisAngle& aa) {
    check_unit_axis(aa.axis);
    const double c = std::cos(aa.angle), s = std::sin(aa.angle);
    const Eigen::Vector3d& a = aa.axis;
    Eigen::Matrix3d cross;
    cross << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    return c * Eigen::Matrix3d::Identity() - s * cross + (1.0 - c) * a * a.transpose();
}

Eigen::Vector3d drive_from_axis_angle(const AxisAngle& aa, const Eigen::Vector3d& axis_dot,
                                      double angle_dot) {
    check_unit_axis(aa.axis);
    const double c = std::cos(aa.angle), s = std::sin(aa.angle);
    return 0.5 * (angle_dot * aa.axis + s * axis_dot - (1.0 - c) * axis_dot.cross(aa.axis));
}

Eigen::Vector3d drive_from_axis_angle_path(const std::function<AxisAngle(double)>& path, double t,
                                           double h) {
    const double lo = std::max(0.0, t - h), hi = std::min(1.0, t + h);
    const AxisAngle a0 = path(lo), a1 = path(hi);
    const AxisAngle mid = path(t);
    const Eigen::Vector3d axis_dot = (a1.axis - a0.axis) / (hi - lo);
    const double angle_dot = (a1.angle - a0.angle) / (hi - lo);
    return drive_from_axis_angle(mid, axis_dot, angle_dot);
}

std::vector<AxisAngle> axis_angle_from_v(const std::function<Eigen::Vector3d(double)>& v,
                                         int steps, const TrajectoryOptions& opts) {
    if (steps < 1) throw std::invalid_argument("axis_angle_from_v: steps must be >= 1");

    // Extraction grid: fine enough that the half-angle moves well under
    // pi between samples.
    double vmax = 0.0;
    for (int i = 0; i <= 2048; ++i) vmax = std::max(vmax, v(i / 2048.0).norm());
    int per_sample = 1;
    while (steps * per_sample < 4.0 * vmax || steps * per_sample < 64) per_sample *= 2;
    const int n_ext = steps * per_sample;

    // Cells per extraction interval, split at the known discontinuities of
    // v so midpoint steps never straddle a jump.
    std::vector<double> breaks = opts.breakpoints;
    std::sort(breaks.begin(), breaks.end());
    std::vector<std::vector<double>> cells(n_ext);
    for (int k = 0; k < n_ext; ++k) {
        const double a = static_cast<double>(k) / n_ext;
        const double b = static_cast<double>(k + 1) / n_ext;
        cells[k] = {a};
        for (double bp : breaks)
            if (bp > a + 1e-15 && bp < b - 1e-15) cells[k].push_back(bp);
        cells[k].push_back(b);
    }

    // Integrate with `substeps` midpoint exponentials per cell, recording
    // the propagator on the extraction grid.
    auto integrate = [&](int substeps, std::vector<Eigen::Matrix2cd>& record) {
        record.assign(n_ext + 1, Eigen::Matrix2cd::Identity());
        Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
        for (int k = 0; k < n_ext; ++k) {
            for (std::size_t c = 0; c + 1 < cells[k].size(); ++c) {
                const double dt = (cells[k][c + 1] - cells[k][c]) / substeps;
                for (int s = 0; s < substeps; ++s)
                    u = su2_exp(dt * v(cells[k][c] + (s + 0.5) * dt)) * u;
            }
            record[k + 1] = u;
        }
        return u;
    };

    std::vector<Eigen::Matrix2cd> record;
    Eigen::Matrix2cd prev_final = integrate(1, record);
    bool converged = false;
    int substeps = 1;
    for (int d = 0; d < opts.max_doublings; ++d) {
        substeps *= 2;
        std::vector<Eigen::Matrix2cd> next_record;
        Eigen::Matrix2cd refined = integrate(substeps, next_record);
        record.swap(next_record);
        if ((refined - prev_final).norm() < opts.tol) {
            converged = true;
            break;
        }
        prev_final = refined;
    }
    if (!converged)
        throw std::runtime_error("axis_angle_from_v: step halving did not converge");

    // Extract (axis, half-angle) along the fine grid, choosing the branch
    // that stays continuous. Where sin(psi/2) ~ 0 the axis is held.
    std::vector<AxisAngle> fine(n_ext + 1);
    Eigen::Vector3d axis_prev = Eigen::Vector3d::UnitY();
    for (int i = 0; i <= 2048; ++i) {
        const Eigen::Vector3d w = v(i / 2048.0);
        if (w.norm() > 1e-12) {
            axis_prev = w.normalized();
            break;
        }
    }
    double h_prev = 0.0;
    const double dt_ext = 1.0 / n_ext;
    for (int k = 0; k <= n_ext; ++k) {
        double h_pred = h_prev;
        if (k > 0) h_pred += v((k - 0.5) * dt_ext).dot(axis_prev) * dt_ext;

        double alpha;
        Eigen::Vector3d beta;
        su2_components(record[k], alpha, beta);
        const double bn = beta.norm();

        double h;
        Eigen::Vector3d axis;
        if (bn < 1e-9) {
            // Angle at a multiple of 2 pi: keep the previous axis.
            axis = axis_prev;
            const double base = std::atan2(bn, alpha);
            double best = 0.0, best_err = std::numeric_limits<double>::infinity();
            for (double cand : {base, -base}) {
                const double k2pi = std::round((h_pred - cand) / kTwoPi);
                const double val = cand + kTwoPi * k2pi;
                if (std::abs(val - h_pred) < best_err) {
                    best_err = std::abs(val - h_pred);
                    best = val;
                }
            }
            h = best;
        } else {
            const Eigen::Vector3d a_raw = beta / bn;
            const double h_raw = std::atan2(bn, alpha);
            double best_err = std::numeric_limits<double>::infinity();
            h = 0.0;
            axis = a_raw;
            for (int sgn : {+1, -1}) {
                const double cand = sgn * h_raw;
                const double k2pi = std::round((h_pred - cand) / kTwoPi);
                const double val = cand + kTwoPi * k2pi;
                if (std::abs(val - h_pred) < best_err) {
                    best_err = std::abs(val - h_pred);
                    h = val;
                    axis = sgn * a_raw;
                }
            }
        }
        fine[k] = {axis, 2.0 * h};
        axis_prev = axis;
        h_prev = h;
    }

    std::vector<AxisAngle> out(steps + 1);
    for (int k = 0; k <= steps; ++k) out[k] = fine[k * per_sample];
    return out;
}

}  // namespace pulsekit
