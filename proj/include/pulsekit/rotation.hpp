#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace pulsekit {

// Rotation about a unit axis by an accumulated angle psi.
struct AxisAngle {
    Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
    double angle = 0.0;
};

using SpinPropagator = Eigen::Matrix2cd;

const Eigen::Matrix2cd& pauli(int i);  // 0 = x, 1 = y, 2 = z

// P = cos(psi/2) - i sin(psi/2) (sigma . axis).
// Throws std::domain_error unless |axis| = 1 within 1e-12.
SpinPropagator propagator(const AxisAngle& aa);

// The 3x3 rotation matrix D_axis(-psi); its columns are the toggling-frame
// coupling directions n_{i,j}. Column j expands P^{-1} sigma_j P in the
// Pauli basis.
Eigen::Matrix3d rotation_matrix(const AxisAngle& aa);

// Pointwise inverse kinematics: the drive vector that realizes a trajectory
// with instantaneous axis/angle derivatives axis_dot, angle_dot:
//   2 v = psi' a + a' sin(psi) - (1 - cos(psi)) (a' x a).
Eigen::Vector3d drive_from_axis_angle(const AxisAngle& aa, const Eigen::Vector3d& axis_dot,
                                      double angle_dot);

// Same, with the derivatives taken by central differences of a path.
Eigen::Vector3d drive_from_axis_angle_path(const std::function<AxisAngle(double)>& path, double t,
                                           double h = 1e-6);

struct TrajectoryOptions {
    double tol = 1e-10;     // propagator agreement between step doublings
    int max_doublings = 22;
    std::vector<double> breakpoints;  // known discontinuities of v(t)
};

// Integrates i P' = (sigma . v(t)) P on [0, 1] with midpoint-evaluated
// exponentials, halving the step until two successive resolutions agree,
// and extracts (axis, angle) at samples t_k = k / steps. Where the angle
// passes a multiple of 2 pi the axis is held from the previous sample.
std::vector<AxisAngle> axis_angle_from_v(const std::function<Eigen::Vector3d(double)>& v,
                                         int steps, const TrajectoryOptions& opts = {});

}  // namespace pulsekit
