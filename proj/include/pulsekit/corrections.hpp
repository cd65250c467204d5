#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pulsekit/pulse.hpp"
#include "pulsekit/rotation.hpp"

namespace pulsekit {

// First- and second-order correction residuals of a fixed-y-axis pulse
// coupled to the bath along z, with the pulse duration normalized to 1:
//   eta11 = int sin(psi)            eta12 = int cos(psi)
//   eta21 = int t sin(psi)          eta22 = int t cos(psi)
//   eta23 = double int sin(psi(t1) - psi(t2)) sgn(t1 - t2)
// Operator and coupling prefactors are stripped: the integrals vanishing
// makes the corrections vanish for every bath.
struct CorrectionVector {
    double eta11 = 0.0;
    double eta12 = 0.0;
    double eta21 = 0.0;
    double eta22 = 0.0;
    double eta23 = 0.0;
};

struct UnsupportedAxisError : std::domain_error {
    using std::domain_error::domain_error;
};

// Toggling-frame coupling directions: n_matrix(pulse, t) is D_axis(-psi(t));
// column j is the direction an initial j coupling is rotated to.
Eigen::Matrix3d n_matrix(const PulseShape& pulse, double t);
Eigen::Vector3d n_vector(const PulseShape& pulse, double t, int coupling_axis);

// Residuals of a fixed-y-axis pulse. Piecewise shapes use closed-form
// per-segment antiderivatives, harmonic shapes panelled Gauss-Legendre
// quadrature. Throws UnsupportedAxisError when the axis is not y.
CorrectionVector eta_specific(const PulseShape& pulse);

// Pure quadrature route for any fixed-y-axis pulse (cross-check of the
// closed form; same contract).
CorrectionVector eta_specific_quadrature(const PulseShape& pulse, double tol = 1e-11);

// Residuals of the same pulse stretched to physical duration tau_p:
// first order scales as tau_p, second order as tau_p^2.
CorrectionVector eta_scaled(const CorrectionVector& unit, double tau_p);

// The full residual system for a general trajectory: 9 + 9 + 18 + 3 = 39
// scalar integrals. second_order_b is indexed by the spin component i and
// the symmetrized coupling pair (l <= m); diagonal pairs store the raw
// integral (their operator prefactor carries an extra factor of two, which
// does not move the zero set). second_order_c is indexed by the pair j < k.
struct GeneralResiduals {
    Eigen::Matrix3d first_order;                  // int n_ij dt
    Eigen::Matrix3d second_order_a;               // int t n_ij dt
    std::array<std::array<double, 6>, 3> second_order_b{};
    std::array<double, 3> second_order_c{};

    static constexpr std::array<std::pair<int, int>, 6> sym_pairs() {
        return {{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
    }
    static constexpr std::array<std::pair<int, int>, 3> antisym_pairs() {
        return {{{0, 1}, {0, 2}, {1, 2}}};
    }
    static constexpr int count() { return 39; }
};

GeneralResiduals general_residuals(const std::function<AxisAngle(double)>& trajectory,
                                   const std::vector<double>& breakpoints = {},
                                   double tol = 1e-11);

// Convenience overload for fixed-axis pulse shapes.
GeneralResiduals general_residuals(const PulseShape& pulse, double tol = 1e-11);

}  // namespace pulsekit
