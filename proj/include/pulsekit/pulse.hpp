#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace pulsekit {

// One constant-amplitude piece of a composite waveform. `end` is the
// switch instant in units of the pulse duration; the piece covers
// [previous end, end) with the last piece closed at 1.
struct Segment {
    double end = 1.0;
    double amplitude = 0.0;  // in units of 1/tau_p
};

// Truncated Fourier series v(t) = constant + sum_k cos_coeffs[k-1] cos(2 pi k t)
//                                          + sum_k sin_coeffs[k-1] sin(2 pi k t).
struct HarmonicSeries {
    double constant = 0.0;
    std::vector<double> cos_coeffs;
    std::vector<double> sin_coeffs;
};

// A control waveform v(t) on normalized time [0, 1] rotating the spin
// about a fixed axis, with target net angle theta.
struct PulseShape {
    enum class Kind { Piecewise, Harmonic };

    Kind kind = Kind::Piecewise;
    double theta = 0.0;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitY();
    std::vector<Segment> segments;  // Kind::Piecewise only
    HarmonicSeries harmonics;       // Kind::Harmonic only

    // Validating factories. Construction fails unless segment instants are
    // strictly increasing up to 1, amplitudes are finite, and the net angle
    // matches theta (up to overall sign) within angle_tol. The designer
    // builds trial shapes directly and skips these checks.
    static PulseShape piecewise(double theta, std::vector<Segment> segments,
                                const Eigen::Vector3d& axis = Eigen::Vector3d::UnitY(),
                                double angle_tol = 1e-4);
    static PulseShape harmonic(double theta, HarmonicSeries series,
                               const Eigen::Vector3d& axis = Eigen::Vector3d::UnitY(),
                               double angle_tol = 1e-4);
};

// Throws std::invalid_argument if the shape violates its invariants.
void validate_pulse(const PulseShape& pulse, double angle_tol = 1e-4);

// v(t) for t in [0, 1]; piecewise lookup is right-continuous at switches.
// Throws std::domain_error outside [0, 1].
double eval_amplitude(const PulseShape& pulse, double t);

// psi(t) = 2 * integral of v over [0, t]: exact per-segment sums for
// piecewise shapes, closed-form antiderivatives for harmonic ones.
double accumulated_angle(const PulseShape& pulse, double t);

// True if v(t) == v(1-t) at a dense sample of instants.
bool is_symmetric(const PulseShape& pulse, double tol = 1e-9);

enum class CorrectionOrder { First, Second };
enum class Symmetry { Symmetric, Asymmetric };

struct CatalogEntry {
    std::string name;
    PulseShape shape;
    CorrectionOrder order = CorrectionOrder::First;
    Symmetry symmetry = Symmetry::Symmetric;
    std::string family;          // designer family that reproduces this entry
    std::vector<double> params;  // parameter vector in that family's layout
};

// The named pulses with amplitudes and switch instants as published.
const std::vector<CatalogEntry>& catalog();

// Case-insensitive lookup; nullptr if absent.
const CatalogEntry* find_catalog_entry(std::string_view name);

// Catalog lookup extended with the plain constant pulses CONST-Pi and
// CONST-Pi2 (no correction orders cancelled). Throws std::invalid_argument
// for unknown names.
PulseShape resolve_pulse_name(std::string_view name);

}  // namespace pulsekit
