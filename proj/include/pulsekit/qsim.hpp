#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsekit/pulse.hpp"

namespace pulsekit {

// A concrete finite-dimensional bath: internal Hamiltonian plus coupling
// operators, all on 2^n_spins dimensions. Coupling operators are normalized
// to unit spectral norm (so lambda is the true coupling scale) or zero when
// the corresponding lambda vanishes.
struct BathSpec {
    int n_spins = 2;
    Eigen::MatrixXcd h_bath;
    std::array<Eigen::MatrixXcd, 3> coupling;
    Eigen::Vector3d lambda = Eigen::Vector3d(0, 0, 1);

    Eigen::Index dim() const { return h_bath.rows(); }
    double omega_b() const;  // spectral norm of h_bath

    // Hermiticity to 1e-12 and unit coupling norms to 1e-10 (for nonzero
    // lambda components). Throws std::invalid_argument.
    void validate() const;
};

enum class CouplingStructure { ZOnly, General };

struct RandomBathConfig {
    std::uint64_t seed = 0;
    int n_spins = 2;
    double omega_b = 1.0;
    Eigen::Vector3d lambda = Eigen::Vector3d(0, 0, 1);
    CouplingStructure structure = CouplingStructure::ZOnly;
};

// Reproducible bath: random two-spin couplings and local fields for h_bath
// (normalized to omega_b) and GUE-style Hermitian coupling operators of
// unit spectral norm. Supports 1 to 4 bath spins.
BathSpec random_bath(const RandomBathConfig& config);

struct EvolveOptions {
    double rel_tol = 0.01;     // successive-iterate distance vs pulse error
    double abs_floor = 1e-12;  // stop refining below this successive distance
    long max_steps = 1L << 21;
};

struct EvolveResult {
    Eigen::MatrixXcd unitary;
    long steps = 0;
    double tolerance = 0.0;  // distance between the last two refinements
    bool converged = false;
    double dist_to_target = 0.0;
};

struct StepBudgetError : std::runtime_error {
    StepBudgetError(const std::string& what, EvolveResult coarse_it, EvolveResult fine_it)
        : std::runtime_error(what), coarse(std::move(coarse_it)), fine(std::move(fine_it)) {}
    EvolveResult coarse;
    EvolveResult fine;
};

// Midpoint-exponential propagation of H(t) = H_b + sigma.A + sigma a v(t/tau_p)/tau_p
// over `steps` steps aligned to the pulse's switch instants (constant
// segments then integrate exactly). Spin factor first in the tensor product.
Eigen::MatrixXcd propagate_fixed(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                                 long steps);

// Step-doubling propagation: refines until the distance between successive
// results drops below max(rel_tol * measured pulse error, abs_floor).
EvolveResult evolve_detailed(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                             long steps = 64, const EvolveOptions& opts = {});

// As evolve_detailed, but throws StepBudgetError (carrying both iterates)
// if the step budget is exhausted before convergence.
Eigen::MatrixXcd evolve(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                        long steps = 64, const EvolveOptions& opts = {});

// The decoupling target exp(-i tau_p H_b) with the pulse's net spin rotation.
Eigen::MatrixXcd target_unitary(const PulseShape& pulse, const BathSpec& bath, double tau_p);

// Global-phase-invariant metric d = sqrt(1 - |tr(U^dag V)| / dim), evaluated
// in the cancellation-free form |e^{-i phi} V - U|_F / sqrt(2 dim).
double distance(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v);

struct ScalingOptions {
    EvolveOptions evolve;
    long initial_steps = 64;
    double exclusion_factor = 100.0;  // drop points with dist < factor * tolerance
    double window = 0.3;              // max tau_p * (omega_b + sum lambda)
    int threads = 1;
};

struct ScalingPoint {
    double tau_p = 0.0;
    double dist = 0.0;
    double tolerance = 0.0;
    long steps = 0;
    bool converged = false;
    bool usable = false;
};

struct ScalingReport {
    std::vector<ScalingPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double fit_rms = 0.0;
    std::vector<std::string> warnings;
};

struct FloorContaminationError : std::runtime_error {
    FloorContaminationError(const std::string& what, ScalingReport partial_report)
        : std::runtime_error(what), partial(std::move(partial_report)) {}
    ScalingReport partial;
};

// Pulse-error distances over a tau_p grid with a least-squares log-log
// slope. Points within exclusion_factor of the integrator tolerance are
// excluded with a warning; fewer than 4 usable points raises
// FloorContaminationError. The grid must be increasing and inside the
// perturbative window.
ScalingReport scaling_exponent(const PulseShape& pulse, const BathSpec& bath,
                               const std::vector<double>& tau_grid,
                               const ScalingOptions& opts = {});

std::vector<double> log_grid(double lo, double hi, int n);

// Kronecker product (first factor on the slow index).
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace pulsekit
