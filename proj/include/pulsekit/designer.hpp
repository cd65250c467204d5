#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsekit/corrections.hpp"
#include "pulsekit/pulse.hpp"

namespace pulsekit {

// Parametrized pulse families. Parameter layouts (all amplitudes signed,
// instants as fractions of the pulse duration):
//   Composite3Asym: (A, tau1, tau2)        segments (A, -A, A)
//   Composite3Sym:  (A, tau1)              segments (A, -A, A), switches tau1, 1-tau1
//   Composite5Sym:  (u, w, tau1, tau2)     segments (u, -u, w, -u, u)
//   Composite6Asym: (A, tau1..tau5)        segments alternating (A, -A, ...)
//   Harmonic38:     (a)                    theta/2 + (a-theta/2)c1 - a c2
//   Harmonic39:     (a, b)                 Harmonic38 + b s1 - (b/2) s2
//   Harmonic40:     (a, b, c)              theta/2 + (a-theta/2)c1 + (b-a)c2
//                                          + (c-b)c3 - c c4
// (ck, sk shorthand for cos/sin(2 pi k t).)
enum class Family {
    Composite3Asym,
    Composite3Sym,
    Composite5Sym,
    Composite6Asym,
    Harmonic38,
    Harmonic39,
    Harmonic40,
};

enum class TargetResidual { Eta11, Eta12, Eta21, Eta22, Eta23 };

struct DesignProblem {
    Family family = Family::Composite3Asym;
    double theta = 0.0;
    // Residuals to drive to zero; empty selects the family default. For
    // composite families the net-angle condition psi(1) = theta is always
    // included as an extra residual row; the harmonic ansatz satisfies it
    // identically.
    std::vector<TargetResidual> targets;
    Eigen::VectorXd guess;
    double tol = 1e-11;
    int max_iterations = 200;
    double fd_step = 1e-7;  // relative central-difference step
};

struct SolveReport {
    int iterations = 0;
    double residual_norm = 0.0;
    Eigen::VectorXd residuals;
};

struct DesignResult {
    PulseShape pulse;
    Eigen::VectorXd params;
    SolveReport report;
};

struct SingularJacobianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Carries the best iterate reached before the iteration or step budget
// ran out.
struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& what, DesignResult best_iterate)
        : std::runtime_error(what), best(std::move(best_iterate)) {}
    DesignResult best;
};

int parameter_count(Family family);
std::vector<TargetResidual> default_targets(Family family, double theta);
const char* family_name(Family family);
Family family_from_name(std::string_view name);

// True if the parameter vector yields a well-formed pulse (finite values,
// ordered switch instants inside (0, 1)).
bool valid_parameters(Family family, double theta, const Eigen::VectorXd& params);

// Builds the trial shape for a parameter vector without the net-angle
// validation (solver iterates violate it until convergence).
PulseShape build_pulse(Family family, double theta, const Eigen::VectorXd& params);

// Damped Newton with central-difference Jacobian. Returns a pulse whose
// selected residuals and net-angle condition hold to problem.tol. Throws
// SingularJacobianError or NonConvergenceError (with the best iterate).
DesignResult solve(const DesignProblem& problem);

// Re-solves a catalog entry from its printed parameters down to solver
// tolerance. Table values are rounded to six digits, which leaves residuals
// of order 1e-6; scaling experiments need the exact root.
DesignResult refine_catalog_entry(const CatalogEntry& entry, double tol = 1e-12);

struct MaxAmplitude {
    double value = 0.0;     // max |v(t)|, in 1/tau_p
    double location = 0.0;  // fraction of tau_p
};

// Global maximum of |v(t)| by dense sampling plus local refinement.
MaxAmplitude max_amplitude(const PulseShape& pulse);

}  // namespace pulsekit
