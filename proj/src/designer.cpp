#include "pulsekit/designer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pulsekit {

namespace {

constexpr double kPi = std::numbers::pi;

bool near_pi(double theta) { return std::abs(theta - kPi) < 0.2; }

double eta_component(const CorrectionVector& e, TargetResidual t) {
    switch (t) {
        case TargetResidual::Eta11: return e.eta11;
        case TargetResidual::Eta12: return e.eta12;
        case TargetResidual::Eta21: return e.eta21;
        case TargetResidual::Eta22: return e.eta22;
        default: return e.eta23;
    }
}

bool is_composite(Family f) {
    return f == Family::Composite3Asym || f == Family::Composite3Sym ||
           f == Family::Composite5Sym || f == Family::Composite6Asym;
}

Eigen::VectorXd residual_vector(const DesignProblem& p, const std::vector<TargetResidual>& targets,
                                const Eigen::VectorXd& x) {
    const PulseShape pulse = build_pulse(p.family, p.theta, x);
    const CorrectionVector e = eta_specific(pulse);
    const int extra = is_composite(p.family) ? 1 : 0;
    Eigen::VectorXd r(static_cast<int>(targets.size()) + extra);
    int row = 0;
    if (extra) r(row++) = accumulated_angle(pulse, 1.0) - p.theta;
    for (TargetResidual t : targets) r(row++) = eta_component(e, t);
    return r;
}

}  // namespace

int parameter_count(Family family) {
    switch (family) {
        case Family::Composite3Asym: return 3;
        case Family::Composite3Sym: return 2;
        case Family::Composite5Sym: return 4;
        case Family::Composite6Asym: return 6;
        case Family::Harmonic38: return 1;
        case Family::Harmonic39: return 2;
        default: return 3;
    }
}

std::vector<TargetResidual> default_targets(Family family, double theta) {
    using T = TargetResidual;
    switch (family) {
        case Family::Composite3Asym:
        case Family::Harmonic39:
            return {T::Eta11, T::Eta12};
        case Family::Composite3Sym:
        case Family::Harmonic38:
            // eta12 vanishes (pi) or equals eta11 (pi/2) by symmetry.
            return {T::Eta11};
        case Family::Composite5Sym:
        case Family::Harmonic40:
            // For theta = pi symmetry forces eta21 = eta11/2, so eta22 is the
            // independent dynamic-bath condition; for pi/2 either works.
            return near_pi(theta) ? std::vector<T>{T::Eta11, T::Eta22, T::Eta23}
                                  : std::vector<T>{T::Eta11, T::Eta21, T::Eta23};
        default:
            return {T::Eta11, T::Eta12, T::Eta21, T::Eta22, T::Eta23};
    }
}

const char* family_name(Family family) {
    switch (family) {
        case Family::Composite3Asym: return "composite3-asym";
        case Family::Composite3Sym: return "composite3-sym";
        case Family::Composite5Sym: return "composite5-sym";
        case Family::Composite6Asym: return "composite6-asym";
        case Family::Harmonic38: return "harmonic38";
        case Family::Harmonic39: return "harmonic39";
        default: return "harmonic40";
    }
}

Family family_from_name(std::string_view name) {
    for (Family f : {Family::Composite3Asym, Family::Composite3Sym, Family::Composite5Sym,
                     Family::Composite6Asym, Family::Harmonic38, Family::Harmonic39,
                     Family::Harmonic40})
        if (name == family_name(f)) return f;
    throw std::invalid_argument("unknown design family: " + std::string(name));
}

bool valid_parameters(Family family, double theta, const Eigen::VectorXd& params) {
    (void)theta;
    if (params.size() != parameter_count(family)) return false;
    for (int i = 0; i < params.size(); ++i)
        if (!std::isfinite(params(i))) return false;
    auto ordered = [&](int first, int count, double hi) {
        double prev = 0.0;
        for (int i = first; i < first + count; ++i) {
            if (!(params(i) > prev)) return false;
            prev = params(i);
        }
        return prev < hi;
    };
    switch (family) {
        case Family::Composite3Asym: return ordered(1, 2, 1.0);
        case Family::Composite3Sym: return ordered(1, 1, 0.5);
        case Family::Composite5Sym: return ordered(2, 2, 0.5);
        case Family::Composite6Asym: return ordered(1, 5, 1.0);
        default: return true;
    }
}

PulseShape build_pulse(Family family, double theta, const Eigen::VectorXd& params) {
    if (!valid_parameters(family, theta, params))
        throw std::invalid_argument("build_pulse: invalid parameter vector");
    PulseShape p;
    p.theta = theta;
    switch (family) {
        case Family::Composite3Asym:
            p.kind = PulseShape::Kind::Piecewise;
            p.segments = {{params(1), params(0)}, {params(2), -params(0)}, {1.0, params(0)}};
            return p;
        case Family::Composite3Sym:
            p.kind = PulseShape::Kind::Piecewise;
            p.segments = {{params(1), params(0)},
                          {1.0 - params(1), -params(0)},
                          {1.0, params(0)}};
            return p;
        case Family::Composite5Sym:
            p.kind = PulseShape::Kind::Piecewise;
            p.segments = {{params(2), params(0)},
                          {params(3), -params(0)},
                          {1.0 - params(3), params(1)},
                          {1.0 - params(2), -params(0)},
                          {1.0, params(0)}};
            return p;
        case Family::Composite6Asym: {
            p.kind = PulseShape::Kind::Piecewise;
            p.segments.clear();
            double sign = 1.0;
            for (int i = 1; i <= 5; ++i) {
                p.segments.push_back({params(i), sign * params(0)});
                sign = -sign;
            }
            p.segments.push_back({1.0, sign * params(0)});
            return p;
        }
        case Family::Harmonic38:
            p.kind = PulseShape::Kind::Harmonic;
            p.harmonics = {theta / 2.0, {params(0) - theta / 2.0, -params(0)}, {}};
            return p;
        case Family::Harmonic39:
            p.kind = PulseShape::Kind::Harmonic;
            p.harmonics = {theta / 2.0,
                           {params(0) - theta / 2.0, -params(0)},
                           {params(1), -params(1) / 2.0}};
            return p;
        default:
            p.kind = PulseShape::Kind::Harmonic;
            p.harmonics = {theta / 2.0,
                           {params(0) - theta / 2.0, params(1) - params(0),
                            params(2) - params(1), -params(2)},
                           {}};
            return p;
    }
}

DesignResult solve(const DesignProblem& problem) {
    const int n = parameter_count(problem.family);
    if (problem.guess.size() != n)
        throw std::invalid_argument("solve: guess size does not match family parameter count");
    const std::vector<TargetResidual> targets =
        problem.targets.empty() ? default_targets(problem.family, problem.theta)
                                : problem.targets;
    {
        const int rows = static_cast<int>(targets.size()) + (is_composite(problem.family) ? 1 : 0);
        if (rows != n)
            throw std::invalid_argument("solve: system is not square (" + std::to_string(rows) +
                                        " residuals, " + std::to_string(n) + " parameters)");
    }
    if (!valid_parameters(problem.family, problem.theta, problem.guess))
        throw std::invalid_argument("solve: initial guess violates parameter constraints");

    auto result_at = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r, int iters) {
        DesignResult res{build_pulse(problem.family, problem.theta, x), x,
                         {iters, r.norm(), r}};
        return res;
    };

    Eigen::VectorXd x = problem.guess;
    Eigen::VectorXd r = residual_vector(problem, targets, x);
    int iter = 0;
    for (; iter < problem.max_iterations; ++iter) {
        if (r.lpNorm<Eigen::Infinity>() < problem.tol) return result_at(x, r, iter);

        // Central-difference Jacobian.
        Eigen::MatrixXd jac(n, n);
        for (int j = 0; j < n; ++j) {
            const double h = problem.fd_step * std::max(std::abs(x(j)), 1.0);
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            if (!valid_parameters(problem.family, problem.theta, xp) ||
                !valid_parameters(problem.family, problem.theta, xm))
                throw NonConvergenceError(
                    "solve: iterate too close to the parameter-ordering boundary",
                    result_at(x, r, iter));
            jac.col(j) =
                (residual_vector(problem, targets, xp) - residual_vector(problem, targets, xm)) /
                (2.0 * h);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible())
            throw SingularJacobianError(
                "solve: singular Jacobian at the current iterate; perturb the initial guess");
        const Eigen::VectorXd step = lu.solve(-r);

        // Damping: halve until the residual norm decreases and the ordering
        // constraints stay satisfied.
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 45; ++halving, lambda *= 0.5) {
            const Eigen::VectorXd x_trial = x + lambda * step;
            if (!valid_parameters(problem.family, problem.theta, x_trial)) continue;
            const Eigen::VectorXd r_trial = residual_vector(problem, targets, x_trial);
            if (r_trial.allFinite() && r_trial.norm() < r.norm()) {
                x = x_trial;
                r = r_trial;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw NonConvergenceError("solve: damping stalled (no residual decrease)",
                                      result_at(x, r, iter));
    }
    if (r.lpNorm<Eigen::Infinity>() < problem.tol) return result_at(x, r, iter);
    throw NonConvergenceError("solve: maximum iterations reached", result_at(x, r, iter));
}

DesignResult refine_catalog_entry(const CatalogEntry& entry, double tol) {
    DesignProblem prob;
    prob.family = family_from_name(entry.family);
    prob.theta = entry.shape.theta;
    prob.guess = Eigen::Map<const Eigen::VectorXd>(entry.params.data(),
                                                   static_cast<Eigen::Index>(entry.params.size()));
    prob.tol = tol;
    DesignResult res = solve(prob);
    res.pulse.axis = entry.shape.axis;
    return res;
}

MaxAmplitude max_amplitude(const PulseShape& pulse) {
    if (pulse.kind == PulseShape::Kind::Piecewise) {
        MaxAmplitude best;
        double prev = 0.0;
        for (const Segment& s : pulse.segments) {
            if (std::abs(s.amplitude) > best.value) {
                best.value = std::abs(s.amplitude);
                best.location = 0.5 * (prev + s.end);
            }
            prev = s.end;
        }
        return best;
    }

    auto f = [&](double t) { return std::abs(eval_amplitude(pulse, t)); };
    const int n = 4096;
    int best_i = 0;
    double best_v = -1.0;
    for (int i = 0; i <= n; ++i) {
        const double v = f(static_cast<double>(i) / n);
        if (v > best_v) {
            best_v = v;
            best_i = i;
        }
    }
    // Golden-section refinement on the bracketing interval.
    double a = std::max(0.0, (best_i - 1.0) / n), b = std::min(1.0, (best_i + 1.0) / n);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    const double t_star = 0.5 * (a + b);
    return {f(t_star), t_star};
}

}  // namespace pulsekit
