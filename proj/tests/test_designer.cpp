#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "pulsekit/corrections.hpp"
#include "pulsekit/designer.hpp"
#include "pulsekit/pulse.hpp"
#include "oracles.hpp"

using namespace pulsekit;
constexpr double kPi = std::numbers::pi;

namespace {

Eigen::VectorXd entry_params(const char* name) {
    const CatalogEntry* e = find_catalog_entry(name);
    REQUIRE(e != nullptr);
    return Eigen::Map<const Eigen::VectorXd>(e->params.data(),
                                             static_cast<Eigen::Index>(e->params.size()));
}

// Residuals checked post-hoc by the corrections module, not trusted from
// the solver.
void check_solution(const DesignResult& res, const std::vector<TargetResidual>& targets) {
    const CorrectionVector e = eta_specific(res.pulse);
    for (TargetResidual t : targets) {
        double val = 0.0;
        switch (t) {
            case TargetResidual::Eta11: val = e.eta11; break;
            case TargetResidual::Eta12: val = e.eta12; break;
            case TargetResidual::Eta21: val = e.eta21; break;
            case TargetResidual::Eta22: val = e.eta22; break;
            case TargetResidual::Eta23: val = e.eta23; break;
        }
        CHECK(std::abs(val) < 1e-10);
    }
    CHECK(std::abs(accumulated_angle(res.pulse, 1.0) - res.pulse.theta) < 1e-10);
}

}  // namespace

TEST_CASE("solve: CORPSE-Pi from a nearby guess") {
    DesignProblem prob;
    prob.family = Family::Composite3Asym;
    prob.theta = kPi;
    prob.guess = Eigen::Vector3d(13 * kPi / 6 * 1.04, 1.0 / 13 * 0.96, 6.0 / 13 * 1.03);
    const DesignResult res = solve(prob);
    CHECK(std::abs(res.params(0) - 13 * kPi / 6) < 1e-5);
    CHECK(std::abs(res.params(1) - 1.0 / 13) < 1e-5);
    CHECK(std::abs(res.params(2) - 6.0 / 13) < 1e-5);
    check_solution(res, default_targets(prob.family, prob.theta));
}

TEST_CASE("solve: continuous first-order pulses (Fig. 5 values)") {
    DesignProblem prob;
    prob.family = Family::Harmonic38;
    prob.theta = kPi;
    prob.guess = Eigen::VectorXd::Constant(1, -2.0);
    CHECK(std::abs(solve(prob).params(0) - (-2.159224)) < 1e-5);
    prob.theta = kPi / 2;
    prob.guess = Eigen::VectorXd::Constant(1, -4.8);
    CHECK(std::abs(solve(prob).params(0) - (-5.015588)) < 1e-5);
}

TEST_CASE("solve: continuous second-order pulses (Fig. 7 values)") {
    DesignProblem prob;
    prob.family = Family::Harmonic40;
    prob.theta = kPi;
    prob.guess = Eigen::Vector3d(10.0, 7.0, 2.0);
    DesignResult res = solve(prob);
    CHECK(std::abs(res.params(0) - 10.804433) < 1e-4);
    CHECK(std::abs(res.params(1) - 6.831344) < 1e-4);
    CHECK(std::abs(res.params(2) - 2.174538) < 1e-4);

    prob.theta = kPi / 2;
    prob.targets = {TargetResidual::Eta11, TargetResidual::Eta21, TargetResidual::Eta23};
    prob.guess = Eigen::Vector3d(10.0, 7.0, 0.1);
    res = solve(prob);
    CHECK(std::abs(res.params(0) - 10.925826) < 1e-4);
    CHECK(std::abs(res.params(1) - 6.806775) < 1e-4);
    CHECK(std::abs(res.params(2) - (-0.02696178)) < 1e-4);
    check_solution(res, prob.targets);
    // The symmetric ansatz also kills the untargeted residuals here.
    const CorrectionVector e = eta_specific(res.pulse);
    CHECK(std::abs(e.eta12) < 1e-10);
    CHECK(std::abs(e.eta22) < 1e-10);
}

TEST_CASE("solve: five-segment symmetric second-order pulse (Table I)") {
    DesignProblem prob;
    prob.family = Family::Composite5Sym;
    prob.theta = kPi;
    prob.guess = entry_params("SYM2ND-Pi") +
                 Eigen::Vector4d(0.3, -0.2, 0.0005, -0.004).eval();
    const DesignResult res = solve(prob);
    CHECK(std::abs(res.params(0) - (-10.950120)) < 1e-4);
    CHECK(std::abs(res.params(1) - (-7.695376)) < 1e-4);
    CHECK(std::abs(res.params(2) - 0.022805) < 1e-4);
    CHECK(std::abs(res.params(3) - 0.275269) < 1e-4);
    check_solution(res, default_targets(prob.family, prob.theta));
    CHECK(is_symmetric(res.pulse));
}

TEST_CASE("solve: validates problem shape") {
    DesignProblem prob;
    prob.family = Family::Harmonic38;
    prob.theta = kPi;
    prob.guess = Eigen::Vector2d(1.0, 2.0);
    CHECK_THROWS_AS((void)solve(prob), std::invalid_argument);  // wrong guess size

    prob.guess = Eigen::VectorXd::Constant(1, -2.0);
    prob.targets = {TargetResidual::Eta11, TargetResidual::Eta23};
    CHECK_THROWS_AS((void)solve(prob), std::invalid_argument);  // not square

    DesignProblem bad;
    bad.family = Family::Composite3Asym;
    bad.theta = kPi;
    bad.guess = Eigen::Vector3d(6.0, 0.7, 0.3);  // unordered instants
    CHECK_THROWS_AS((void)solve(bad), std::invalid_argument);
}

TEST_CASE("solve: singular Jacobian reported") {
    // With A ~ 0 the residuals do not respond to the switch instants.
    DesignProblem prob;
    prob.family = Family::Composite3Asym;
    prob.theta = kPi;
    prob.guess = Eigen::Vector3d(1e-14, 0.3, 0.6);
    CHECK_THROWS_AS((void)solve(prob), SingularJacobianError);
}

TEST_CASE("solve: non-convergence carries the best iterate") {
    DesignProblem prob;
    prob.family = Family::Harmonic40;
    prob.theta = kPi;
    prob.guess = Eigen::Vector3d(10.0, 7.0, 2.0);
    prob.max_iterations = 1;
    try {
        (void)solve(prob);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.best.params.size() == 3);
        CHECK(e.best.report.residual_norm < 1.0);  // one damped step happened
        CHECK(e.best.report.iterations >= 1);
    }
}

TEST_CASE("solve: 100 random restarts land on a root, table root included") {
    std::mt19937_64 rng(23);
    int hit_table = 0;
    const Eigen::VectorXd table = entry_params("CORPSE-Pi");
    for (int trial = 0; trial < 100; ++trial) {
        DesignProblem prob;
        prob.family = Family::Composite3Asym;
        prob.theta = kPi;
        prob.guess = table;
        for (int j = 0; j < 3; ++j) prob.guess(j) *= 1.0 + test::uniform(rng, -0.05, 0.05);
        try {
            const DesignResult res = solve(prob);
            check_solution(res, default_targets(prob.family, prob.theta));
            if ((res.params - table).lpNorm<Eigen::Infinity>() < 1e-4) ++hit_table;
        } catch (const NonConvergenceError&) {
            // acceptable: reported with best iterate rather than a fake root
        }
    }
    CHECK(hit_table >= 1);
    CHECK(hit_table >= 90);  // +-5% starts overwhelmingly stay in the basin
}

TEST_CASE("solve: restarts for a second-order table solution") {
    std::mt19937_64 rng(29);
    const Eigen::VectorXd table = entry_params("SYM2ND-Pi2");
    int hit_table = 0, converged = 0;
    for (int trial = 0; trial < 100; ++trial) {
        DesignProblem prob;
        prob.family = Family::Composite5Sym;
        prob.theta = kPi / 2;
        prob.guess = table;
        for (int j = 0; j < 4; ++j) prob.guess(j) *= 1.0 + test::uniform(rng, -0.05, 0.05);
        try {
            const DesignResult res = solve(prob);
            ++converged;
            check_solution(res, default_targets(prob.family, prob.theta));
            if ((res.params - table).lpNorm<Eigen::Infinity>() < 1e-4) ++hit_table;
        } catch (const NonConvergenceError&) {
        } catch (const SingularJacobianError&) {
        }
    }
    CHECK(hit_table >= 1);
    CHECK(converged >= 50);
}

TEST_CASE("refine_catalog_entry: exact roots near the printed values") {
    for (const CatalogEntry& e : catalog()) {
        CAPTURE(e.name);
        const DesignResult res = refine_catalog_entry(e);
        CHECK(res.report.residual_norm < 1e-11);
        for (Eigen::Index i = 0; i < res.params.size(); ++i)
            CHECK(std::abs(res.params(i) - e.params[i]) < 1e-5);
    }
}

TEST_CASE("max_amplitude: continuous pulses (Fig. 6 captions)") {
    MaxAmplitude m = max_amplitude(find_catalog_entry("CONT-ASYM-Pi")->shape);
    CHECK(std::abs(m.value - 26.916283) < 1e-3);
    CHECK(std::abs(m.location - 0.2977) < 1e-3);
    m = max_amplitude(find_catalog_entry("CONT-ASYM-Pi2")->shape);
    CHECK(std::abs(m.value - 40.572755) < 1e-3);
    CHECK(std::abs(m.location - 0.4461) < 1e-3);
    // Symmetric first-order pulse peaks at the midpoint with theta - 2a.
    m = max_amplitude(find_catalog_entry("CONT-SYM-Pi")->shape);
    CHECK(std::abs(m.value - (kPi + 2 * 2.159224)) < 1e-5);
    CHECK(std::abs(m.location - 0.5) < 1e-6);
}

TEST_CASE("max_amplitude: piecewise pulses report the loudest segment") {
    const MaxAmplitude m = max_amplitude(find_catalog_entry("CORPSE-Pi")->shape);
    CHECK(m.value == doctest::Approx(13 * kPi / 6).epsilon(1e-15));
    CHECK(m.location < 1.0 / 13);  // first segment already has the max modulus
}
