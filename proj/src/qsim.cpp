#include "pulsekit/qsim.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <future>
#include <numbers>
#include <random>

#include "pulsekit/rotation.hpp"

namespace pulsekit {

namespace {

using namespace std::complex_literals;
using Cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr long kReunitarizeInterval = 32768;

double spectral_norm(const Eigen::MatrixXcd& h) {
    if (h.size() == 0 || h.isZero(0.0)) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

// exp(-i scale h) for Hermitian h.
Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& h, double scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k)
        phases(k) = std::exp(Cplx(0.0, -scale * es.eigenvalues()(k)));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Deterministic normal deviates (fixed bit-to-double mapping, Box-Muller),
// independent of the standard library's distribution implementations.
struct DetRng {
    explicit DetRng(std::uint64_t seed) : gen(seed) {}
    std::mt19937_64 gen;
    bool have_spare = false;
    double spare = 0.0;

    double uniform() { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; }
    double normal() {
        if (have_spare) {
            have_spare = false;
            return spare;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double phi = kTwoPi * uniform();
        spare = r * std::sin(phi);
        have_spare = true;
        return r * std::cos(phi);
    }
};

// sigma_mu acting on bath spin `site` of `n` bath spins.
Eigen::MatrixXcd bath_pauli(int n, int site, int mu) {
    const Eigen::Index left = 1LL << site, right = 1LL << (n - site - 1);
    return kron(kron(Eigen::MatrixXcd::Identity(left, left), pauli(mu)),
                Eigen::MatrixXcd::Identity(right, right));
}

Eigen::MatrixXcd random_gue(DetRng& rng, Eigen::Index dim) {
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (r == c)
                m(r, c) = rng.normal();
            else if (r < c)
                m(r, c) = 0.5 * Cplx(rng.normal(), rng.normal());
            else
                m(r, c) = std::conj(m(c, r));
        }
    return m;
}

// One midpoint-exponential stepper; Mat is a fixed-size Eigen type for the
// common dimensions so the inner products inline.
template <typename Mat>
struct Stepper {
    Mat m0, m1, u, x, term, tmp, acc;
    double norm_m0 = 0.0, norm_m1 = 0.0;
    long count = 0;

    Stepper(const Eigen::MatrixXcd& m0d, const Eigen::MatrixXcd& m1d) {
        m0 = m0d;
        m1 = m1d;
        u = Mat::Identity(m0d.rows(), m0d.cols());
        x = u;
        term = u;
        tmp = u;
        acc = u;
        norm_m0 = m0d.cwiseAbs().colwise().sum().maxCoeff();
        norm_m1 = m1d.cwiseAbs().colwise().sum().maxCoeff();
    }

    void reunitarize() {
        Eigen::JacobiSVD<Mat> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
        u = svd.matrixU() * svd.matrixV().adjoint();
    }

    // u <- exp(x) u by Taylor applied to u; valid for small |x|.
    void apply_taylor(double bound) {
        term = u;
        acc = u;
        double tail = 1.0;
        for (int j = 1; j <= 28; ++j) {
            tmp.noalias() = x * term;
            term = tmp / static_cast<double>(j);
            acc += term;
            tail *= bound / j;
            if (tail < 1e-17) break;
        }
        u = acc;
    }

    // Scaling and squaring for the rare coarse steps with |x| > 1/2.
    void apply_scaled(double bound) {
        int squarings = 0;
        while (bound > 0.25) {
            bound *= 0.5;
            ++squarings;
        }
        const double scale = std::ldexp(1.0, -squarings);
        Mat y = scale * x;
        Mat e = Mat::Identity(u.rows(), u.cols());
        Mat p = e;
        for (int j = 1; j <= 20; ++j) {
            tmp.noalias() = y * p;
            p = tmp / static_cast<double>(j);
            e += p;
        }
        for (int s = 0; s < squarings; ++s) {
            tmp.noalias() = e * e;
            e = tmp;
        }
        tmp.noalias() = e * u;
        u = tmp;
    }

    void step(double v, double ds) {
        x = Cplx(0.0, -ds) * (m0 + v * m1);
        const double bound = ds * (norm_m0 + std::abs(v) * norm_m1);
        if (bound <= 0.5)
            apply_taylor(bound);
        else
            apply_scaled(bound);
        if (++count % kReunitarizeInterval == 0) reunitarize();
    }
};

struct HarmonicEval {
    const HarmonicSeries* h;
    double operator()(double t) const {
        double v = h->constant;
        for (std::size_t k = 0; k < h->cos_coeffs.size(); ++k)
            v += h->cos_coeffs[k] * std::cos(kTwoPi * (k + 1) * t);
        for (std::size_t k = 0; k < h->sin_coeffs.size(); ++k)
            v += h->sin_coeffs[k] * std::sin(kTwoPi * (k + 1) * t);
        return v;
    }
};

template <typename Mat>
Eigen::MatrixXcd propagate_impl(const PulseShape& pulse, const Eigen::MatrixXcd& m0,
                                const Eigen::MatrixXcd& m1, long steps) {
    Stepper<Mat> st(m0, m1);
    if (pulse.kind == PulseShape::Kind::Piecewise) {
        // Steps aligned to the switch instants: each segment's generator is
        // constant, so aligned midpoint exponentials are exact.
        double prev = 0.0;
        for (const Segment& seg : pulse.segments) {
            const double len = seg.end - prev;
            const long n = std::max(1L, static_cast<long>(std::ceil(steps * len)));
            const double ds = len / static_cast<double>(n);
            for (long k = 0; k < n; ++k) st.step(seg.amplitude, ds);
            prev = seg.end;
        }
    } else {
        const HarmonicEval v{&pulse.harmonics};
        const double ds = 1.0 / static_cast<double>(steps);
        for (long k = 0; k < steps; ++k) st.step(v((k + 0.5) * ds), ds);
    }
    return Eigen::MatrixXcd(st.u);
}

Eigen::MatrixXcd propagate_dispatch(const PulseShape& pulse, const Eigen::MatrixXcd& m0,
                                    const Eigen::MatrixXcd& m1, long steps) {
    switch (m0.rows()) {
        case 4: return propagate_impl<Eigen::Matrix<Cplx, 4, 4>>(pulse, m0, m1, steps);
        case 8: return propagate_impl<Eigen::Matrix<Cplx, 8, 8>>(pulse, m0, m1, steps);
        case 16: return propagate_impl<Eigen::Matrix<Cplx, 16, 16>>(pulse, m0, m1, steps);
        case 32: return propagate_impl<Eigen::Matrix<Cplx, 32, 32>>(pulse, m0, m1, steps);
        default: return propagate_impl<Eigen::MatrixXcd>(pulse, m0, m1, steps);
    }
}

// Constant part tau_p (1 x H_b + sum_j lambda_j sigma_j x A_j) and the
// pulse part sigma.axis x 1 in normalized time.
void build_generators(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                      Eigen::MatrixXcd& m0, Eigen::MatrixXcd& m1) {
    const Eigen::Index bdim = bath.dim();
    const Eigen::MatrixXcd ib = Eigen::MatrixXcd::Identity(bdim, bdim);
    m0 = kron(Eigen::Matrix2cd::Identity(), bath.h_bath);
    for (int j = 0; j < 3; ++j)
        if (bath.lambda(j) != 0.0) m0 += bath.lambda(j) * kron(pauli(j), bath.coupling[j]);
    m0 *= tau_p;
    Eigen::Matrix2cd spin_axis = Eigen::Matrix2cd::Zero();
    for (int j = 0; j < 3; ++j) spin_axis += pulse.axis(j) * pauli(j);
    m1 = kron(spin_axis, ib);
}

double fit_slope(const std::vector<ScalingPoint>& pts, double& intercept, double& rms) {
    // Least squares of log(dist) on log(tau_p) over usable points.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const ScalingPoint& p : pts) {
        if (!p.usable) continue;
        const double x = std::log(p.tau_p), y = std::log(p.dist);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    intercept = (sy - slope * sx) / n;
    double ss = 0;
    for (const ScalingPoint& p : pts) {
        if (!p.usable) continue;
        const double r = std::log(p.dist) - slope * std::log(p.tau_p) - intercept;
        ss += r * r;
    }
    rms = std::sqrt(ss / n);
    return slope;
}

}  // namespace

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

double BathSpec::omega_b() const { return spectral_norm(h_bath); }

void BathSpec::validate() const {
    if (n_spins < 1 || n_spins > 4)
        throw std::invalid_argument("bath: n_spins must be between 1 and 4");
    const Eigen::Index d = 1LL << n_spins;
    if (h_bath.rows() != d || h_bath.cols() != d)
        throw std::invalid_argument("bath: h_bath dimension does not match n_spins");
    if ((h_bath - h_bath.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("bath: h_bath is not Hermitian");
    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd& a = coupling[j];
        if (a.rows() != d || a.cols() != d)
            throw std::invalid_argument("bath: coupling operator dimension mismatch");
        if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("bath: coupling operator is not Hermitian");
        if (lambda(j) != 0.0 && std::abs(spectral_norm(a) - 1.0) > 1e-10)
            throw std::invalid_argument("bath: coupling operator must have unit norm");
    }
}

BathSpec random_bath(const RandomBathConfig& config) {
    if (config.n_spins < 1 || config.n_spins > 4)
        throw std::invalid_argument("random_bath: n_spins must be between 1 and 4");
    DetRng rng(config.seed);
    const int n = config.n_spins;
    const Eigen::Index dim = 1LL << n;

    BathSpec bath;
    bath.n_spins = n;

    // Random couplings among the bath spins plus local fields, normalized
    // to spectral norm omega_b.
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int mu = 0; mu < 3; ++mu)
                h += rng.normal() * (bath_pauli(n, a, mu) * bath_pauli(n, b, mu));
    for (int a = 0; a < n; ++a)
        for (int mu = 0; mu < 3; ++mu) h += rng.normal() * bath_pauli(n, a, mu);
    const double hn = spectral_norm(h);
    bath.h_bath = (config.omega_b == 0.0 || hn == 0.0)
                      ? Eigen::MatrixXcd::Zero(dim, dim).eval()
                      : Eigen::MatrixXcd((config.omega_b / hn) * h);

    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(dim, dim);
    if (config.structure == CouplingStructure::ZOnly) {
        bath.coupling[0] = zero;
        bath.coupling[1] = zero;
        Eigen::MatrixXcd az = random_gue(rng, dim);
        bath.coupling[2] = az / spectral_norm(az);
        bath.lambda = Eigen::Vector3d(0.0, 0.0, config.lambda(2));
    } else {
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXcd a = random_gue(rng, dim);
            bath.coupling[j] = a / spectral_norm(a);
        }
        bath.lambda = config.lambda;
    }
    bath.validate();
    return bath;
}

Eigen::MatrixXcd propagate_fixed(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                                 long steps) {
    if (steps < 1) throw std::invalid_argument("propagate_fixed: steps must be >= 1");
    if (!(tau_p > 0.0)) throw std::invalid_argument("propagate_fixed: tau_p must be positive");
    Eigen::MatrixXcd m0, m1;
    build_generators(pulse, bath, tau_p, m0, m1);
    return propagate_dispatch(pulse, m0, m1, steps);
}

namespace {

// Doubling ladder; on exit `prev`/`res` hold the last two refinements.
void evolve_ladder(const PulseShape& pulse, const BathSpec& bath, double tau_p, long steps,
                   const EvolveOptions& opts, EvolveResult& prev, EvolveResult& res) {
    if (steps < 1) throw std::invalid_argument("evolve: steps must be >= 1");
    if (!(tau_p > 0.0)) throw std::invalid_argument("evolve: tau_p must be positive");
    if (opts.max_steps < 2 * steps)
        throw std::invalid_argument("evolve: max_steps must allow at least one doubling");
    Eigen::MatrixXcd m0, m1;
    build_generators(pulse, bath, tau_p, m0, m1);
    const Eigen::MatrixXcd target = target_unitary(pulse, bath, tau_p);

    prev.unitary = propagate_dispatch(pulse, m0, m1, steps);
    prev.steps = steps;
    prev.dist_to_target = distance(prev.unitary, target);
    while (true) {
        const long n2 = 2 * prev.steps;
        res.unitary = propagate_dispatch(pulse, m0, m1, n2);
        res.steps = n2;
        res.tolerance = distance(prev.unitary, res.unitary);
        res.dist_to_target = distance(res.unitary, target);
        res.converged =
            res.tolerance < std::max(opts.rel_tol * res.dist_to_target, opts.abs_floor);
        if (res.converged || 2 * n2 > opts.max_steps) return;
        prev = std::move(res);
        res = EvolveResult{};
    }
}

}  // namespace

EvolveResult evolve_detailed(const PulseShape& pulse, const BathSpec& bath, double tau_p,
                             long steps, const EvolveOptions& opts) {
    EvolveResult prev, res;
    evolve_ladder(pulse, bath, tau_p, steps, opts, prev, res);
    return res;
}

Eigen::MatrixXcd evolve(const PulseShape& pulse, const BathSpec& bath, double tau_p, long steps,
                        const EvolveOptions& opts) {
    EvolveResult prev, res;
    evolve_ladder(pulse, bath, tau_p, steps, opts, prev, res);
    if (!res.converged)
        throw StepBudgetError("evolve: step budget exhausted before convergence", std::move(prev),
                              std::move(res));
    return res.unitary;
}

Eigen::MatrixXcd target_unitary(const PulseShape& pulse, const BathSpec& bath, double tau_p) {
    // The spin factor uses the pulse's actual net angle so that table
    // rounding does not leave a tau_p-independent pedestal in the distance.
    const AxisAngle net{pulse.axis, accumulated_angle(pulse, 1.0)};
    return kron(propagator(net), expm_hermitian(bath.h_bath, tau_p));
}

double distance(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw std::invalid_argument("distance: dimension mismatch");
    const Cplx tr = (u.adjoint() * v).trace();
    const double mag = std::abs(tr);
    const Cplx phase = mag > 0.0 ? tr / mag : Cplx(1.0, 0.0);
    const double fro = (v * std::conj(phase) - u).norm();
    return fro / std::sqrt(2.0 * static_cast<double>(u.rows()));
}

ScalingReport scaling_exponent(const PulseShape& pulse, const BathSpec& bath,
                               const std::vector<double>& tau_grid, const ScalingOptions& opts) {
    if (tau_grid.size() < 2)
        throw std::domain_error("scaling_exponent: need at least two grid points");
    for (std::size_t i = 0; i + 1 < tau_grid.size(); ++i)
        if (!(tau_grid[i] < tau_grid[i + 1]))
            throw std::domain_error("scaling_exponent: grid must be strictly increasing");
    const double scale = bath.omega_b() + bath.lambda.cwiseAbs().sum();
    if (tau_grid.back() * scale > opts.window)
        throw std::domain_error("scaling_exponent: grid exceeds the perturbative window");

    ScalingReport report;
    report.points.resize(tau_grid.size());
    auto compute = [&](std::size_t i) {
        const EvolveResult r =
            evolve_detailed(pulse, bath, tau_grid[i], opts.initial_steps, opts.evolve);
        ScalingPoint p;
        p.tau_p = tau_grid[i];
        p.dist = r.dist_to_target;
        p.tolerance = r.tolerance;
        p.steps = r.steps;
        p.converged = r.converged;
        p.usable = r.converged && p.dist > 0.0 && p.dist >= opts.exclusion_factor * p.tolerance;
        report.points[i] = p;
    };
    if (opts.threads > 1) {
        std::vector<std::future<void>> futures;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < opts.threads; ++t)
            futures.push_back(std::async(std::launch::async, [&]() {
                for (std::size_t i = next.fetch_add(1); i < tau_grid.size();
                     i = next.fetch_add(1))
                    compute(i);
            }));
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < tau_grid.size(); ++i) compute(i);
    }

    int usable = 0;
    for (const ScalingPoint& p : report.points) {
        if (p.usable) {
            ++usable;
            continue;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "excluded tau_p=%.6g: dist=%.3e within %gx of integrator tolerance %.3e%s",
                      p.tau_p, p.dist, opts.exclusion_factor, p.tolerance,
                      p.converged ? "" : " (step budget exhausted)");
        report.warnings.emplace_back(buf);
    }
    if (usable < 4)
        throw FloorContaminationError(
            "scaling_exponent: fewer than 4 usable grid points above the integrator floor",
            report);
    report.slope = fit_slope(report.points, report.intercept, report.fit_rms);
    return report;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_grid: bad range");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    return g;
}

}  // namespace pulsekit
