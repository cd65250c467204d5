#include "pulsekit/pulse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pulsekit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

// Alternating-sign composite from printed magnitudes and switch instants.
// `signs` holds one multiplier per segment.
PulseShape composite(double theta, const std::vector<double>& instants,
                     const std::vector<double>& magnitudes, const std::vector<int>& signs) {
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < signs.size(); ++i) {
        const double end = (i + 1 < signs.size()) ? instants[i] : 1.0;
        const double mag = magnitudes.size() == 1 ? magnitudes[0] : magnitudes[i];
        segs.push_back({end, signs[i] * mag});
    }
    return PulseShape::piecewise(theta, std::move(segs));
}

// v(t) = theta/2 + (a - theta/2) cos(2 pi t) - a cos(4 pi t)
PulseShape cont_sym(double theta, double a) {
    HarmonicSeries h;
    h.constant = theta / 2.0;
    h.cos_coeffs = {a - theta / 2.0, -a};
    return PulseShape::harmonic(theta, std::move(h));
}

// cont_sym plus b sin(2 pi t) - (b/2) sin(4 pi t)
PulseShape cont_asym(double theta, double a, double b) {
    HarmonicSeries h;
    h.constant = theta / 2.0;
    h.cos_coeffs = {a - theta / 2.0, -a};
    h.sin_coeffs = {b, -b / 2.0};
    return PulseShape::harmonic(theta, std::move(h));
}

// v(t) = theta/2 + (a - theta/2) cos(2 pi t) + (b - a) cos(4 pi t)
//      + (c - b) cos(6 pi t) - c cos(8 pi t)
PulseShape cont_sym_2nd(double theta, double a, double b, double c) {
    HarmonicSeries h;
    h.constant = theta / 2.0;
    h.cos_coeffs = {a - theta / 2.0, b - a, c - b, -c};
    return PulseShape::harmonic(theta, std::move(h));
}

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> entries;
    auto add = [&](std::string name, PulseShape shape, CorrectionOrder order, Symmetry symmetry,
                   std::string family, std::vector<double> params) {
        entries.push_back({std::move(name), std::move(shape), order, symmetry, std::move(family),
                           std::move(params)});
    };

    // Composite pi pulses. The tables print magnitudes; the per-segment
    // sign patterns are the ones that reach psi(1) = +theta.
    add("CORPSE-Pi",
        composite(kPi, {1.0 / 13.0, 6.0 / 13.0}, {13.0 * kPi / 6.0}, {+1, -1, +1}),
        CorrectionOrder::First, Symmetry::Asymmetric, "composite3-asym",
        {13.0 * kPi / 6.0, 1.0 / 13.0, 6.0 / 13.0});
    add("SCORPSE-Pi",
        composite(kPi, {1.0 / 7.0, 6.0 / 7.0}, {7.0 * kPi / 6.0}, {-1, +1, -1}),
        CorrectionOrder::First, Symmetry::Symmetric, "composite3-sym",
        {-7.0 * kPi / 6.0, 1.0 / 7.0});
    add("SYM-Pi",
        composite(kPi, {5.0 / 17.0, 12.0 / 17.0}, {17.0 * kPi / 6.0}, {+1, -1, +1}),
        CorrectionOrder::First, Symmetry::Symmetric, "composite3-sym",
        {17.0 * kPi / 6.0, 5.0 / 17.0});
    // 2nd-order symmetric pulses follow the pattern (-A, +A, -B, +A, -A),
    // with B the separately printed negative amplitude.
    add("SYM2ND-Pi", [] {
            std::vector<Segment> segs = {{0.022805, -10.950120},
                                         {0.275269, +10.950120},
                                         {0.724731, -7.695376},
                                         {0.977195, +10.950120},
                                         {1.0, -10.950120}};
            return PulseShape::piecewise(kPi, std::move(segs));
        }(),
        CorrectionOrder::Second, Symmetry::Symmetric, "composite5-sym",
        {-10.950120, -7.695376, 0.022805, 0.275269});
    add("ASYM2ND-Pi",
        composite(kPi, {0.252011, 0.310896, 0.584781, 0.752825, 0.796039}, {11.364434},
                  {+1, -1, +1, -1, +1, -1}),
        CorrectionOrder::Second, Symmetry::Asymmetric, "composite6-asym",
        {11.364434, 0.252011, 0.310896, 0.584781, 0.752825, 0.796039});

    // Composite pi/2 pulses.
    add("CORPSE-Pi2",
        composite(kPi / 2.0, {0.033410, 0.471527}, {6.345849}, {+1, -1, +1}),
        CorrectionOrder::First, Symmetry::Asymmetric, "composite3-asym",
        {6.345849, 0.033410, 0.471527});
    add("SYM-Pi2",
        composite(kPi / 2.0, {0.275201, 0.724799}, {7.791318}, {+1, -1, +1}),
        CorrectionOrder::First, Symmetry::Symmetric, "composite3-sym",
        {7.791318, 0.275201});
    add("SYM2ND-Pi2", [] {
            std::vector<Segment> segs = {{0.037279, -11.486275},
                                         {0.269827, +11.486275},
                                         {0.730173, -8.038405},
                                         {0.962721, +11.486275},
                                         {1.0, -11.486275}};
            return PulseShape::piecewise(kPi / 2.0, std::move(segs));
        }(),
        CorrectionOrder::Second, Symmetry::Symmetric, "composite5-sym",
        {-11.486275, -8.038405, 0.037279, 0.269827});
    add("ASYM2ND-Pi2",
        composite(kPi / 2.0, {0.231411, 0.284623, 0.539588, 0.732138, 0.779722}, {11.563810},
                  {+1, -1, +1, -1, +1, -1}),
        CorrectionOrder::Second, Symmetry::Asymmetric, "composite6-asym",
        {11.563810, 0.231411, 0.284623, 0.539588, 0.732138, 0.779722});

    // Continuous pulses (truncated Fourier series).
    add("CONT-SYM-Pi", cont_sym(kPi, -2.159224), CorrectionOrder::First, Symmetry::Symmetric,
        "harmonic38", {-2.159224});
    add("CONT-SYM-Pi2", cont_sym(kPi / 2.0, -5.015588), CorrectionOrder::First,
        Symmetry::Symmetric, "harmonic38", {-5.015588});
    add("CONT-ASYM-Pi", cont_asym(kPi, 5.263022, 17.850535), CorrectionOrder::First,
        Symmetry::Asymmetric, "harmonic39", {5.263022, 17.850535});
    add("CONT-ASYM-Pi2", cont_asym(kPi / 2.0, -16.809353, 15.634390), CorrectionOrder::First,
        Symmetry::Asymmetric, "harmonic39", {-16.809353, 15.634390});
    add("CONT-SYM2ND-Pi", cont_sym_2nd(kPi, 10.804433, 6.831344, 2.174538),
        CorrectionOrder::Second, Symmetry::Symmetric, "harmonic40",
        {10.804433, 6.831344, 2.174538});
    add("CONT-SYM2ND-Pi2", cont_sym_2nd(kPi / 2.0, 10.925826, 6.806775, -0.02696178),
        CorrectionOrder::Second, Symmetry::Symmetric, "harmonic40",
        {10.925826, 6.806775, -0.02696178});

    return entries;
}

}  // namespace

void validate_pulse(const PulseShape& pulse, double angle_tol) {
    if (!std::isfinite(pulse.theta)) throw std::invalid_argument("pulse: theta not finite");
    if (std::abs(pulse.axis.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("pulse: axis must be a unit vector");

    if (pulse.kind == PulseShape::Kind::Piecewise) {
        if (pulse.segments.empty()) throw std::invalid_argument("pulse: no segments");
        double prev = 0.0;
        bool any_nonzero = false;
        for (const Segment& s : pulse.segments) {
            if (!std::isfinite(s.amplitude))
                throw std::invalid_argument("pulse: segment amplitude not finite");
            if (!(s.end > prev))
                throw std::invalid_argument("pulse: segment instants must be strictly increasing");
            prev = s.end;
            if (s.amplitude != 0.0) any_nonzero = true;
        }
        if (std::abs(pulse.segments.back().end - 1.0) > 1e-12)
            throw std::invalid_argument("pulse: last segment must end at t = 1");
        if (!any_nonzero && pulse.theta != 0.0)
            throw std::invalid_argument("pulse: all amplitudes zero but theta != 0");
    } else {
        const HarmonicSeries& h = pulse.harmonics;
        bool any_nonzero = h.constant != 0.0;
        for (double c : h.cos_coeffs) {
            if (!std::isfinite(c)) throw std::invalid_argument("pulse: coefficient not finite");
            if (c != 0.0) any_nonzero = true;
        }
        for (double c : h.sin_coeffs) {
            if (!std::isfinite(c)) throw std::invalid_argument("pulse: coefficient not finite");
            if (c != 0.0) any_nonzero = true;
        }
        if (!any_nonzero && pulse.theta != 0.0)
            throw std::invalid_argument("pulse: all coefficients zero but theta != 0");
    }

    // Net angle must reproduce theta up to an overall sign (a psi(1) = -theta
    // solution is the same rotation up to global phase).
    const double psi1 = accumulated_angle(pulse, 1.0);
    if (std::min(std::abs(psi1 - pulse.theta), std::abs(psi1 + pulse.theta)) > angle_tol)
        throw std::invalid_argument("pulse: accumulated angle at t=1 does not match theta");
}

PulseShape PulseShape::piecewise(double theta, std::vector<Segment> segments,
                                 const Eigen::Vector3d& axis, double angle_tol) {
    PulseShape p;
    p.kind = Kind::Piecewise;
    p.theta = theta;
    p.axis = axis;
    p.segments = std::move(segments);
    validate_pulse(p, angle_tol);
    return p;
}

PulseShape PulseShape::harmonic(double theta, HarmonicSeries series, const Eigen::Vector3d& axis,
                                double angle_tol) {
    PulseShape p;
    p.kind = Kind::Harmonic;
    p.theta = theta;
    p.axis = axis;
    p.harmonics = std::move(series);
    validate_pulse(p, angle_tol);
    return p;
}

double eval_amplitude(const PulseShape& pulse, double t) {
    if (t < 0.0 || t > 1.0) throw std::domain_error("eval_amplitude: t outside [0, 1]");
    if (pulse.kind == PulseShape::Kind::Piecewise) {
        for (const Segment& s : pulse.segments)
            if (t < s.end) return s.amplitude;
        return pulse.segments.back().amplitude;
    }
    const HarmonicSeries& h = pulse.harmonics;
    double v = h.constant;
    for (std::size_t k = 0; k < h.cos_coeffs.size(); ++k)
        v += h.cos_coeffs[k] * std::cos(kTwoPi * (k + 1) * t);
    for (std::size_t k = 0; k < h.sin_coeffs.size(); ++k)
        v += h.sin_coeffs[k] * std::sin(kTwoPi * (k + 1) * t);
    return v;
}

double accumulated_angle(const PulseShape& pulse, double t) {
    if (t < 0.0 || t > 1.0) throw std::domain_error("accumulated_angle: t outside [0, 1]");
    if (pulse.kind == PulseShape::Kind::Piecewise) {
        double psi = 0.0, prev = 0.0;
        for (const Segment& s : pulse.segments) {
            if (t <= s.end) return psi + 2.0 * s.amplitude * (t - prev);
            psi += 2.0 * s.amplitude * (s.end - prev);
            prev = s.end;
        }
        return psi;
    }
    const HarmonicSeries& h = pulse.harmonics;
    double psi = h.constant * t;
    for (std::size_t k = 0; k < h.cos_coeffs.size(); ++k) {
        const double w = kTwoPi * (k + 1);
        psi += h.cos_coeffs[k] * std::sin(w * t) / w;
    }
    for (std::size_t k = 0; k < h.sin_coeffs.size(); ++k) {
        const double w = kTwoPi * (k + 1);
        psi += h.sin_coeffs[k] * (1.0 - std::cos(w * t)) / w;
    }
    return 2.0 * psi;
}

bool is_symmetric(const PulseShape& pulse, double tol) {
    const int n = 1001;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        if (std::abs(eval_amplitude(pulse, t) - eval_amplitude(pulse, 1.0 - t)) > tol) {
            // Switch instants are half-open; skip exact mirror mismatches there.
            bool at_switch = false;
            if (pulse.kind == PulseShape::Kind::Piecewise)
                for (const Segment& s : pulse.segments)
                    if (std::abs(t - s.end) < 1e-12 || std::abs(1.0 - t - s.end) < 1e-12)
                        at_switch = true;
            if (!at_switch) return false;
        }
    }
    return true;
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

const CatalogEntry* find_catalog_entry(std::string_view name) {
    for (const CatalogEntry& e : catalog())
        if (iequals(e.name, name)) return &e;
    return nullptr;
}

PulseShape resolve_pulse_name(std::string_view name) {
    if (const CatalogEntry* e = find_catalog_entry(name)) return e->shape;
    if (iequals(name, "CONST-Pi"))
        return PulseShape::piecewise(kPi, {{1.0, kPi / 2.0}});
    if (iequals(name, "CONST-Pi2"))
        return PulseShape::piecewise(kPi / 2.0, {{1.0, kPi / 4.0}});
    throw std::invalid_argument("unknown pulse name: " + std::string(name));
}

}  // namespace pulsekit
