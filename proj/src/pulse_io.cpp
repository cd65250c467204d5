#include "pulsekit/pulse_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pulsekit {

namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, std::size_t byte) {
    return 1 + static_cast<int>(std::count(text.begin(),
                                           text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

std::string pulse_to_json(const PulseShape& pulse) {
    json j;
    j["kind"] = pulse.kind == PulseShape::Kind::Piecewise ? "piecewise-constant"
                                                          : "harmonic-series";
    j["theta"] = pulse.theta;
    j["axis"] = {pulse.axis.x(), pulse.axis.y(), pulse.axis.z()};
    if (pulse.kind == PulseShape::Kind::Piecewise) {
        json segs = json::array();
        for (const Segment& s : pulse.segments)
            segs.push_back({{"end", s.end}, {"amplitude", s.amplitude}});
        j["segments"] = std::move(segs);
    } else {
        j["coefficients"] = {{"constant", pulse.harmonics.constant},
                             {"cos", pulse.harmonics.cos_coeffs},
                             {"sin", pulse.harmonics.sin_coeffs}};
    }
    return j.dump(2) + "\n";
}

PulseShape pulse_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PulseParseError("pulse definition: " + std::string(e.what()),
                              line_of_byte(text, e.byte));
    }
    try {
        const std::string kind = j.at("kind").get<std::string>();
        PulseShape p;
        p.theta = j.at("theta").get<double>();
        if (j.contains("axis")) {
            const auto a = j.at("axis");
            p.axis = Eigen::Vector3d(a.at(0).get<double>(), a.at(1).get<double>(),
                                     a.at(2).get<double>());
        }
        if (kind == "piecewise-constant") {
            p.kind = PulseShape::Kind::Piecewise;
            for (const auto& s : j.at("segments"))
                p.segments.push_back(
                    {s.at("end").get<double>(), s.at("amplitude").get<double>()});
        } else if (kind == "harmonic-series") {
            p.kind = PulseShape::Kind::Harmonic;
            const auto& c = j.at("coefficients");
            p.harmonics.constant = c.value("constant", 0.0);
            if (c.contains("cos")) p.harmonics.cos_coeffs = c.at("cos").get<std::vector<double>>();
            if (c.contains("sin")) p.harmonics.sin_coeffs = c.at("sin").get<std::vector<double>>();
        } else {
            throw PulseParseError("pulse definition: unknown kind \"" + kind + "\"", 1);
        }
        validate_pulse(p);
        return p;
    } catch (const json::exception& e) {
        throw PulseParseError("pulse definition: " + std::string(e.what()), 1);
    }
}

PulseShape load_pulse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open pulse file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return pulse_from_json(buf.str());
}

void save_pulse_file(const PulseShape& pulse, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write pulse file: " + path);
    out << pulse_to_json(pulse);
}

}  // namespace pulsekit
