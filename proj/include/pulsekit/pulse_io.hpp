#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "pulsekit/pulse.hpp"

namespace pulsekit {

// Raised with a 1-based line number when a definition file cannot be parsed.
struct PulseParseError : std::runtime_error {
    PulseParseError(const std::string& what, int line_number)
        : std::runtime_error(what), line(line_number) {}
    int line = 0;
};

// Pulse definition document:
//   {
//     "kind": "piecewise-constant" | "harmonic-series",
//     "theta": <radians>,
//     "axis": [x, y, z],
//     "segments": [{"end": <fraction of tau_p>, "amplitude": <1/tau_p>}, ...]
//     "coefficients": {"constant": c0, "cos": [...], "sin": [...]}
//   }
// with exactly one of "segments" / "coefficients" present.
std::string pulse_to_json(const PulseShape& pulse);
PulseShape pulse_from_json(const std::string& text);
PulseShape load_pulse_file(const std::string& path);
void save_pulse_file(const PulseShape& pulse, const std::string& path);

}  // namespace pulsekit
