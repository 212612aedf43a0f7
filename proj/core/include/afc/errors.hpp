#pragma once

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace afc {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Spectral grid problems: too coarse, too narrow, mismatched between operands.
class GridError : public Error {
public:
    using Error::Error;
};

// Invalid preparation sequences: shifts that are not multiples of the comb
// period, overlapping or coincident pulses.
class SequenceError : public Error {
public:
    using Error::Error;
};

// Waveform problems: bandwidth exceeding the grid, incompatible sampling,
// echo windows overlapping the transmitted pulse.
class WaveformError : public Error {
public:
    using Error::Error;
};

// Analysis failures: no comb teeth found, degenerate fringe fits.
class AnalysisError : public Error {
public:
    using Error::Error;
};

// Configuration and calibration problems (parse errors, violated invariants,
// missing pump calibration).
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Non-fatal diagnostics. Callers that care pass a sink; otherwise messages
// go to stderr.
using WarningList = std::vector<std::string>;

inline void warn(WarningList* sink, std::string message) {
    if (sink) {
        sink->push_back(std::move(message));
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace afc
