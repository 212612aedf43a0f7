#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace afc {

/// Shortest round-trip decimal representation of a double; used everywhere
/// a file must reload bit-exactly and manifests must be byte-stable.
std::string format_double(double value);

/// Fixed-width representation for human-facing tables (12 significant
/// digits, still deterministic).
std::string format_metric(double value);

std::ofstream open_output(const std::string& path);
std::ifstream open_input(const std::string& path);

std::vector<std::string> split(const std::string& line, char sep);
std::string trim(const std::string& s);

/// Parses a comma-separated list of doubles ("1,2.5,3e-2").
std::vector<double> parse_double_list(const std::string& text);

void ensure_directory(const std::string& path);

}  // namespace afc
