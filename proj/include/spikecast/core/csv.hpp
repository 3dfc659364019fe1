#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace spikecast {

// RFC 4180 quoting, only when needed.
inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(cells[i]);
    }
    return out + "\n";
}

// Shortest round-trippable-enough rendering, stable across runs: up to
// nine significant digits, no trailing zeros.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace spikecast
