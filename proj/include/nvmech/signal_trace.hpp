#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nvmech/errors.hpp"

namespace nvmech {

// one measured/simulated curve: abscissa (time or delay), mean signal and the
// Monte-Carlo standard error of the mean
struct SignalTrace {
    std::vector<double> abscissa;
    std::vector<double> mean;
    std::vector<double> stderr_;

    std::size_t size() const { return abscissa.size(); }
};

namespace detail {
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace detail

inline std::string to_csv(const SignalTrace& t) {
    std::string out = "abscissa,mean,stderr\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += detail::format_double(t.abscissa[i]);
        out += ',';
        out += detail::format_double(t.mean[i]);
        out += ',';
        out += detail::format_double(i < t.stderr_.size() ? t.stderr_[i] : 0.0);
        out += '\n';
    }
    return out;
}

inline void write_csv(const SignalTrace& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw NumericalError("cannot open for writing: " + path);
    f << to_csv(t);
}

inline SignalTrace read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidParameterError("cannot open trace file: " + path);
    SignalTrace t;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first) { // header row
            first = false;
            if (line.find("abscissa") != std::string::npos) continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() < 2)
            throw InvalidParameterError("malformed CSV row in " + path + ": " + line);
        t.abscissa.push_back(row[0]);
        t.mean.push_back(row[1]);
        t.stderr_.push_back(row.size() > 2 ? row[2] : 0.0);
    }
    return t;
}

} // namespace nvmech
