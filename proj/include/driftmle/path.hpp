#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "driftmle/errors.hpp"

namespace driftmle {

// Observed trajectory: time grid starting at t_0 = 0 with X_0 = 0.
struct SamplePath {
    std::vector<double> times;
    std::vector<double> values;

    std::size_t n_increments() const { return times.empty() ? 0 : times.size() - 1; }

    double duration() const { return times.back(); }

    void validate() const {
        if (times.size() != values.size())
            throw validation_error("sample path: times and values differ in length");
        if (times.size() < 2) throw validation_error("sample path: need at least two points");
        if (times.front() != 0.0) throw validation_error("sample path: grid must start at t = 0");
        if (values.front() != 0.0) throw validation_error("sample path: X_0 must be 0");
        for (std::size_t k = 1; k < times.size(); ++k)
            if (!(times[k] > times[k - 1]))
                throw validation_error("sample path: times must be strictly increasing");
    }

    std::vector<double> increments() const {
        std::vector<double> dx(n_increments());
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = values[k + 1] - values[k];
        return dx;
    }

    std::vector<double> steps() const {
        std::vector<double> dt(n_increments());
        for (std::size_t k = 0; k < dt.size(); ++k) dt[k] = times[k + 1] - times[k];
        return dt;
    }

    // Regular grid: step deviation from the mean step at most `tol` relative.
    bool is_regular(double tol = 1e-9) const {
        const double mean = duration() / static_cast<double>(n_increments());
        for (std::size_t k = 1; k < times.size(); ++k)
            if (std::abs(times[k] - times[k - 1] - mean) > tol * mean) return false;
        return true;
    }
};

// Path CSV format: header `t,x`, one row per grid point, 17 significant digits.
inline void write_path_csv(const SamplePath& path, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw io_error("cannot open '" + filename + "' for writing");
    out << "t,x\n";
    out.precision(17);
    for (std::size_t k = 0; k < path.times.size(); ++k)
        out << path.times[k] << ',' << path.values[k] << '\n';
    if (!out) throw io_error("failed writing '" + filename + "'");
}

inline SamplePath read_path_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw io_error("cannot open '" + filename + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line != "t,x")
        throw io_error("'" + filename + "': expected header 't,x'");
    SamplePath path;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw io_error("'" + filename + "': malformed row '" + line + "'");
        try {
            path.times.push_back(std::stod(line.substr(0, comma)));
            path.values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw io_error("'" + filename + "': cannot parse row '" + line + "'");
        }
    }
    path.validate();
    return path;
}

}  // namespace driftmle
