#pragma once

// Deterministic CSV output: fixed %.17g formatting, fixed row order, and a
// provenance header carrying the config hash and tolerances, so identical
// configs produce bit-identical files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tsl/errors.hpp"
#include "tsl/grid.hpp"

namespace tsl {

inline uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Fixed scientific form used inside file names.
inline std::string fmt_param(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& provenance) {
        std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw ConfigError("cannot open output file: " + path.string());
        out_ << "# " << provenance << "\n";
    }

    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
        out_ << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

/// Coefficient series of a trajectory: one row per (t, component, mode),
/// with the signed wavevector spelled out per axis.
inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const std::vector<SpectralState>& traj,
                                 const std::string& provenance) {
    if (traj.empty()) throw ConfigError("cannot write an empty trajectory");
    CsvWriter csv(path, provenance);
    const GridSpec& g = traj.front().grid;
    std::vector<std::string> cols{"t", "component"};
    for (int j = 0; j < g.dim; ++j) cols.push_back("k" + std::to_string(j + 1));
    cols.insert(cols.end(), {"re", "im"});
    csv.header(cols);
    for (const auto& state : traj)
        for (int c = 0; c < state.components; ++c)
            for (long f = 0; f < g.points(); ++f) {
                const auto k = g.wavevector(f);
                std::vector<std::string> cells{fmt_g17(state.time), std::to_string(c)};
                for (int kj : k) cells.push_back(std::to_string(kj));
                cells.push_back(fmt_g17(state.at(c, f).real()));
                cells.push_back(fmt_g17(state.at(c, f).imag()));
                csv.row(cells);
            }
}

} // namespace tsl
