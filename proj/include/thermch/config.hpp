#pragma once

// Run configuration: a flat `section.key = value` text format with strict
// unknown-key checking and lossless round-trip serialization, plus the named
// initial-condition generators.

#include "thermch/model.hpp"
#include "thermch/stepper.hpp"

#include <cstdint>
#include <string>

namespace thermch {

struct InitialSpec {
    std::string generator = "spinodal";  // uniform | spinodal | cosine
    double u0 = 0.0;                     // uniform: constant u
    double theta0 = 1.0;                 // all: base temperature
    double amp = 0.05;                   // spinodal: noise amplitude
    double mean_u = 0.0;                 // spinodal: target mean of u
    int ku = 1;                          // cosine: wavenumber of u profile
    double ampu = 0.1;                   // cosine: amplitude of u profile
    int ktheta = 1;                      // cosine: wavenumber of theta profile
    double amptheta = 0.1;               // cosine: amplitude, needs theta0 - amptheta > 0
    int smooth = 0;                      // spinodal: conservative smoothing passes
                                         // (damps grid-scale noise, preserves the mean)
    std::uint64_t seed = 12345;

    bool operator==(const InitialSpec&) const = default;
};

struct OutputSpec {
    std::string dir = "out";
    int snapshot_stride = 0;  // 0 disables field snapshots
    bool monitors = true;

    bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
    Parameters physics;
    int dim = 1;
    int n = 64;          // cells per direction (x)
    int ny = 64;         // cells in y, 2D only
    double length = 1.0; // domain length (x)
    double ly = 1.0;     // domain length in y, 2D only
    SolverConfig solver;
    double t_final = 1.0;
    InitialSpec initial;
    OutputSpec output;

    bool operator==(const RunConfig&) const = default;

    Grid make_grid() const {
        return dim == 1 ? Grid::make_1d(n, length) : Grid::make_2d(n, ny, length, ly);
    }
    void validate() const;
};

// Parses the flat text format.  `#` starts a comment, blank lines are
// skipped, missing keys take the defaults above, unknown keys and malformed
// lines throw std::invalid_argument with the line number or key name.
RunConfig parse_config(const std::string& text);

// Full-precision (%.17g) emission of every key; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& c);

// Builds the initial state from a named generator.  Throws
// std::invalid_argument for unknown generators or nonpositive temperature.
State make_initial(const InitialSpec& spec, const Grid& g, std::uint64_t seed);

} // namespace thermch
