#pragma once

// Plain-text artifacts: self-describing field snapshots, the balance time
// series (CSV), and monitor reports.  All numbers are written with full
// round-trip precision so re-ingestion is bit-exact.

#include "thermch/diagnostics.hpp"
#include "thermch/grid.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace thermch {

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct Snapshot {
    std::string name;
    double t = 0.0;
    Field field;
};

// Header block (grid spec, time, field name) followed by one value per line
// in row-major order.
void write_snapshot(const std::string& path, const Field& f,
                    const std::string& name, double t);
Snapshot read_snapshot(const std::string& path);

struct SeriesRow {
    double t = 0, dt = 0, mass = 0, energy = 0, entropy = 0, production = 0,
           min_theta = 0;
    int newton_iters = 0;
};

// Streaming CSV writer: header row on open, one row per accepted step.
class SeriesWriter {
public:
    explicit SeriesWriter(const std::string& path);
    void append(const SeriesRow& row);

private:
    std::string path_;
    std::ofstream out_;
};

std::vector<SeriesRow> read_series(const std::string& path);

void write_monitors(const std::string& path, const MonitorReport& rep);
MonitorReport read_monitors(const std::string& path);

} // namespace thermch
