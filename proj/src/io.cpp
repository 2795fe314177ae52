#include "thermch/io.hpp"

#include <cstdio>
#include <sstream>

namespace thermch {

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

[[noreturn]] void fail(const std::string& what, const std::string& path) {
    throw io_error(what + ": " + path);
}

} // namespace

void write_snapshot(const std::string& path, const Field& f,
                    const std::string& name, double t) {
    std::ofstream out(path);
    if (!out) fail("cannot open snapshot for writing", path);
    const Grid& g = f.grid;
    out << "# field snapshot\n"
        << "field " << name << "\n"
        << "time " << fmt(t) << "\n"
        << "dim " << g.dim << "\n"
        << "nx " << g.nx << "\n"
        << "ny " << g.ny << "\n"
        << "lx " << fmt(g.lx) << "\n"
        << "ly " << fmt(g.ly) << "\n"
        << "values " << f.size() << "\n";
    for (double v : f.v) out << fmt(v) << "\n";
    if (!out) fail("write failure on snapshot", path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open snapshot for reading", path);

    Snapshot s;
    int dim = 0, nx = 0, ny = 0;
    double lx = 0, ly = 0;
    long count = -1;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "field") ls >> s.name;
        else if (key == "time") ls >> s.t;
        else if (key == "dim") ls >> dim;
        else if (key == "nx") ls >> nx;
        else if (key == "ny") ls >> ny;
        else if (key == "lx") ls >> lx;
        else if (key == "ly") ls >> ly;
        else if (key == "values") { ls >> count; break; }
        else fail("unknown snapshot header key '" + key + "'", path);
        if (!ls) fail("malformed snapshot header line '" + line + "'", path);
    }
    if (count < 0) fail("snapshot header missing 'values'", path);
    const Grid g = dim == 1 ? Grid::make_1d(nx, lx) : Grid::make_2d(nx, ny, lx, ly);
    if (count != g.cells()) fail("snapshot value count does not match grid", path);
    s.field = Field(g);
    for (long i = 0; i < count; ++i)
        if (!(in >> s.field[static_cast<int>(i)]))
            fail("truncated snapshot data", path);
    return s;
}

SeriesWriter::SeriesWriter(const std::string& path) : path_(path), out_(path) {
    if (!out_) fail("cannot open series for writing", path_);
    out_ << "t,dt,mass,energy,entropy,production,min_theta,newton_iters\n";
}

void SeriesWriter::append(const SeriesRow& r) {
    out_ << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.mass) << ','
         << fmt(r.energy) << ',' << fmt(r.entropy) << ',' << fmt(r.production)
         << ',' << fmt(r.min_theta) << ',' << r.newton_iters << '\n';
    out_.flush();
    if (!out_) fail("write failure on series", path_);
}

std::vector<SeriesRow> read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open series for reading", path);
    std::string line;
    if (!std::getline(in, line)) fail("empty series file", path);

    std::vector<SeriesRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        for (char& c : line)
            if (c == ',') c = ' ';
        std::istringstream ls(line);
        SeriesRow r;
        if (!(ls >> r.t >> r.dt >> r.mass >> r.energy >> r.entropy
                 >> r.production >> r.min_theta >> r.newton_iters))
            fail("malformed series row '" + line + "'", path);
        rows.push_back(r);
    }
    return rows;
}

void write_monitors(const std::string& path, const MonitorReport& rep) {
    std::ofstream out(path);
    if (!out) fail("cannot open monitor report for writing", path);
    for (const auto& [key, value] : rep) out << key << " = " << fmt(value) << "\n";
    if (!out) fail("write failure on monitor report", path);
}

MonitorReport read_monitors(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open monitor report for reading", path);
    MonitorReport rep;
    std::string key, eq;
    double value;
    while (in >> key >> eq >> value) {
        if (eq != "=") fail("malformed monitor report line near '" + key + "'", path);
        rep[key] = value;
    }
    return rep;
}

} // namespace thermch
