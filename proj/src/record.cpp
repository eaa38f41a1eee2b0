#include "metastab/record.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // trim to the shortest representation that still round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v || (v != v && back != back)) return shorter;
    }
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOFailure("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOFailure("cannot open for reading: " + path);
    return in;
}

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) out.push_back(std::stod(cell));
    return out;
}

} // namespace

void write_snapshots_csv(const RunRecord& record, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t";
    for (int i = 0; i < record.grid.nodes(); ++i)
        out << ',' << format_full(record.grid.x(i));
    out << '\n';
    for (const Snapshot& s : record.snapshots) {
        out << format_full(s.t);
        for (double v : s.u) out << ',' << format_full(v);
        out << '\n';
    }
    if (!out) throw IOFailure("write failed: " + path);
}

void write_diagnostics_csv(const RunRecord& record, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,energy,grad_part,pot_part,min_u,max_u,ut_max,dt,dissipation,"
           "n_layers\n";
    for (const DiagnosticsRow& r : record.diagnostics) {
        out << format_full(r.t) << ',' << format_full(r.energy) << ','
            << format_full(r.grad_part) << ',' << format_full(r.pot_part)
            << ',' << format_full(r.min_u) << ',' << format_full(r.max_u)
            << ',' << format_full(r.ut_max) << ',' << format_full(r.dt) << ','
            << format_full(r.dissipation) << ',' << r.n_layers;
        for (double p : r.positions) out << ',' << format_full(p);
        out << '\n';
    }
    if (!out) throw IOFailure("write failed: " + path);
}

RunRecord read_snapshots_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw IOFailure("empty snapshot file: " + path);
    std::vector<double> xs;
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');  // "t"
        while (std::getline(ss, cell, ',')) xs.push_back(std::stod(cell));
    }
    if (xs.size() < 2) throw IOFailure("snapshot header too short: " + path);
    RunRecord record;
    record.grid.a = xs.front();
    record.grid.b = xs.back();
    record.grid.cells = static_cast<int>(xs.size()) - 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row = parse_row(line);
        if (row.size() != xs.size() + 1)
            throw IOFailure("snapshot row length mismatch: " + path);
        Snapshot s;
        s.t = row.front();
        s.u.assign(row.begin() + 1, row.end());
        record.snapshots.push_back(std::move(s));
    }
    if (!record.snapshots.empty())
        record.final_t = record.snapshots.back().t;
    return record;
}

std::vector<DiagnosticsRow> read_diagnostics_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw IOFailure("empty diagnostics file: " + path);
    std::vector<DiagnosticsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row = parse_row(line);
        if (row.size() < 10)
            throw IOFailure("diagnostics row too short: " + path);
        DiagnosticsRow r;
        r.t = row[0];
        r.energy = row[1];
        r.grad_part = row[2];
        r.pot_part = row[3];
        r.min_u = row[4];
        r.max_u = row[5];
        r.ut_max = row[6];
        r.dt = row[7];
        r.dissipation = row[8];
        r.n_layers = static_cast<int>(row[9]);
        r.positions.assign(row.begin() + 10, row.end());
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

// The build targets little-endian hosts; the writers below just emit the
// in-memory representation.
static_assert(sizeof(double) == 8);

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

} // namespace

void write_checkpoint(const std::string& path, const Grid& grid, double t,
                      const std::vector<double>& u) {
    if (static_cast<int>(u.size()) != grid.nodes())
        throw ConfigViolation("checkpoint field does not match its grid");
    std::ofstream out = open_out(path);
    put<std::uint8_t>(out, 1);
    put<double>(out, grid.a);
    put<double>(out, grid.b);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(grid.cells));
    put<double>(out, t);
    for (double v : u) put<double>(out, v);
    if (!out) throw IOFailure("write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in = open_in(path);
    const auto version = get<std::uint8_t>(in);
    if (version != 1)
        throw IOFailure("unsupported checkpoint version in " + path);
    Checkpoint cp;
    cp.grid.a = get<double>(in);
    cp.grid.b = get<double>(in);
    cp.grid.cells = static_cast<int>(get<std::uint64_t>(in));
    cp.t = get<double>(in);
    if (cp.grid.cells < 1 || !(cp.grid.a < cp.grid.b))
        throw IOFailure("corrupt checkpoint header in " + path);
    cp.u.resize(cp.grid.nodes());
    for (double& v : cp.u) v = get<double>(in);
    if (!in) throw IOFailure("checkpoint truncated: " + path);
    return cp;
}

} // namespace metastab
