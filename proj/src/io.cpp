#include "sddpde/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sddpde/errors.hpp"

namespace sddpde {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

struct Row {
    double t;
    CoeffVec y, d;
};

void write_header(std::ostream& os, int m) {
    os << "t";
    for (int k = 1; k <= m; ++k) os << ",g_" << k;
    for (int k = 1; k <= m; ++k) os << ",gd_" << k;
    os << "\n";
}

void write_row(std::ostream& os, double t, const double* y, const double* d, int m) {
    os << format_double(t);
    for (int k = 0; k < m; ++k) os << "," << format_double(y[k]);
    for (int k = 0; k < m; ++k) os << "," << format_double(d[k]);
    os << "\n";
}

bool coeffs_equal(const CoeffVec& a, const CoeffVec& b) {
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void write_segment_rows(std::ostream& os, const std::vector<HermiteSegment>& segs, int m) {
    for (size_t i = 0; i < segs.size(); ++i) {
        const HermiteSegment& s = segs[i];
        if (i == 0) {
            write_row(os, s.t0, s.y0.data(), s.d0.data(), m);
        } else {
            const HermiteSegment& prev = segs[i - 1];
            // re-emit the join only when the one-sided derivatives disagree
            if (!(coeffs_equal(prev.y1, s.y0) && coeffs_equal(prev.d1, s.d0)))
                write_row(os, s.t0, s.y0.data(), s.d0.data(), m);
        }
        write_row(os, s.t1, s.y1.data(), s.d1.data(), m);
    }
}

}  // namespace

void write_history_csv(const HistoryBuffer& buf, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    write_header(os, buf.order());
    write_segment_rows(os, buf.segments(), buf.order());
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    const int m = traj.basis().order();
    write_header(os, m);
    write_segment_rows(os, traj.initial().segments(), m);
    // node 0 duplicates the initial anchor time; its derivative is the
    // ODE-consistent one and may jump off the initial segment's endpoint slope
    const CoeffVec y0 = traj.initial().eval(traj.start_time());
    const CoeffVec d0 = traj.initial().eval_deriv(traj.start_time());
    const CoeffVec n0 = traj.state(0), nd0 = traj.state_deriv(0);
    if (!(coeffs_equal(y0, n0) && coeffs_equal(d0, nd0)))
        write_row(os, traj.node_time(0), n0.data(), nd0.data(), m);
    for (int i = 1; i < traj.n_nodes(); ++i)
        write_row(os, traj.node_time(i), traj.state_ptr(i), traj.deriv_ptr(i), m);
}

HistoryBuffer load_history_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("empty trajectory file " + path);
    int m = 0;
    {
        std::stringstream hs(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(hs, field, ',')) fields.push_back(field);
        if (fields.size() < 3 || fields[0] != "t" || fields.size() % 2 == 0)
            throw ConfigError("malformed trajectory header in " + path);
        m = static_cast<int>((fields.size() - 1) / 2);
    }
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Row row;
        row.y.resize(static_cast<size_t>(m));
        row.d.resize(static_cast<size_t>(m));
        const char* p = line.c_str();
        char* end = nullptr;
        row.t = std::strtod(p, &end);
        for (int k = 0; k < 2 * m; ++k) {
            if (*end != ',') throw ConfigError("malformed trajectory row in " + path);
            p = end + 1;
            double v = std::strtod(p, &end);
            if (k < m)
                row.y[static_cast<size_t>(k)] = v;
            else
                row.d[static_cast<size_t>(k - m)] = v;
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw ConfigError("trajectory file needs at least two rows");

    std::vector<HermiteSegment> segs;
    for (size_t i = 0; i + 1 < rows.size(); ++i) {
        if (rows[i + 1].t == rows[i].t) continue;  // derivative-jump marker
        if (!(rows[i + 1].t > rows[i].t))
            throw ConfigError("trajectory rows are not time-ordered in " + path);
        HermiteSegment seg;
        seg.t0 = rows[i].t;
        seg.t1 = rows[i + 1].t;
        seg.y0 = rows[i].y;
        seg.d0 = rows[i].d;
        seg.y1 = rows[i + 1].y;
        seg.d1 = rows[i + 1].d;
        segs.push_back(std::move(seg));
    }
    const double span = rows.back().t - rows.front().t;
    return HistoryBuffer(span, rows.back().t, std::move(segs));
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns) {
    if (names.size() != columns.size() || columns.empty())
        throw ConfigError("write_columns_csv: names/columns mismatch");
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    for (size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
    os << "\n";
    const size_t n = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != n) throw ConfigError("write_columns_csv: ragged columns");
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < columns.size(); ++j)
            os << (j ? "," : "") << format_double(columns[j][i]);
        os << "\n";
    }
}

}  // namespace sddpde
