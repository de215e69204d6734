#include "otrm/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "otrm/errors.hpp"

namespace otrm {

std::string format17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& payload) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : payload) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file: " + path);
    return out;
}

void write_meta(std::ofstream& out, const std::string& config_hash, std::uint64_t seed) {
    out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
}

}  // namespace

void write_measure_csv(const std::string& path, const discrete_measure& m,
                       const std::string& config_hash, std::uint64_t seed) {
    std::ofstream out = open_out(path);
    write_meta(out, config_hash, seed);
    out << "w";
    for (int c = 1; c <= m.d; ++c) out << ",x" << c;
    out << "\n";
    for (int i = 0; i < m.n(); ++i) {
        out << format17(m.w[static_cast<std::size_t>(i)]);
        const double* p = m.point(i);
        for (int c = 0; c < m.d; ++c) out << "," << format17(p[c]);
        out << "\n";
    }
    if (!out) throw config_error("write failed: " + path);
}

discrete_measure read_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open input file: " + path);
    discrete_measure m;
    m.d = 0;
    std::string line;
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            // Header row: w,x1,...,xd.
            int cols = 1;
            for (char c : line)
                if (c == ',') ++cols;
            if (cols < 2) throw config_error("measure csv: header has no coordinate columns");
            m.d = cols - 1;
            saw_header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        int col = 0;
        while (std::getline(ss, field, ',')) {
            const double v = std::stod(field);
            if (col == 0)
                m.w.push_back(v);
            else
                m.x.push_back(v);
            ++col;
        }
        if (col != m.d + 1) throw config_error("measure csv: row width mismatch");
    }
    if (!saw_header) throw config_error("measure csv: missing header");
    m.validate();
    return m;
}

void write_geodesic_csv(const std::string& path,
                        const std::vector<std::pair<double, discrete_measure>>& snaps,
                        const std::string& config_hash, std::uint64_t seed) {
    if (snaps.empty()) throw config_error("geodesic csv: no snapshots");
    std::ofstream out = open_out(path);
    write_meta(out, config_hash, seed);
    const int d = snaps.front().second.d;
    out << "t,w";
    for (int c = 1; c <= d; ++c) out << ",x" << c;
    out << "\n";
    for (const auto& [t, m] : snaps) {
        for (int i = 0; i < m.n(); ++i) {
            out << format17(t) << "," << format17(m.w[static_cast<std::size_t>(i)]);
            const double* p = m.point(i);
            for (int c = 0; c < d; ++c) out << "," << format17(p[c]);
            out << "\n";
        }
    }
    if (!out) throw config_error("write failed: " + path);
}

void write_trajectory_csv(const std::string& path, const flow_trajectory& traj,
                          const std::string& config_hash, std::uint64_t seed) {
    if (traj.snapshots.empty()) throw config_error("trajectory csv: no snapshots");
    std::ofstream out = open_out(path);
    write_meta(out, config_hash, seed);
    const int d = traj.snapshots.front().d;
    out << "t,particle_id";
    for (int c = 1; c <= d; ++c) out << ",x" << c;
    out << "\n";
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        const particle_ensemble& e = traj.snapshots[s];
        for (int i = 0; i < e.n(); ++i) {
            out << format17(traj.times[s]) << "," << i;
            const double* p = e.row(i);
            for (int c = 0; c < d; ++c) out << "," << format17(p[c]);
            out << "\n";
        }
    }
    if (!out) throw config_error("write failed: " + path);
}

void write_rows_csv(const std::string& path, const std::vector<rate_row>& rows,
                    const std::string& config_hash, std::uint64_t seed) {
    std::ofstream out = open_out(path);
    write_meta(out, config_hash, seed);
    out << "n,mean,stderr\n";
    for (const rate_row& r : rows)
        out << r.n << "," << format17(r.mean) << "," << format17(r.std_err) << "\n";
    if (!out) throw config_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out = open_out(path);
    out << content;
    if (!out) throw config_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open input file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace otrm
