#pragma once

#include "waverate/control.hpp"
#include "waverate/path.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace waverate {

// Deterministic text output: '.' decimal separator, 17 significant digits,
// LF line endings, header row. Equal inputs produce equal bytes.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row) {
        if (row.size() != header.size())
            throw std::runtime_error("Table: row width does not match header");
        rows.push_back(std::move(row));
    }
};

inline std::string render_csv(const Table& t) {
    std::ostringstream out;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (i) out << ',';
        out << t.header[i];
    }
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (std::holds_alternative<double>(row[i]))
                out << format_real(std::get<double>(row[i]));
            else if (std::holds_alternative<long>(row[i]))
                out << std::get<long>(row[i]);
            else
                out << std::get<std::string>(row[i]);
        }
        out << '\n';
    }
    return out.str();
}

inline void write_table(const Table& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_table: cannot open '" + path + "'");
    std::string body = render_csv(t);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!f) throw std::runtime_error("write_table: write failed for '" + path + "'");
}

// FNV-1a over file bytes; the manifest digest
inline std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("fnv1a_file: cannot open '" + path + "'");
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// control file: header "n m T", then m rows of n whitespace-separated values
inline void save_control(const Control& h, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("save_control: cannot open '" + path + "'");
    f << h.n << ' ' << h.m << ' ' << format_real(h.T) << '\n';
    for (int i = 0; i < h.m; ++i) {
        for (int k = 0; k < h.n; ++k) {
            if (k) f << ' ';
            f << format_real(h.at(i, k));
        }
        f << '\n';
    }
}

inline Control load_control(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_control: cannot open '" + path + "'");
    int n = 0, m = 0;
    double T = 0.0;
    if (!(f >> n >> m >> T)) throw std::runtime_error("load_control: bad header in '" + path + "'");
    Control h(n, m, T);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < n; ++k)
            if (!(f >> h.at(i, k)))
                throw std::runtime_error("load_control: truncated data in '" + path + "'");
    return h;
}

// path CSV: columns t,x,f over all grid times and nodes
inline Table path_table(const DiscretePath& p) {
    Table t;
    t.header = {"t", "x", "f"};
    for (int i = 0; i <= p.m(); ++i)
        for (int k = 0; k <= p.n(); ++k)
            t.add_row({p.time(i), static_cast<double>(k) / p.n(), p.pos(i, k)});
    return t;
}

// Rebuild a nodal trajectory from the t,x,f table. Velocities are not part of
// the format, so they are reconstructed by fourth-order central differences
// in time (one-sided at the ends); inversion quality from a loaded path is
// limited by that reconstruction.
inline DiscretePath load_path_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_path_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_path_csv: empty file");
    std::vector<double> ts, xs, fs;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream iss(line);
        double t, x, v;
        if (!(iss >> t >> x >> v)) throw std::runtime_error("load_path_csv: bad row");
        ts.push_back(t);
        xs.push_back(x);
        fs.push_back(v);
    }
    if (ts.empty()) throw std::runtime_error("load_path_csv: no rows");
    int n = 0;
    while (n + 1 < static_cast<int>(xs.size()) && xs[n + 1] > xs[n]) ++n;
    if (n < 2) throw std::runtime_error("load_path_csv: cannot infer spatial grid");
    std::size_t cols = static_cast<std::size_t>(n) + 1;
    if (ts.size() % cols != 0) throw std::runtime_error("load_path_csv: ragged table");
    int m = static_cast<int>(ts.size() / cols) - 1;
    if (m < 4) throw std::runtime_error("load_path_csv: need at least 5 time levels");
    double T = ts.back();
    DiscretePath p(n, m, T);
    for (int i = 0; i <= m; ++i)
        for (int k = 0; k <= n; ++k)
            p.pos(i, k) = fs[static_cast<std::size_t>(i) * cols + k];
    double dt = p.dt();
    for (int k = 1; k < n; ++k) {
        for (int i = 0; i <= m; ++i) {
            double v;
            if (i >= 2 && i <= m - 2)
                v = (-p.pos(i + 2, k) + 8.0 * p.pos(i + 1, k) - 8.0 * p.pos(i - 1, k) +
                     p.pos(i - 2, k)) /
                    (12.0 * dt);
            else if (i == 0)
                v = (-3.0 * p.pos(0, k) + 4.0 * p.pos(1, k) - p.pos(2, k)) / (2.0 * dt);
            else if (i == m)
                v = (3.0 * p.pos(m, k) - 4.0 * p.pos(m - 1, k) + p.pos(m - 2, k)) / (2.0 * dt);
            else
                v = (p.pos(i + 1, k) - p.pos(i - 1, k)) / (2.0 * dt);
            p.vel(i, k) = v;
        }
    }
    return p;
}

} // namespace waverate
