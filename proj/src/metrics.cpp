#include "densctl/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace densctl {

int MetricsTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("metrics: no column named '" + name + "'");
}

std::vector<double> MetricsTable::column(const std::string& name) const {
    const int idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
}

void MetricsTable::append(std::vector<double> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("metrics: row width does not match columns");
    rows.push_back(std::move(row));
}

std::string to_csv(const MetricsTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += t.columns[i];
    }
    out += '\n';
    char buf[32];
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", r[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

MetricsTable metrics_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    MetricsTable t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": bad numeric cell '" + cell + "'");
            }
        }
        t.append(std::move(row));
    }
    return t;
}

}  // namespace densctl
