#pragma once

#include <string>
#include <vector>

namespace densctl {

/// Column-named numeric table; the CSV surface of every run.
struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
    void append(std::vector<double> row);
};

std::string to_csv(const MetricsTable& t);
MetricsTable metrics_from_csv_file(const std::string& path);

}  // namespace densctl
