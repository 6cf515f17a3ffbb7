#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace antitonic {

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& s, std::size_t line = 0);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Table& t);
void write_csv_file(const std::string& path, const Table& t);

// Regression layout: columns x1..x{d-1} then y. The design gets a trailing
// column of ones when `add_intercept` is set.
struct RegressionTable {
    Eigen::MatrixXd design;
    Eigen::VectorXd response;
};

RegressionTable regression_from_table(const Table& t, bool add_intercept);
Table table_from_regression(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& response);

} // namespace antitonic
