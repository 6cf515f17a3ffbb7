#include "antitonic/csv.hpp"

#include "antitonic/error.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace antitonic {

std::string format_double(double x)
{
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc()) throw NumericError("format_double: conversion failed");
    return {buf.data(), ptr};
}

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

double parse_double(const std::string& s, std::size_t line)
{
    std::string t = trim(s);
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    double v = 0;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw DataError("cannot parse number '" + t + "'", line);
    return v;
}

Table read_csv(std::istream& in)
{
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = cells;
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError("expected " + std::to_string(t.header.size()) + " fields, found " +
                                std::to_string(cells.size()),
                            lineno);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, lineno));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DataError("empty file");
    return t;
}

Table read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_csv(in);
}

void write_csv(std::ostream& out, const Table& t)
{
    for (std::size_t j = 0; j < t.header.size(); ++j) out << (j ? "," : "") << t.header[j];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
        out << '\n';
    }
}

void write_csv_file(const std::string& path, const Table& t)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    write_csv(out, t);
    if (!out) throw DataError("write failed for " + path);
}

RegressionTable regression_from_table(const Table& t, bool add_intercept)
{
    const std::size_t k = t.header.size();
    if (k < 1 || t.header.back() != "y") throw DataError("last column must be named y", 1);
    for (std::size_t j = 0; j + 1 < k; ++j)
        if (t.header[j] != "x" + std::to_string(j + 1))
            throw DataError("expected column x" + std::to_string(j + 1) + ", found '" + t.header[j] + "'", 1);
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto p = static_cast<Eigen::Index>(k - 1);
    RegressionTable r{Eigen::MatrixXd(n, p + (add_intercept ? 1 : 0)), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j) r.design(i, j) = row[static_cast<std::size_t>(j)];
        if (add_intercept) r.design(i, p) = 1.0;
        r.response(i) = row.back();
    }
    return r;
}

Table table_from_regression(const Eigen::MatrixXd& covariates, const Eigen::VectorXd& response)
{
    Table t;
    for (Eigen::Index j = 0; j < covariates.cols(); ++j) t.header.push_back("x" + std::to_string(j + 1));
    t.header.push_back("y");
    for (Eigen::Index i = 0; i < covariates.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index j = 0; j < covariates.cols(); ++j) row.push_back(covariates(i, j));
        row.push_back(response(i));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace antitonic
