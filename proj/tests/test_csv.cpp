#include "antitonic/csv.hpp"
#include "antitonic/error.hpp"
#include "antitonic/numeric.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

using namespace antitonic;

TEST_SUITE("csv") {

TEST_CASE("double formatting round-trips")
{
    Rng rng(1);
    for (int k = 0; k < 20000; ++k) {
        std::uint64_t bits = rng.next();
        double x;
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x)) continue;
        double back = parse_double(format_double(x));
        CHECK(std::memcmp(&x, &back, sizeof x) == 0);
    }
    for (double x : {0.1, -2.5, 1e-300, 6.02e23, 3.0}) CHECK(parse_double(format_double(x)) == x);
    CHECK(format_double(3.0) == "3");
    CHECK(parse_double("+1.5") == 1.5);
}

TEST_CASE("table round trip")
{
    Table t{{"x1", "x2", "y"}, {{0.1, -3, 1e10}, {2.0 / 3, 5e-7, -0.25}}};
    std::stringstream ss;
    write_csv(ss, t);
    Table back = read_csv(ss);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
}

TEST_CASE("parse errors carry the line number")
{
    std::istringstream bad("x1,y\n1,2\n3,oops\n");
    try {
        read_csv(bad);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream ragged("x1,y\n1,2\n3\n");
    try {
        read_csv(ragged);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv(empty), DataError);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/file.csv"), DataError);
}

TEST_CASE("regression layout")
{
    Table t{{"x1", "x2", "y"}, {{1, 2, 3}, {4, 5, 6}, {7, 8, 10}}};
    auto r = regression_from_table(t, true);
    CHECK(r.design.cols() == 3);
    CHECK(r.design(1, 2) == 1);
    CHECK(r.design(2, 1) == 8);
    CHECK(r.response(2) == 10);
    CHECK(regression_from_table(t, false).design.cols() == 2);

    Table wrong{{"a", "y"}, {{1, 2}}};
    CHECK_THROWS_AS(regression_from_table(wrong, true), DataError);

    Eigen::MatrixXd cov(2, 2);
    cov << 1, 2, 3, 4;
    Eigen::VectorXd y(2);
    y << 5, 6;
    Table out = table_from_regression(cov, y);
    CHECK(out.header == std::vector<std::string>{"x1", "x2", "y"});
    CHECK(out.rows[1] == std::vector<double>{3, 4, 6});
}

}
