#include "antitonic/densities.hpp"
#include "antitonic/error.hpp"
#include "antitonic/experiment.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>

using namespace antitonic;

TEST_SUITE("experiment") {

TEST_CASE("simulation")
{
    ExperimentSpec s;
    s.n = 2000;
    s.d = 4;
    s.seed = 5;
    auto noise = make_density("gaussian");
    auto th = batch_theta(s);
    CHECK(th.norm() == doctest::Approx(3.0));
    auto a = simulate(s, *noise, 3, th);
    auto b = simulate(s, *noise, 3, th);
    CHECK(a.design == b.design);
    CHECK(a.response == b.response);
    auto c = simulate(s, *noise, 4, th);
    CHECK(a.response != c.response);
    Eigen::VectorXd m = a.design.colwise().mean();
    for (int j = 0; j < 3; ++j) CHECK(std::abs(m(j) - 1) < 3 / std::sqrt(2000.0));
    CHECK(m(3) == 1);

    s.redraw_theta = true;
    auto r1 = simulate(s, *noise, 1, th), r2 = simulate(s, *noise, 2, th);
    CHECK(r1.theta0 != r2.theta0);
    CHECK(r1.theta0.norm() == doctest::Approx(3.0));
}

TEST_CASE("parallel_for visits every slot once")
{
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(5, 2, [](std::size_t i) {
                        if (i == 3) throw InvalidInput("boom");
                    }),
                    InvalidInput);
}

TEST_CASE("results do not depend on the thread count")
{
    ExperimentSpec s;
    s.noise = "cauchy";
    s.n = 200;
    s.d = 3;
    s.reps = 6;
    s.seed = 11;
    s.estimators = {"asm", "1s", "lad"};
    s.threads = 1;
    auto one = mse_compare(s);
    s.threads = 3;
    auto three = mse_compare(s);
    REQUIRE(one.size() == three.size());
    for (std::size_t k = 0; k < one.size(); ++k) {
        CAPTURE(one[k].name);
        CHECK(one[k].errors == three[k].errors);
        CHECK(one[k].mse == three[k].mse);
    }
}

TEST_CASE("experiment settings are validated")
{
    ExperimentSpec s;
    s.estimators = {"nope"};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    ExperimentSpec t;
    t.n = 5;
    CHECK_THROWS_AS(t.validate(), InvalidInput);
    ExperimentSpec u;
    u.reps = 0;
    CHECK_THROWS_AS(u.validate(), InvalidInput);
    CHECK(default_pilot_for("location_mix").kind == PilotSpec::Kind::ols);
    CHECK(default_pilot_for("cauchy").kind == PilotSpec::Kind::lad);
}

TEST_CASE("table formatting")
{
    ExperimentSpec s;
    s.noise = "gaussian";
    s.n = 100;
    s.d = 3;
    s.reps = 3;
    s.estimators = {"ols", "lad"};
    s.threads = 1;
    auto rows = mse_compare(s);
    std::string tab = format_mse_table(rows);
    CHECK(tab.rfind("estimator,mse,mse_x1e3,se,ok,failures,mean_time_s,median_time_s\n", 0) == 0);
    CHECK(tab.find("\nols,") != std::string::npos);
    CHECK(rows[0].ok == 3);
}

}
