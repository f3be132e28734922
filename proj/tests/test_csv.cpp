#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hystersolve/csv.hpp"
#include "hystersolve/errors.hpp"

using namespace hyst;

TEST_SUITE("csv") {

TEST_CASE("parse") {
    const auto t = parse_csv("a,b\n1,2.5\n-3e-2, 4\n");
    REQUIRE(t.header.size() == 2);
    CHECK(t.rows.size() == 2);
    CHECK(t.column("b") == 1);
    CHECK(t.column_values("a") == std::vector<double>{1.0, -0.03});
    CHECK_THROWS_AS(t.column("c"), ParseError);
    CHECK_THROWS_AS(parse_csv(""), ParseError);
    try {
        parse_csv("a,b\n1,2\n3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_csv("a\nx\n"), ParseError);
}

TEST_CASE("round trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1e3, 1e3);
    std::vector<std::vector<double>> rows(50, std::vector<double>(3));
    for (auto& r : rows)
        for (auto& v : r) v = U(rng) * std::pow(10.0, static_cast<int>(U(rng)) % 12);
    rows[0] = {0.1, 1e-300, std::numeric_limits<double>::denorm_min()};
    std::ostringstream os;
    write_csv(os, {"x", "y", "z"}, rows);
    const auto t = parse_csv(os.str());
    CHECK(t.rows == rows);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(os.str().find('\r') == std::string::npos);
}

}  // TEST_SUITE
