#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "judgecal/matrix.hpp"
#include "judgecal/text.hpp"

using namespace judgecal;

TEST_CASE("trim strips ASCII whitespace from both ends") {
    CHECK(trim("  x y\t\r\n") == "x y");
    CHECK(trim("") == "");
    CHECK(trim(" \t ") == "");
    CHECK(trim("abc") == "abc");
}

TEST_CASE("to_lower_ascii folds only ASCII") {
    CHECK(to_lower_ascii("PoSiTiVe") == "positive");
    CHECK(to_lower_ascii("A-Z 0_9") == "a-z 0_9");
}

TEST_CASE("split keeps empty fields") {
    const auto parts = split("a,,b,", ',');
    REQUIRE(parts.size() == 4);
    CHECK(parts[0] == "a");
    CHECK(parts[1] == "");
    CHECK(parts[2] == "b");
    CHECK(parts[3] == "");
}

TEST_CASE("parse_number accepts full-string decimals only") {
    CHECK(parse_number("3.5") == 3.5);
    CHECK(parse_number(" -2e3 ") == -2000.0);
    CHECK(parse_number("42") == 42.0);
    CHECK_FALSE(parse_number("3.5x").has_value());
    CHECK_FALSE(parse_number("").has_value());
    CHECK_FALSE(parse_number("x").has_value());
    CHECK_FALSE(parse_number("1 2").has_value());
}

TEST_CASE("format_fixed pads to the requested decimals") {
    CHECK(format_fixed(-0.21, 4) == "-0.2100");
    CHECK(format_fixed(0.5, 1) == "0.5");
    CHECK(format_fixed(35.50724, 1) == "35.5");
    CHECK(format_fixed(2.0, 0) == "2");
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, -3.25, 1e-9, 123456.789, 0.0}) {
        CHECK(parse_number(format_double(v)) == v);
    }
    CHECK(format_double(2.0) == "2");
}

TEST_CASE("iso8601 timestamp shape") {
    const auto ts = iso8601_utc_now();
    REQUIRE(ts.size() == 24);
    CHECK(ts[4] == '-');
    CHECK(ts[10] == 'T');
    CHECK(ts[23] == 'Z');
}

TEST_CASE("matrix identity, trace, symmetry") {
    const auto m = Matrix::identity(3);
    CHECK(m.trace() == 3.0);
    CHECK(m.is_symmetric());
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    CHECK_FALSE(a.is_symmetric());
}

TEST_CASE("cholesky reproduces a known SPD factorization") {
    // A = L L^T with L = [[2,0],[1,3]] -> A = [[4,2],[2,10]].
    Matrix a(2, 2);
    a(0, 0) = 4.0; a(0, 1) = 2.0;
    a(1, 0) = 2.0; a(1, 1) = 10.0;
    const auto l = cholesky(a);
    REQUIRE(l.has_value());
    CHECK((*l)(0, 0) == doctest::Approx(2.0));
    CHECK((*l)(1, 0) == doctest::Approx(1.0));
    CHECK((*l)(1, 1) == doctest::Approx(3.0));
    CHECK((*l)(0, 1) == 0.0);
}

TEST_CASE("cholesky rejects non-positive-definite input") {
    Matrix a(2, 2);
    a(0, 0) = 1.0; a(0, 1) = 2.0;
    a(1, 0) = 2.0; a(1, 1) = 1.0; // eigenvalues 3 and -1
    CHECK_FALSE(cholesky(a).has_value());
    Matrix z(2, 2); // all zeros
    CHECK_FALSE(cholesky(z).has_value());
}

TEST_CASE("frobenius distance") {
    Matrix a(2, 2), b(2, 2);
    a(0, 0) = 3.0;
    b(1, 1) = 4.0;
    CHECK(a.frobenius_distance(b) == doctest::Approx(5.0));
    CHECK(a.frobenius_norm() == doctest::Approx(3.0));
}
