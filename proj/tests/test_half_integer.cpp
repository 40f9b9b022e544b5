#include <catch2/catch_amalgamated.hpp>

#include "rkp/half_integer.hpp"

using rkp::HalfInteger;

TEST_CASE("half-integer arithmetic is exact", "[half_integer]") {
    const HalfInteger a(3);               // 3
    const HalfInteger b = HalfInteger::halves(7);  // 7/2

    CHECK(a.twice() == 6);
    CHECK(b.twice() == 7);
    CHECK(a.is_integer());
    CHECK_FALSE(b.is_integer());
    CHECK((a + b).twice() == 13);
    CHECK((a - b).twice() == -1);
    CHECK((-b).twice() == -7);
    CHECK((b * 2) == HalfInteger(7));
    CHECK(a == HalfInteger::halves(6));
    CHECK(b < a + HalfInteger(1));
}

TEST_CASE("half-integer values and rendering", "[half_integer]") {
    CHECK(HalfInteger(2).str() == "2");
    CHECK(HalfInteger::halves(-1).str() == "-1/2");
    CHECK(HalfInteger::halves(31).str() == "31/2");
    CHECK(HalfInteger::halves(5).value() == Catch::Approx(2.5));

    // The family index 4k - 1/2 as half-integer arithmetic.
    const HalfInteger family = HalfInteger(4 * 8) - HalfInteger::halves(1);
    CHECK(family.twice() == 63);
    CHECK(family.str() == "63/2");
}
