#include <cmath>

#include <doctest.h>

#include "oracles.hpp"

// The test oracles themselves are pinned against published constants.
TEST_CASE("Bessel oracles reproduce the tabulated roots") {
    CHECK(oracles::bessel_j0(0.0) == 1.0);
    CHECK(oracles::bessel_j1(0.0) == 0.0);
    // Abramowitz & Stegun 9.5: j_{0,1} = 2.404825557695773,
    // j'_{1,1} = 1.841183781340659.
    CHECK(oracles::bessel_j0_first_root() == doctest::Approx(2.404825557695773).epsilon(1e-12));
    CHECK(oracles::bessel_j1prime_first_root() ==
          doctest::Approx(1.841183781340659).epsilon(1e-12));
}

TEST_CASE("dense_spd_solve inverts a known system") {
    std::vector<std::vector<double>> a{{4.0, 1.0}, {1.0, 3.0}};
    auto x = oracles::dense_spd_solve(a, {1.0, 2.0});
    // Solution of [[4,1],[1,3]] x = (1,2): x = (1/11, 7/11).
    CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-14));
}
