#include <cmath>
#include <numbers>

#include "catch_amalgamated.hpp"
#include "jwdiscord/spectral.hpp"

using namespace jwd;
using Catch::Matchers::WithinAbs;

TEST_CASE("three-node dispersion") {
  auto spec = build_spectral({3, 1.0, 0.0});
  REQUIRE(spec->size() == 3);
  CHECK_THAT(spec->wavenumber(0), WithinAbs(std::numbers::pi / 4, 1e-15));
  CHECK_THAT(spec->energy(0), WithinAbs(std::sqrt(2.0) / 2, 1e-15));
  CHECK_THAT(spec->energy(1), WithinAbs(0.0, 1e-15));
  CHECK_THAT(spec->energy(2), WithinAbs(-std::sqrt(2.0) / 2, 1e-15));
}

TEST_CASE("Larmor frequency shifts the dispersion") {
  auto spec = build_spectral({2, 1.0, 5.0});
  CHECK_THAT(spec->energy(0), WithinAbs(5.5, 1e-14));
  CHECK_THAT(spec->energy(1), WithinAbs(4.5, 1e-14));
}

TEST_CASE("sine transform is orthogonal and symmetric") {
  for (int n : {2, 5, 12, 17}) {
    auto spec = build_spectral({n, 1.0, 0.0});
    CHECK(orthogonality_residual(*spec) < 1e-12);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) CHECK(spec->g(a, b) == spec->g(b, a));
  }
}

TEST_CASE("orthogonality checker catches a corrupted transform") {
  SpectralData spec({17, 1.0, 0.0});
  CHECK(orthogonality_residual(spec) < 1e-12);
  spec.mutable_transform_for_testing()(3, 4) += 1e-3;
  CHECK(orthogonality_residual(spec) > 1e-5);
}

TEST_CASE("chain configuration is validated") {
  CHECK_THROWS_AS(build_spectral({1, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_spectral({5, 0.0, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(build_spectral({2, -1.0, 0.3}));
}
