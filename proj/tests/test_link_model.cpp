#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "skyhaul/link_model.hpp"

using namespace skyhaul;

namespace {
const double deg = kPi / 180.0;
}

TEST_CASE("bundled fit reproduces the frozen surface coefficients") {
  const LinkModelParams& p = default_params();
  CHECK(p.a == Catch::Approx(-0.005).margin(1e-9));
  CHECK(p.b == Catch::Approx(-265.2358312339034).margin(1e-6));
  CHECK(p.c == Catch::Approx(-13.580076377205847).margin(1e-6));
  CHECK(p.d == Catch::Approx(-3.8).margin(1e-9));
  CHECK(p.e == Catch::Approx(0.0).margin(1e-6));
  CHECK(p.f == Catch::Approx(2470.0).margin(1e-6));
  CHECK(p.conn_threshold == 100.0);
  CHECK(p.rate_cap == 2310.0);
  CHECK(p.max_fov == Catch::Approx(82 * deg));
}

TEST_CASE("the fit is exact on every anchor sample") {
  const LinkModelParams& p = default_params();
  for (const auto& s : default_anchor_table()) {
    double c = capacity(s.distance, s.dphi, p);
    CHECK(c == Catch::Approx(s.throughput).margin(1e-5));
  }
}

TEST_CASE("capacity clamps, cuts off past the field of view and rejects bad distance") {
  const LinkModelParams& p = default_params();
  CHECK(capacity(150, 0, p) == Catch::Approx(1787.5));
  CHECK(capacity(180, 0, p) == Catch::Approx(1624.0));
  CHECK(capacity(360, 0, p) == Catch::Approx(454.0));
  CHECK(capacity(2, 0, p) == p.rate_cap);       // clamped at the MCS ceiling
  CHECK(capacity(1000, 0, p) == 0.0);           // clamped below at zero
  CHECK(capacity(40, 83 * deg, p) == 0.0);      // beyond the field of view
  CHECK(capacity(40, -30 * deg, p) == capacity(40, 30 * deg, p));
  CHECK_THROWS_AS(capacity(0, 0, p), NonPositiveDistance);
  CHECK_THROWS_AS(capacity(-5, 0, p), NonPositiveDistance);
}

TEST_CASE("capacity decreases in distance and in misalignment") {
  const LinkModelParams& p = default_params();
  for (double d = 45; d <= 400; d += 5)
    CHECK(capacity(d, 0, p) < capacity(d - 5, 0, p) + 1e-9);
  for (double a = 5; a <= 80; a += 5)
    CHECK(capacity(100, a * deg, p) < capacity(100, (a - 5) * deg, p) + 1e-9);
}

TEST_CASE("max_range inverts capacity at the demanded rate") {
  const LinkModelParams& p = default_params();
  CHECK(max_range(100, 0, p) == Catch::Approx(406.384).margin(1e-2));
  CHECK(max_range(450, 0, p) == Catch::Approx(360.54).margin(1e-2));
  CHECK(max_range(900, 0, p) == Catch::Approx(297.05).margin(1e-2));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> td(100, 2300), pd(0, 60 * deg);
  for (int i = 0; i < 500; ++i) {
    double T = td(rng), phi = pd(rng);
    double D;
    try {
      D = max_range(T, phi, p);
    } catch (const DemandUnsatisfiableAtAnyRange&) {
      // then even a very short link must fall short of T
      CHECK(capacity(0.01, phi, p) < T);
      continue;
    }
    CHECK(capacity(D, phi, p) == Catch::Approx(T).margin(1e-6));
    CHECK(capacity(D + 1, phi, p) < T);
  }
  CHECK_THROWS_AS(max_range(0, 0, p), DemandUnsatisfiableAtAnyRange);
  CHECK_THROWS_AS(max_range(2311, 0, p), DemandUnsatisfiableAtAnyRange);
  CHECK_THROWS_AS(max_range(100, 83 * deg, p), DemandUnsatisfiableAtAnyRange);
}

TEST_CASE("sector bookkeeping: serving radio, boresight, misalignment") {
  UavState u;
  u.pos = PolarPos(0, 0);
  u.yaw = 0;
  u.num_radios = 4;
  CHECK(serving_radio(u, 0.0) == 0);
  CHECK(serving_radio(u, 44 * deg) == 0);
  CHECK(serving_radio(u, 46 * deg) == 1);
  CHECK(serving_radio(u, 180 * deg) == 2);
  CHECK(serving_radio(u, 271 * deg) == 3);
  CHECK(serving_radio(u, 316 * deg) == 0);
  CHECK(boresight(u, 1) == Catch::Approx(kPi / 2));
  CHECK(misalignment(u, 30 * deg) == Catch::Approx(30 * deg));
  CHECK(misalignment(u, 100 * deg) == Catch::Approx(10 * deg));
  u.yaw = 10 * deg;
  CHECK(misalignment(u, 0.0) == Catch::Approx(10 * deg));
}

TEST_CASE("link_capacity sums the misalignment of both ends") {
  const LinkModelParams& p = default_params();
  UavState a, b;
  a.pos = PolarPos(0, 0);
  b.pos = PolarPos(100, 0);
  a.num_radios = b.num_radios = 1;
  a.yaw = 0;               // perfectly toward b
  b.yaw = kPi;             // perfectly toward a
  CHECK(link_capacity(a, b, p) == Catch::Approx(capacity(100, 0, p)));
  a.yaw = 20 * deg;
  b.yaw = kPi + 40 * deg;
  CHECK(link_capacity(a, b, p) == Catch::Approx(capacity(100, 60 * deg, p)));
  CHECK(is_connected(a, b, p) == (capacity(100, 60 * deg, p) >= p.conn_threshold));
  b.pos = a.pos;
  CHECK_THROWS_AS(link_capacity(a, b, p), CoincidentPositions);
}

TEST_CASE("fit_params recovers planted coefficients") {
  LinkModelParams truth;
  truth.a = -0.004;
  truth.b = -200;
  truth.c = -10;
  truth.d = -3;
  truth.e = -40;
  truth.f = 2400;
  truth.rate_cap = 1e9;  // keep evaluation unclamped
  truth.max_fov = kPi;
  std::vector<AnchorSample> samples;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dd(10, 400), pp(0, 1.2);
  for (int i = 0; i < 40; ++i) {
    AnchorSample s;
    s.distance = dd(rng);
    s.dphi = pp(rng);
    s.throughput = truth.a * s.distance * s.distance + truth.b * s.dphi * s.dphi +
                   truth.c * s.dphi * s.distance + truth.d * s.distance + truth.e * s.dphi +
                   truth.f;
    samples.push_back(s);
  }
  auto p = fit_params(samples);
  CHECK(p.a == Catch::Approx(truth.a).margin(1e-6));
  CHECK(p.b == Catch::Approx(truth.b).margin(1e-3));
  CHECK(p.c == Catch::Approx(truth.c).margin(1e-4));
  CHECK(p.d == Catch::Approx(truth.d).margin(1e-4));
  CHECK(p.e == Catch::Approx(truth.e).margin(1e-3));
  CHECK(p.f == Catch::Approx(truth.f).margin(1e-3));
}

TEST_CASE("fit_params rejects degenerate designs") {
  CHECK_THROWS_AS(fit_params({}), SingularDesign);
  std::vector<AnchorSample> few(5, AnchorSample{100, 0.1, 500, 1});
  CHECK_THROWS_AS(fit_params(few), SingularDesign);
  // many copies of the same point are still rank deficient
  std::vector<AnchorSample> same(20, AnchorSample{100, 0.1, 500, 1});
  CHECK_THROWS_AS(fit_params(same), SingularDesign);
}

TEST_CASE("chain_misalign depends on the radio count parity") {
  CHECK(chain_misalign(2) == 0.0);
  CHECK(chain_misalign(4) == Catch::Approx(0.0).margin(1e-12));
  CHECK(chain_misalign(6) == Catch::Approx(0.0).margin(1e-12));
  CHECK(chain_misalign(3) == Catch::Approx(kPi / 3));
  CHECK(chain_misalign(5) == Catch::Approx(kPi / 5));
  CHECK(chain_misalign(1) == Catch::Approx(kPi));
}
