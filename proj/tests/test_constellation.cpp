#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>

#include "cepre/constellation.hpp"
#include "cepre/rng.hpp"
#include "test_util.hpp"

using namespace cepre;

namespace {

// circular distance between two phases
double phase_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

// enumeration oracle: nearest of the 2^B constellation phases
double quantize_oracle(double phi, int bits) {
  const int count = 1 << bits;
  double best = 0.0;
  double best_d = phase_distance(phi, 0.0);
  for (int k = 1; k < count; ++k) {
    const double cand = kTwoPi * k / count;
    const double d = phase_distance(phi, cand);
    if (d < best_d) {
      best_d = d;
      best = cand;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("qpsk modulation hits the Gray anchors") {
  CHECK(qpsk_modulate(0, 0).value == Complex(kInvSqrt2, kInvSqrt2));
  CHECK(qpsk_modulate(0, 1).value == Complex(-kInvSqrt2, kInvSqrt2));
  CHECK(qpsk_modulate(1, 1).value == Complex(-kInvSqrt2, -kInvSqrt2));
  CHECK(qpsk_modulate(1, 0).value == Complex(kInvSqrt2, -kInvSqrt2));
  for (int d = 0; d < 4; ++d) CHECK(std::abs(std::norm(qpsk_point(d)) - 1.0) < 1e-15);
  CHECK_THROWS_AS(qpsk_modulate(2, 0), std::invalid_argument);
}

TEST_CASE("Gray map: neighbours on the circle differ in exactly one bit") {
  std::array<int, 4> digits{0, 1, 2, 3};
  std::sort(digits.begin(), digits.end(), [](int a, int b) {
    return std::arg(qpsk_point(a)) < std::arg(qpsk_point(b));
  });
  for (int i = 0; i < 4; ++i) {
    const int lhs = digits[i];
    const int rhs = digits[(i + 1) % 4];
    const int differing = __builtin_popcount(static_cast<unsigned>(lhs ^ rhs));
    CHECK(differing == 1);
  }
}

TEST_CASE("qpsk decision picks the open quadrant, ties go positive") {
  CHECK(qpsk_decide(Complex(0.3, 0.2)).value == qpsk_point(0));
  CHECK(qpsk_decide(Complex(-5.0, 0.01)).value == qpsk_modulate(0, 1).value);
  CHECK(qpsk_decide(Complex(0.0, 0.0)).value == qpsk_point(0));
  CHECK(qpsk_decide(Complex(0.0, -1.0)).b1 == 0);

  // matches brute-force minimum distance away from the axes
  rng::Stream stream(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const Complex r{4.0 * stream.uniform() - 2.0, 4.0 * stream.uniform() - 2.0};
    int best = 0;
    double best_d = std::abs(r - qpsk_point(0));
    for (int d = 1; d < 4; ++d)
      if (std::abs(r - qpsk_point(d)) < best_d) {
        best_d = std::abs(r - qpsk_point(d));
        best = d;
      }
    CHECK(qpsk_decide(r).digit() == best);
  }

  // decisions invert modulation
  for (int b0 = 0; b0 < 2; ++b0)
    for (int b1 = 0; b1 < 2; ++b1) {
      const QpskSymbol tx = qpsk_modulate(b0, b1);
      const QpskSymbol rx = qpsk_decide(tx.value);
      CHECK(rx.b0 == b0);
      CHECK(rx.b1 == b1);
    }
}

TEST_CASE("phase quantizer: anchors, tie rule, oracle agreement") {
  const PskOrder b2 = PskOrder::psk(2);
  const PskOrder b3 = PskOrder::psk(3);

  CHECK(quantize_phase(0.1, b2) == 0.0);
  // exact midpoint between k=0 and k=1 rounds to the smaller index
  CHECK(quantize_phase(kPi / 4.0, b2) == 0.0);
  // derived by enumerating all 8 phases: pi is nearest to 3.0 rad
  CHECK(quantize_phase(3.0, b3) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(quantize_phase(3.0, b3) == quantize_oracle(3.0, 3));

  // unquantized passthrough
  CHECK(quantize_phase(1.2345, PskOrder::unquantized()) == 1.2345);

  rng::Stream stream(21);
  for (int trial = 0; trial < 5000; ++trial) {
    const double phi = 40.0 * (stream.uniform() - 0.5);
    const int bits = 2 + static_cast<int>(stream.below(7));
    const PskOrder order = PskOrder::psk(bits);
    const double q = quantize_phase(phi, order);
    // oracle agreement (midpoint ties are excluded by measure zero)
    CHECK(phase_distance(q, quantize_oracle(phi, bits)) < 1e-9);
    // output is exactly a constellation phase and quantization is idempotent
    const double step = kTwoPi / order.count();
    const int k = static_cast<int>(std::lround(q / step));
    CHECK(q == k * step);
    CHECK(quantize_phase(q, order) == q);
    // closure: CE is preserved after quantization (to one ulp of rounding)
    CHECK(std::abs(std::abs(std::polar(1.0, q)) - 1.0) <= std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("normalize_to_ce") {
  CHECK(normalize_to_ce(Complex(2.0, 0.0)) == Complex(1.0, 0.0));
  CHECK(std::abs(normalize_to_ce(Complex(3.0, 4.0)) - Complex(0.6, 0.8)) < 1e-15);
  CHECK(normalize_to_ce(Complex(0.0, 0.0)) == Complex(1.0, 0.0));
}

TEST_CASE("polygon projection: worked points") {
  const PskOrder b2 = PskOrder::psk(2);
  CHECK(project_polygon(Complex(0.0, 0.0), b2) == Complex(0.0, 0.0));
  CHECK(std::abs(project_polygon(Complex(2.0, 0.0), b2) - Complex(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(project_polygon(Complex(0.9, 0.9), b2) - Complex(0.5, 0.5)) < 1e-12);
  CHECK(std::abs(project_polygon(Complex(3.0, 4.0), PskOrder::unquantized()) - Complex(0.6, 0.8)) <
        1e-12);
}

TEST_CASE("polygon projection: oracle, idempotence, non-expansiveness, equivariance") {
  rng::Stream stream(99);
  for (const int bits : {2, 3, 4}) {
    const PskOrder order = PskOrder::psk(bits);
    const testutil::PolygonOracle oracle(order, 5e-3, 2e-3);
    const int count = order.count();
    for (int trial = 0; trial < 400; ++trial) {
      const Complex x{6.0 * (stream.uniform() - 0.5), 6.0 * (stream.uniform() - 0.5)};
      const Complex p = project_polygon(x, order);

      // dense-sample oracle (coarse grid here; the acceptance suite runs the
      // >= 1e6-sample version)
      CHECK(std::abs(p - oracle.project(x)) < 5e-3);
      // result is a member and projecting twice changes nothing
      CHECK(testutil::inside_polygon(p, order, 1e-12));
      CHECK(std::abs(project_polygon(p, order) - p) < 1e-12);
      // interior points are fixed
      if (testutil::inside_polygon(x, order, -1e-9)) CHECK(std::abs(p - x) < 1e-12);

      // non-expansiveness against a second draw
      const Complex y{6.0 * (stream.uniform() - 0.5), 6.0 * (stream.uniform() - 0.5)};
      const Complex q = project_polygon(y, order);
      CHECK(std::abs(p - q) <= std::abs(x - y) + 1e-12);

      // equivariance under the polygon's own rotations
      const int m = static_cast<int>(stream.below(count));
      const Complex spin = std::polar(1.0, kTwoPi * m / count);
      CHECK(std::abs(project_polygon(spin * x, order) - spin * p) < 1e-12);
    }
  }
}

TEST_CASE("disc projection when unquantized") {
  rng::Stream stream(5);
  const PskOrder inf = PskOrder::unquantized();
  for (int trial = 0; trial < 200; ++trial) {
    const Complex x{4.0 * (stream.uniform() - 0.5), 4.0 * (stream.uniform() - 0.5)};
    const Complex p = project_polygon(x, inf);
    if (std::abs(x) <= 1.0)
      CHECK(p == x);
    else
      CHECK(std::abs(p - x / std::abs(x)) < 1e-15);
  }
}

TEST_CASE("symbol vector indexing and quarter-turn rotation") {
  const int users = 3;
  const std::uint32_t total = symbol_count(users);
  CHECK(total == 64);
  for (std::uint32_t idx = 0; idx < total; ++idx) {
    const Eigen::VectorXcd s = symbols_from_index(idx, users);
    for (int u = 0; u < users; ++u) CHECK(s[u] == qpsk_point(symbol_digit(idx, users, u)));

    // rotating the index multiplies the vector by exactly +j
    const Eigen::VectorXcd rotated = symbols_from_index(rotate_symbol_index(idx, users, 1), users);
    for (int u = 0; u < users; ++u) CHECK(rotated[u] == Complex(0.0, 1.0) * s[u]);

    // four quarter turns come back around
    CHECK(rotate_symbol_index(idx, users, 4) == idx);
  }
}

TEST_CASE("psk order bounds") {
  CHECK_THROWS_AS(PskOrder::psk(1), std::invalid_argument);
  CHECK_THROWS_AS(PskOrder::psk(9), std::invalid_argument);
  CHECK(PskOrder::psk(2).count() == 4);
  CHECK(PskOrder::psk(8).count() == 256);
  CHECK(PskOrder::unquantized().is_unquantized());
}
