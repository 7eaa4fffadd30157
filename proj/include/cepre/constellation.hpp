#ifndef CEPRE_CONSTELLATION_HPP
#define CEPRE_CONSTELLATION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>

// PSK constellation geometry: the Gray-mapped QPSK user alphabet with its
// quadrant decision, the transmit phase quantizer, and the exact Euclidean
// projection onto the filled regular 2^B-gon spanned by the transmit
// constellation. All functions here are pure and thread-safe.

namespace cepre {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;

// Transmit PSK resolution: B bits (2..8) or unquantized (B = inf).
class PskOrder {
 public:
  static constexpr int kMinBits = 2;
  static constexpr int kMaxBits = 8;

  static PskOrder unquantized() { return PskOrder(0); }

  static PskOrder psk(int bits) {
    if (bits < kMinBits || bits > kMaxBits)
      throw std::invalid_argument("PskOrder: bits must be in [2, 8]");
    return PskOrder(bits);
  }

  bool is_unquantized() const { return bits_ == 0; }
  bool is_finite() const { return bits_ != 0; }

  int bits() const {
    if (!is_finite()) throw std::logic_error("PskOrder: unquantized order has no bit count");
    return bits_;
  }

  // number of constellation points 2^B
  int count() const { return 1 << bits(); }

  bool operator==(const PskOrder&) const = default;

 private:
  explicit PskOrder(int bits) : bits_(bits) {}
  int bits_;  // 0 encodes unquantized
};

// Gray-mapped QPSK point for a bit pair. Walking the circle counterclockwise
// from (1+j)/sqrt(2) visits 00, 01, 11, 10, so neighbours differ in one bit.
struct QpskSymbol {
  Complex value;
  int b0;
  int b1;

  int digit() const { return (b0 << 1) | b1; }
};

inline constexpr double kInvSqrt2 = 0.7071067811865475244;

// digit d = (b0<<1)|b1
inline Complex qpsk_point(int digit) {
  const double re = (digit & 1) ? -kInvSqrt2 : kInvSqrt2;
  const double im = (digit & 2) ? -kInvSqrt2 : kInvSqrt2;
  return {re, im};
}

inline QpskSymbol qpsk_modulate(int b0, int b1) {
  if ((b0 & ~1) || (b1 & ~1)) throw std::invalid_argument("qpsk_modulate: bits must be 0 or 1");
  return {qpsk_point((b0 << 1) | b1), b0, b1};
}

// Minimum-distance QPSK decision = open-quadrant test. Samples exactly on a
// decision axis are treated as positive half-plane.
inline QpskSymbol qpsk_decide(Complex r) {
  const int b1 = r.real() < 0.0 ? 1 : 0;
  const int b0 = r.imag() < 0.0 ? 1 : 0;
  return {qpsk_point((b0 << 1) | b1), b0, b1};
}

// Nearest transmit constellation phase 2*pi*k/2^B to phi mod 2*pi, k in
// [0, 2^B). Exact midpoints round toward the smaller index. Unquantized
// input passes through untouched.
inline double quantize_phase(double phi, PskOrder order) {
  if (order.is_unquantized()) return phi;
  const int count = order.count();
  const double step = kTwoPi / count;
  double wrapped = std::fmod(phi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;  // fmod rounding at the seam
  const double pos = wrapped / step;
  int lo = static_cast<int>(pos);
  if (lo >= count) lo = count - 1;
  const int hi = (lo + 1) % count;
  const double dist_lo = pos - lo;
  const double dist_hi = (lo + 1) - pos;
  int k;
  if (dist_lo < dist_hi)
    k = lo;
  else if (dist_hi < dist_lo)
    k = hi;
  else
    k = std::min(lo, hi);
  return k * step;
}

// x/|x| with the degenerate input 0 pinned to 1+0j so the pipeline stays
// total even if a solver produces an exact zero entry.
inline Complex normalize_to_ce(Complex x) {
  const double mag = std::abs(x);
  if (mag == 0.0) return {1.0, 0.0};
  return x / mag;
}

// Euclidean projection onto the filled regular 2^B-gon with vertices
// e^{j*2*pi*k/2^B} (the closed unit disc when unquantized). The point is
// rotated into the sector [-pi/2^B, pi/2^B) around its nearest edge normal,
// clamped against that single edge with vertex clamping, and rotated back.
inline Complex project_polygon(Complex x, PskOrder order) {
  if (order.is_unquantized()) {
    const double mag = std::abs(x);
    return mag <= 1.0 ? x : x / mag;
  }
  const int count = order.count();
  const double sector = kTwoPi / count;
  const double half_angle = kPi / count;
  const double apothem = std::cos(half_angle);
  const double half_edge = std::sin(half_angle);

  const double theta = std::arg(x);
  const double mid = (std::floor(theta / sector) + 0.5) * sector;
  const Complex spin = std::polar(1.0, mid);
  const Complex local = x * std::conj(spin);
  if (local.real() <= apothem) return x;  // inside the binding half-plane
  const double along = std::clamp(local.imag(), -half_edge, half_edge);
  return Complex(apothem, along) * spin;
}

// --- symbol-vector indexing -------------------------------------------------
//
// A length-M QPSK vector is addressed by an M-digit base-4 integer; the most
// significant digit is user 0. Rotating every symbol by e^{j*pi/2} permutes
// digits along the circle walk 0 -> 1 -> 3 -> 2 -> 0.

inline int qpsk_digit_rotate(int digit, int quarter_turns) {
  static constexpr int kCycle[4] = {1, 3, 0, 2};  // one quarter turn
  int d = digit;
  for (int t = 0; t < (quarter_turns & 3); ++t) d = kCycle[d];
  return d;
}

// position of a digit along the rotation cycle starting at 0
inline int qpsk_digit_turns(int digit) {
  static constexpr int kTurns[4] = {0, 1, 3, 2};
  return kTurns[digit];
}

inline std::uint32_t symbol_count(int users) { return std::uint32_t(1) << (2 * users); }

inline int symbol_digit(std::uint32_t index, int users, int user) {
  return static_cast<int>((index >> (2 * (users - 1 - user))) & 3u);
}

inline Eigen::VectorXcd symbols_from_index(std::uint32_t index, int users) {
  Eigen::VectorXcd s(users);
  for (int u = 0; u < users; ++u) s[u] = qpsk_point(symbol_digit(index, users, u));
  return s;
}

inline std::uint32_t rotate_symbol_index(std::uint32_t index, int users, int quarter_turns) {
  std::uint32_t out = 0;
  for (int u = 0; u < users; ++u) {
    const int d = qpsk_digit_rotate(symbol_digit(index, users, u), quarter_turns);
    out |= std::uint32_t(d) << (2 * (users - 1 - u));
  }
  return out;
}

}  // namespace cepre

#endif  // CEPRE_CONSTELLATION_HPP
