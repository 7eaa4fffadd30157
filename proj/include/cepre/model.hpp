#ifndef CEPRE_MODEL_HPP
#define CEPRE_MODEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "cepre/constellation.hpp"
#include "cepre/rng.hpp"

// Downlink model: i.i.d. Rayleigh channel, the transmit/receive chain
// r = sqrt(E_tx/N) * H * x + eta, and the squared-error objectives with
// their closed-form gradients. The objective/gradient kernels accept any
// Eigen dense expression.

namespace cepre {

using ChannelMatrix = Eigen::MatrixXcd;    // users x antennas
using SymbolVector = Eigen::VectorXcd;     // length users
using PhaseVector = Eigen::VectorXd;       // length antennas, unwrapped radians
using TransmitVector = Eigen::VectorXcd;   // length antennas

// transmit energy knob; SNR(dB) = 10*log10(E_tx) with unit noise variance
struct LinkScale {
  double e_tx = 1.0;

  static LinkScale from_snr_db(double snr_db) { return {std::pow(10.0, snr_db / 10.0)}; }
  double snr_db() const { return 10.0 * std::log10(e_tx); }
  double amplitude(Eigen::Index antennas) const { return std::sqrt(e_tx / double(antennas)); }
};

// eta ~ CN(0, variance * I); variance stays 1 in the Monte-Carlo protocol,
// 0 is allowed for noiseless checks
struct NoiseModel {
  double variance = 1.0;
  rng::Stream stream;

  explicit NoiseModel(rng::Stream s, double var = 1.0) : variance(var), stream(s) {}

  Eigen::VectorXcd draw(Eigen::Index m) {
    Eigen::VectorXcd eta(m);
    const double sigma = std::sqrt(variance);
    for (Eigen::Index i = 0; i < m; ++i) eta[i] = sigma * stream.cn01();
    return eta;
  }
};

// users x antennas matrix with i.i.d. CN(0,1) entries, filled column-major;
// deterministic for a given seed
inline ChannelMatrix generate_channel(int antennas, int users, std::uint64_t seed) {
  if (users <= 0 || users >= antennas)
    throw std::invalid_argument("generate_channel: need 0 < users < antennas");
  rng::Stream stream(seed);
  ChannelMatrix h(users, antennas);
  for (int col = 0; col < antennas; ++col)
    for (int row = 0; row < users; ++row) h(row, col) = stream.cn01();
  return h;
}

inline Eigen::VectorXcd receive(const ChannelMatrix& h, const TransmitVector& x,
                                const LinkScale& scale, NoiseModel& noise) {
  if (x.size() != h.cols())
    throw std::invalid_argument("receive: transmit vector length does not match channel");
  return scale.amplitude(h.cols()) * (h * x) + noise.draw(h.rows());
}

// e^{j*phi}, elementwise
template <typename Derived>
auto unit_phasor(const Eigen::MatrixBase<Derived>& phi) {
  return phi.derived().unaryExpr([](double p) { return std::polar(1.0, p); });
}

// f(x, s) = || alpha*s - H*x ||^2
template <typename DerivedX, typename DerivedS, typename DerivedH>
double objective_f(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedS>& s,
                   const Eigen::MatrixBase<DerivedH>& h, double alpha) {
  return (alpha * s.derived() - h.derived() * x.derived()).squaredNorm();
}

// g(phi, s) = f(e^{j*phi}, s)
template <typename DerivedP, typename DerivedS, typename DerivedH>
double objective_g(const Eigen::MatrixBase<DerivedP>& phi, const Eigen::MatrixBase<DerivedS>& s,
                   const Eigen::MatrixBase<DerivedH>& h, double alpha) {
  return objective_f(unit_phasor(phi).eval(), s, h, alpha);
}

// dg/dphi_n = -2 Im{ e^{-j*phi_n} h_n^H (alpha*s - H e^{j*phi}) }
template <typename DerivedP, typename DerivedS, typename DerivedH>
Eigen::VectorXd grad_g(const Eigen::MatrixBase<DerivedP>& phi, const Eigen::MatrixBase<DerivedS>& s,
                       const Eigen::MatrixBase<DerivedH>& h, double alpha) {
  const Eigen::VectorXcd x = unit_phasor(phi).eval();
  const Eigen::VectorXcd residual = alpha * s.derived() - h.derived() * x;
  const Eigen::VectorXcd back = h.derived().adjoint() * residual;
  return -2.0 * (x.conjugate().cwiseProduct(back)).imag();
}

// Wirtinger gradient df/dx = -alpha H^T s* + H^T H* x*; descent steps use its
// conjugate -H^H (alpha*s - H*x)
template <typename DerivedX, typename DerivedS, typename DerivedH>
Eigen::VectorXcd grad_f(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedS>& s,
                        const Eigen::MatrixBase<DerivedH>& h, double alpha) {
  const Eigen::VectorXcd residual = alpha * s.derived() - h.derived() * x.derived();
  return -(h.derived().transpose() * residual.conjugate());
}

}  // namespace cepre

#endif  // CEPRE_MODEL_HPP
