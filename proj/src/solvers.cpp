#include "cepre/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace cepre {

namespace {

// below this step size the iterate is pinned (QGDM rounds every proposal away)
constexpr double kMuFloor = 1e-12;

double cec_violation(const Eigen::VectorXcd& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(std::abs(x[i]) - 1.0));
  return worst;
}

double rpc_violation(const Eigen::VectorXcd& x, PskOrder order) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    worst = std::max(worst, std::abs(project_polygon(x[i], order) - x[i]));
  return worst;
}

void check_dims(const SymbolVector& s, const ChannelMatrix& h, const char* who) {
  if (s.size() != h.rows()) throw std::invalid_argument(std::string(who) + ": symbol/channel dimension mismatch");
  if (h.cols() < 1) throw std::invalid_argument(std::string(who) + ": empty channel");
}

void check_params(const SolverParams& params, const char* who) {
  if (params.mu0 <= 0.0) throw std::invalid_argument(std::string(who) + ": mu0 must be positive");
  if (params.epsilon <= 0.0) throw std::invalid_argument(std::string(who) + ": epsilon must be positive");
  if (params.max_iterations < 1) throw std::invalid_argument(std::string(who) + ": max_iterations must be >= 1");
}

}  // namespace

double compute_alpha(int antennas, int users) {
  if (users <= 0 || users >= antennas)
    throw std::invalid_argument("compute_alpha: need 0 < users < antennas");
  return std::sqrt(static_cast<double>(antennas) * (antennas - users) / users);
}

SolveResult gdm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params) {
  if (params.constraint != Constraint::kCec)
    throw std::invalid_argument("gdm_solve: requires the CEC constraint");
  if (params.alpha <= 0.0) throw std::invalid_argument("gdm_solve: alpha must be positive");
  check_dims(s, h, "gdm_solve");
  check_params(params, "gdm_solve");

  const Eigen::Index n = h.cols();
  PhaseVector phi = PhaseVector::Zero(n);
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(n);
  Eigen::VectorXcd residual = params.alpha * s - h * x;
  double objective = residual.squaredNorm();

  SolveResult out;
  if (params.record_trace) {
    out.objective_trace.push_back(objective);
    out.max_constraint_violation = cec_violation(x);
  }

  double mu = params.mu0;
  bool converged = false;
  while (out.iterations < params.max_iterations) {
    const Eigen::VectorXd gradient =
        -2.0 * (x.conjugate().cwiseProduct((h.adjoint() * residual).eval())).imag();
    const PhaseVector phi_next = phi - mu * gradient;
    const Eigen::VectorXcd x_next = unit_phasor(phi_next);
    const Eigen::VectorXcd residual_next = params.alpha * s - h * x_next;
    const double objective_next = residual_next.squaredNorm();
    // RMS phase step per antenna; err always measures the attempted step,
    // even if it gets reverted below
    const double err = (phi_next - phi).norm() / std::sqrt(static_cast<double>(n));
    ++out.iterations;
    if (objective_next > objective) {
      mu *= 0.5;
      ++out.halvings;
    } else {
      phi = phi_next;
      x = x_next;
      residual = residual_next;
      objective = objective_next;
      if (params.record_trace) {
        out.objective_trace.push_back(objective);
        out.max_constraint_violation = std::max(out.max_constraint_violation, cec_violation(x));
      }
    }
    if (err <= params.epsilon) {
      converged = true;
      break;
    }
    if (mu < kMuFloor) break;
  }

  out.capped = !converged && out.iterations >= params.max_iterations;
  out.x = std::move(x);
  out.phases = std::move(phi);
  out.final_objective = objective;
  return out;
}

// The gradient step accumulates on a pre-quantizer phase vector; the DAC
// quantizer sits between that accumulator and everything observable, so the
// objective test, err, every exposed iterate and the output are 2^B-PSK
// phase vectors. A step is successful when it does not worsen the quantized
// objective; on success the accumulator advances and mu resets to mu0, on
// failure mu halves and both are reverted. err is the distance between
// consecutive quantized phase vectors, so a step absorbed by the quantizer
// gives err = 0 and terminates.
SolveResult qgdm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params) {
  if (params.constraint != Constraint::kCec)
    throw std::invalid_argument("qgdm_solve: requires the CEC constraint");
  if (!params.order.is_finite())
    throw std::invalid_argument("qgdm_solve: requires a finite PSK order");
  if (params.alpha <= 0.0) throw std::invalid_argument("qgdm_solve: alpha must be positive");
  check_dims(s, h, "qgdm_solve");
  check_params(params, "qgdm_solve");

  const Eigen::Index n = h.cols();
  PhaseVector accum = PhaseVector::Zero(n);  // pre-quantizer descent state
  PhaseVector phi(n);                        // quantized view of accum
  for (Eigen::Index i = 0; i < n; ++i) phi[i] = quantize_phase(accum[i], params.order);
  Eigen::VectorXcd x = unit_phasor(phi);
  double objective = (params.alpha * s - h * x).squaredNorm();

  SolveResult out;
  if (params.record_trace) {
    out.objective_trace.push_back(objective);
    out.max_constraint_violation = cec_violation(x);
  }

  double mu = params.mu0;
  bool converged = false;
  bool gradient_stale = true;
  Eigen::VectorXd gradient(n);
  while (out.iterations < params.max_iterations) {
    if (gradient_stale) {
      const Eigen::VectorXcd x_accum = unit_phasor(accum);
      const Eigen::VectorXcd residual = params.alpha * s - h * x_accum;
      gradient = -2.0 * (x_accum.conjugate().cwiseProduct((h.adjoint() * residual).eval())).imag();
      gradient_stale = false;
    }
    const PhaseVector accum_next = accum - mu * gradient;
    PhaseVector phi_next(n);
    for (Eigen::Index i = 0; i < n; ++i)
      phi_next[i] = quantize_phase(accum_next[i], params.order);
    const Eigen::VectorXcd x_next = unit_phasor(phi_next);
    const double objective_next = (params.alpha * s - h * x_next).squaredNorm();
    const double err = (phi_next - phi).norm();
    ++out.iterations;
    if (objective_next > objective) {
      mu *= 0.5;
      ++out.halvings;
    } else {
      accum = accum_next;
      phi = phi_next;
      x = x_next;
      objective = objective_next;
      mu = params.mu0;  // restart the halving schedule after a success
      gradient_stale = true;
      if (params.record_trace) {
        out.objective_trace.push_back(objective);
        out.max_constraint_violation = std::max(out.max_constraint_violation, cec_violation(x));
      }
    }
    if (err <= params.epsilon) {
      converged = true;
      break;
    }
    if (mu < kMuFloor) break;
  }

  out.capped = !converged && out.iterations >= params.max_iterations;
  out.x = std::move(x);
  out.phases = std::move(phi);
  out.final_objective = objective;
  return out;
}

SolveResult gpm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params) {
  if (params.constraint != Constraint::kRpc)
    throw std::invalid_argument("gpm_solve: requires the RPC constraint");
  if (params.alpha <= 0.0) throw std::invalid_argument("gpm_solve: alpha must be positive");
  check_dims(s, h, "gpm_solve");
  check_params(params, "gpm_solve");

  const Eigen::Index n = h.cols();
  Eigen::VectorXcd x =
      Eigen::VectorXcd::Constant(n, project_polygon(Complex(1.0, 0.0), params.order));
  Eigen::VectorXcd residual = params.alpha * s - h * x;
  double objective = residual.squaredNorm();

  SolveResult out;
  if (params.record_trace) {
    out.objective_trace.push_back(objective);
    out.max_constraint_violation = rpc_violation(x, params.order);
  }

  double mu = params.mu0;
  bool converged = false;
  while (out.iterations < params.max_iterations) {
    // -(df/dx)* = H^H (alpha*s - H*x)
    const Eigen::VectorXcd ascent = h.adjoint() * residual;
    Eigen::VectorXcd x_next(n);
    for (Eigen::Index i = 0; i < n; ++i)
      x_next[i] = project_polygon(x[i] + mu * ascent[i], params.order);
    const Eigen::VectorXcd residual_next = params.alpha * s - h * x_next;
    const double objective_next = residual_next.squaredNorm();
    const double err = (x_next - x).norm();
    ++out.iterations;
    if (objective_next > objective) {
      mu *= 0.5;
      ++out.halvings;
    } else {
      x = std::move(x_next);
      residual = residual_next;
      objective = objective_next;
      if (params.record_trace) {
        out.objective_trace.push_back(objective);
        out.max_constraint_violation =
            std::max(out.max_constraint_violation, rpc_violation(x, params.order));
      }
    }
    if (err <= params.epsilon) {
      converged = true;
      break;
    }
    if (mu < kMuFloor) break;
  }

  out.capped = !converged && out.iterations >= params.max_iterations;

  // relaxed solution -> transmit vector: force CE, then snap to the PSK grid
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex z = normalize_to_ce(x[i]);
    if (params.order.is_finite()) z = std::polar(1.0, quantize_phase(std::arg(z), params.order));
    x[i] = z;
  }
  out.final_objective = (params.alpha * s - h * x).squaredNorm();
  out.x = std::move(x);
  return out;
}

SolveResult ml_ce_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params) {
  // same descent, baseline scaling convention supplied by the caller in params.alpha
  return gdm_solve(s, h, params);
}

WfPrecoder wf_precoder(const ChannelMatrix& h, double e_tx, int users) {
  if (e_tx <= 0.0) throw std::invalid_argument("wf_precoder: e_tx must be positive");
  if (users != h.rows()) throw std::invalid_argument("wf_precoder: user count does not match channel");
  Eigen::MatrixXcd gram = h.adjoint() * h;
  gram.diagonal().array() += static_cast<double>(users) / e_tx;
  // G = (H^H H + (M/E_tx) I)^{-1} H^H; the trace in f_wf equals ||G||_F^2
  const Eigen::MatrixXcd g = gram.ldlt().solve(h.adjoint().eval());
  WfPrecoder out;
  out.f_wf = std::sqrt(g.squaredNorm() / e_tx);  // sigma_s^2 = 1
  out.matrix = g / out.f_wf;
  return out;
}

TransmitVector wf_ce_transmit(const WfPrecoder& p, const SymbolVector& s, PskOrder order) {
  TransmitVector x = p.matrix * s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Complex z = normalize_to_ce(x[i]);
    if (order.is_finite()) z = std::polar(1.0, quantize_phase(std::arg(z), order));
    x[i] = z;
  }
  return x;
}

std::uint32_t PrecoderLut::representative(std::uint32_t symbol_index, int users, int* turns) {
  const int first = symbol_digit(symbol_index, users, 0);
  const int pos = qpsk_digit_turns(first);  // symbol_index = rot^pos(representative)
  if (turns) *turns = pos;
  return rotate_symbol_index(symbol_index, users, (4 - pos) & 3);
}

PrecoderLut build_lut(const ChannelMatrix& h, const SolverParams& params, Algorithm algorithm) {
  const int users = static_cast<int>(h.rows());
  if (users < 1 || users > 8)
    throw std::invalid_argument("build_lut: users must be in [1, 8]");

  SolverParams local = params;
  local.constraint = algorithm == Algorithm::kGpm ? Constraint::kRpc : Constraint::kCec;

  const std::uint32_t total = symbol_count(users);
  const std::uint32_t reps = total / 4;

  PrecoderLut lut;
  lut.users = users;
  lut.order = params.order;
  lut.entries.resize(total);
  lut.rep_stats.resize(reps);

  static const Complex kQuarterTurn[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

  // representatives are exactly the indices with first digit 0
  for (std::uint32_t rep = 0; rep < reps; ++rep) {
    const SymbolVector s = symbols_from_index(rep, users);
    SolveResult res;
    switch (algorithm) {
      case Algorithm::kQgdm:
        res = qgdm_solve(s, h, local);
        break;
      case Algorithm::kGpm:
        res = gpm_solve(s, h, local);
        break;
      default:
        res = gdm_solve(s, h, local);
        break;
    }

    TransmitVector x = std::move(res.x);
    if (algorithm != Algorithm::kQgdm && algorithm != Algorithm::kGpm &&
        params.order.is_finite()) {
      // the DAC block of the chain; QGDM/GPM outputs are already on the grid
      for (Eigen::Index i = 0; i < x.size(); ++i)
        x[i] = std::polar(1.0, quantize_phase(res.phases[i], params.order));
    }

    for (int k = 1; k < 4; ++k)
      lut.entries[rotate_symbol_index(rep, users, k)] = kQuarterTurn[k] * x;
    lut.entries[rep] = std::move(x);

    lut.rep_stats[rep] = {res.iterations, res.halvings, res.capped};
    ++lut.totals.solves;
    lut.totals.iterations += res.iterations;
    lut.totals.halvings += res.halvings;
    lut.totals.capped += res.capped ? 1 : 0;
  }
  return lut;
}

}  // namespace cepre
