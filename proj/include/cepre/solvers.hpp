#ifndef CEPRE_SOLVERS_HPP
#define CEPRE_SOLVERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cepre/constellation.hpp"
#include "cepre/model.hpp"

// Symbol-wise MSE solvers (gradient descent on phases, its quantized variant,
// and gradient projection on the relaxed polygon set), the scaling factor
// alpha, the Wiener-filter baselines, and look-up-table construction with
// quarter-rotation reuse.

namespace cepre {

enum class Constraint { kCec, kRpc };
enum class Algorithm { kGdm, kQgdm, kGpm, kMlCe };

struct SolverParams {
  double mu0 = 0.25;
  double epsilon = 1e-2;
  double alpha = 1.0;
  PskOrder order = PskOrder::unquantized();
  int max_iterations = 500;
  Constraint constraint = Constraint::kCec;
  bool record_trace = false;  // keep accepted objectives + constraint diagnostics

  bool operator==(const SolverParams&) const = default;
};

// step sizes that gave the best performance per algorithm
inline double default_mu0(Algorithm alg) {
  switch (alg) {
    case Algorithm::kQgdm:
      return 0.5;
    case Algorithm::kGpm:
      return 1.0;
    default:
      return 0.25;
  }
}

struct SolveResult {
  TransmitVector x;            // satisfies the active constraint set
  PhaseVector phases;          // terminal phase iterate (CEC solvers only)
  int iterations = 0;
  int halvings = 0;
  double final_objective = 0.0;
  bool capped = false;         // hit the iteration cap; x is the best accepted iterate
  double max_constraint_violation = 0.0;            // over accepted iterates when traced
  std::vector<double> objective_trace;              // accepted objectives when traced
};

// alpha = sqrt(N(N-M)/M), the expected zero-forcing gain under the CE power
// budget; requires N > M so the inverse Wishart moment exists
double compute_alpha(int antennas, int users);

SolveResult gdm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params);
SolveResult qgdm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params);
SolveResult gpm_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params);

// The continuous-CE baseline run without our alpha convention: identical to
// gdm_solve, with whatever alpha the caller put into params.
SolveResult ml_ce_solve(const SymbolVector& s, const ChannelMatrix& h, const SolverParams& params);

// Wiener-filter (MMSE) linear baseline. P_wf carries the transmit power
// budget, so x = P_wf * s is transmitted without the sqrt(E_tx/N) chain gain;
// the receiver scales by f_wf before the decision.
struct WfPrecoder {
  Eigen::MatrixXcd matrix;  // antennas x users
  double f_wf = 0.0;
};

WfPrecoder wf_precoder(const ChannelMatrix& h, double e_tx, int users);

// entrywise CE forcing (and phase quantization when order is finite) of P_wf*s
TransmitVector wf_ce_transmit(const WfPrecoder& p, const SymbolVector& s, PskOrder order);

struct SolveStat {
  int iterations = 0;
  int halvings = 0;
  bool capped = false;
};

struct LutTotals {
  std::int64_t solves = 0;
  std::int64_t iterations = 0;
  std::int64_t halvings = 0;
  std::int64_t capped = 0;
};

// Table of optimized transmit vectors for all 4^M symbol vectors. Only the
// 4^{M-1} vectors whose first symbol is (1+j)/sqrt(2) are solved; the other
// orbits are filled as e^{j*k*pi/2} rotations, which is exact because the
// quarter-turn factors are +-1 and +-j.
struct PrecoderLut {
  int users = 0;
  PskOrder order = PskOrder::unquantized();
  std::vector<TransmitVector> entries;   // indexed by symbol index, size 4^M
  std::vector<SolveStat> rep_stats;      // per representative, size 4^{M-1}
  LutTotals totals;

  const TransmitVector& entry(std::uint32_t symbol_index) const { return entries[symbol_index]; }

  // representative index and the quarter-turn count that rebuilds this entry
  static std::uint32_t representative(std::uint32_t symbol_index, int users, int* turns = nullptr);

  bool capped(std::uint32_t symbol_index) const {
    return rep_stats[representative(symbol_index, users)].capped;
  }
};

PrecoderLut build_lut(const ChannelMatrix& h, const SolverParams& params, Algorithm algorithm);

}  // namespace cepre

#endif  // CEPRE_SOLVERS_HPP
