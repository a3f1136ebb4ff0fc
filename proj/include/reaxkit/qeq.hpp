#pragma once

// Charge equilibration.  Minimising
//   E(q) = Σ χ_i q_i + ½ Σ η_i q_i² + Σ_{i<j} H_ij q_i q_j   subject to Σ q = Q
// gives q = s - μ t with H s = -χ, H t = -1 and μ = (Σs - Q) / Σt.  Both
// systems share the matrix and are solved together by a Jacobi-preconditioned
// conjugate-gradient loop that performs one matrix traversal per iteration.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "reaxkit/core.hpp"
#include "reaxkit/neighbor.hpp"
#include "reaxkit/parallel.hpp"

namespace reaxkit {

/// Symmetric matrix with only the strict upper triangle stored (CSR) and the
/// diagonal kept separately.
struct SparseHalfMatrix {
  std::size_t n = 0;
  std::vector<double> diag;
  std::vector<std::size_t> offsets;  // n + 1
  std::vector<std::uint32_t> cols;   // each > its row
  std::vector<double> values;

  std::size_t nonzeros_stored() const { return values.size(); }
};

/// H_ii = η_i, H_ij = C·T(r)·(r³ + γ_ij⁻³)^(-1/3) for pairs of the half list
/// inside the cutoff.  Rows are sized by a counting pass and a prefix sum.
SparseHalfMatrix build_qeq_matrix(const HalfNeighborList& nbrs, std::span<const int> types, const ForceField& ff,
                                  const ExecContext& ctx);

/// y = H x.  Every stored (i,j) feeds both y_i and y_j; each thread writes a
/// private partial vector and the partials are summed in thread order.
void spmv_half(const SparseHalfMatrix& h, std::span<const double> x, std::span<double> y, const ExecContext& ctx);
std::vector<double> spmv_half(const SparseHalfMatrix& h, std::span<const double> x, const ExecContext& ctx);

/// y1 = H x1 and y2 = H x2 in one traversal of H.
void spmv_half_dual(const SparseHalfMatrix& h, std::span<const double> x1, std::span<const double> x2,
                    std::span<double> y1, std::span<double> y2, const ExecContext& ctx);

/// Dot product with a fixed partition and ascending-thread combination.
double parallel_dot(std::span<const double> a, std::span<const double> b, const ExecContext& ctx);

enum class ExtrapolationOrder { kLinear, kQuadratic };

/// Current solution plus the solutions of previous steps (most recent first).
struct QEqState {
  std::vector<double> s;
  std::vector<double> t;
  std::deque<std::vector<double>> s_history;
  std::deque<std::vector<double>> t_history;
  int iterations_s = 0;
  int iterations_t = 0;
  double residual_s = 0.0;
  double residual_t = 0.0;
  /// sqrt(rᵀ M⁻¹ r) after each iteration, per system.
  std::vector<double> precond_residual_s;
  std::vector<double> precond_residual_t;

  /// Moves s, t into the history (keeps three steps).
  void push_history();
  void clear_history();
};

struct QEqGuess {
  std::vector<double> s;
  std::vector<double> t;
};

/// Initial guesses from the history: 2x₋₁ - x₋₂ with two steps, x₋₁ with
/// one, the diagonal solve -χ/η and -1/η with none.  Quadratic order uses
/// 3x₋₁ - 3x₋₂ + x₋₃ when three steps are available.
QEqGuess extrapolate_guess(const QEqState& state, std::span<const double> chi, std::span<const double> eta,
                           ExtrapolationOrder order = ExtrapolationOrder::kLinear);

/// Solves H s = -χ and H t = -1 in one interleaved loop.  Convergence is the
/// relative residual ‖b - Hx‖ / ‖b‖ <= tol for each system independently.
/// Throws ConvergenceError carrying both residuals after max_iter.
QEqState cg_dual(const SparseHalfMatrix& h, std::span<const double> chi, double tol, int max_iter,
                 const QEqGuess& guess, const ExecContext& ctx);

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double residual = 0.0;
};

/// Plain Jacobi-preconditioned CG for one right-hand side.
CgResult cg_solve(const SparseHalfMatrix& h, std::span<const double> b, std::span<const double> x0, double tol,
                  int max_iter, const ExecContext& ctx);

/// q_i = s_i - μ t_i with μ = (Σs - Q_net) / Σt.
std::vector<double> charges_from_st(std::span<const double> s, std::span<const double> t, double net_charge);

}  // namespace reaxkit
