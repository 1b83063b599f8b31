#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mlpg/assembly.hpp"
#include "mlpg/fields.hpp"

namespace mlpg {

struct SolverOptions {
  double tol = 1e-10;
  int max_outer = 20000;
  int restart = 50;
  int workers = 1;
  /// Called after every Jacobi sweep with the new iterate (testing hook).
  std::function<void(int, const Vector&)> on_sweep;
};

struct SolveStats {
  std::string method;
  bool converged = false;
  int outer_iterations = 0;
  std::vector<long> inner_solves;  // diagonal-block solves per layer
  double relative_residual = 0.0;  // ||b - A x||_2 / ||b||_2 of the full system
  double assembly_seconds = 0.0;
  double factorization_seconds = 0.0;
  double sweep_seconds = 0.0;
  std::vector<double> residual_history;
};

struct SolveResult {
  MultilayerField solution;
  SolveStats stats;
};

/// Fixed team of threads that runs `fn(task)` for task = 0..tasks-1 and
/// returns once all are done. Tasks are assigned round-robin; a task's
/// result never depends on which thread ran it.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const;
  void run(int tasks, const std::function<void(int)>& fn);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Factorized diagonal blocks: Cholesky where the block is symmetric, LU
/// otherwise. Factorized once and reused across sweeps.
class LayerFactorization {
 public:
  explicit LayerFactorization(const BlockTridiagonalSystem& system);
  ~LayerFactorization();
  LayerFactorization(LayerFactorization&&) noexcept;
  LayerFactorization& operator=(LayerFactorization&&) noexcept;

  /// diag[layer]^{-1} rhs, 0-based layer.
  Vector solve(int layer, const Vector& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// v^{a,k+1} = diag[a]^{-1} (rhs[a] - lower[a] v^{a-1,k} - upper[a] v^{a+1,k}).
SolveResult solve_block_jacobi(const BlockTridiagonalSystem& system, const SolverOptions& options,
                               const MultilayerField* initial = nullptr);

/// Restarted GMRES (modified Gram-Schmidt), right-preconditioned by the
/// block-diagonal layer solves.
SolveResult solve_gmres_jacobi(const BlockTridiagonalSystem& system, const SolverOptions& options,
                               const MultilayerField* initial = nullptr);

/// Sparse LU of the concatenated matrix. Refuses systems above
/// `max_nonzeros` stored entries.
SolveResult solve_monolithic(const BlockTridiagonalSystem& system,
                             std::size_t max_nonzeros = 5'000'000);

enum class SolverKind { jacobi, gmres_jacobi, monolithic };

const char* to_string(SolverKind kind) noexcept;
std::optional<SolverKind> parse_solver_kind(const std::string& name);

/// Dispatch on `kind`; the monolithic path ignores the iteration options.
SolveResult solve(const BlockTridiagonalSystem& system, SolverKind kind,
                  const SolverOptions& options);

double relative_residual(const BlockTridiagonalSystem& system, const Vector& x);

std::string stats_csv_header();
std::string stats_csv_row(const SolveStats& stats);
std::string stats_json(const SolveStats& stats);

}  // namespace mlpg
