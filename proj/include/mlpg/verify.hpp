#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlpg/assembly.hpp"
#include "mlpg/fields.hpp"
#include "mlpg/solvers.hpp"

namespace mlpg {

/// Exact solution and data of a model problem. For the non-flat variant every
/// field lives on the reference column ]0,1[^d x ]0,L[; `source` already
/// carries the Jacobian of the vertical stretching.
struct ManufacturedProblem {
  int test_id = 0;
  std::string name;
  Variant variant = Variant::dirichlet_flat;
  double height = 1.0;
  double epsilon = 0.0;  // surface amplitude, non-flat only
  SpaceField exact;
  SpaceField source;
  ScalarField flux;  // top flux, Neumann only
  Surface surface;   // non-flat only
  EtaCheck eta_check = EtaCheck::strict;
};

/// Model problems 1 (flat Dirichlet), 2 (non-flat surface, amplitude
/// `epsilon`) and 3 (top Neumann).
ManufacturedProblem manufactured(int test_id, double epsilon = 0.15);

/// Top-Neumann problem v = sin(pi z / 3) S(x, y) with a non-zero flux
/// g = (pi/6) S, S = sin(pi x) [sin(pi y)]. `dim` selects the horizontal
/// dimension.
ManufacturedProblem manufactured_neumann_flux(int dim);

/// Physical (un-mapped) solution of the non-flat problem and its source
/// -Laplace(u); exposed for testing the pullback.
double nonflat_physical_solution(double x, double y, double z, double epsilon);
double nonflat_physical_source(double x, double y, double z, double epsilon);

/// Assemble the system of `problem` on `disc`.
BlockTridiagonalSystem assemble_problem(const ManufacturedProblem& problem,
                                        const Discretization& disc,
                                        const AssemblyOptions& options = {});

/// Reference field the discrete unknown is compared with: Pi_h v, shifted on
/// the top layer by the layer mean of the lifting in the Neumann case.
MultilayerField reference_field(const ManufacturedProblem& problem, const Discretization& disc);

/// ||v - v_h||_{0,Omega} by tensor quadrature; v_h includes the lifting.
double quadrature_L2_error(const ManufacturedProblem& problem, const Discretization& disc,
                           const MultilayerField& vh);
double quadrature_L2_norm(const SpaceField& v, const Discretization& disc);

/// Discrete H^1 norm matching the variant: ||.||_{X_h}, or the boundary-layer
/// version for Neumann.
double discrete_H1(const MultilayerField& v, const Discretization& disc, Variant variant);

/// Relative errors of the multilayer solution measured layer by layer against
/// the exact solution sampled at the layer midpoints,
///   e^a(x) = v(x, z_a) - (v_h + g_h)(x, z_a),
/// with the L^2_h norm and the X_h-type norm (boundary-layer version for
/// Neumann) evaluated by horizontal quadrature instead of on P1 coefficients.
struct SampledErrors {
  double rel_L2h = 0.0;
  double rel_H1h = 0.0;
};
SampledErrors sampled_errors(const ManufacturedProblem& problem, const Discretization& disc,
                             const MultilayerField& vh);

/// Which error pair feeds the study columns and orders.
enum class ErrorMetric {
  sampled,      // midpoint samples of v, continuous in x
  interpolant,  // coefficients of Pi_h v
};

struct Resolution {
  int layers = 0;
  int cells_per_side = 0;
};

struct StudyOptions {
  std::vector<Resolution> resolutions;
  int dim = 2;
  SolverKind solver = SolverKind::gmres_jacobi;
  SolverOptions solver_options;
  AssemblyOptions assembly;
  ErrorMetric metric = ErrorMetric::sampled;
};

struct StudyRow {
  int layers = 0;
  int cells_per_side = 0;
  double err_L2h = 0.0;  // relative, in the selected metric
  double err_H1h = 0.0;
  double sampled_L2h = 0.0;  // relative, midpoint samples of v
  double sampled_H1h = 0.0;
  double interp_L2h = 0.0;  // relative, against the reference field
  double interp_H1h = 0.0;
  double err_L2_quad = 0.0;  // relative, against the exact solution
  std::optional<double> ord_L2;
  std::optional<double> ord_H1;
  int outer_iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
};

struct ConvergenceReport {
  Variant variant = Variant::dirichlet_flat;
  int test_id = 0;
  std::vector<StudyRow> rows;
  std::vector<std::string> warnings;

  bool all_converged() const;
  /// Columns of the fixed study schema; orders sit on the finer row of each
  /// pair and are empty on the first row.
  std::string csv(bool with_timings = true) const;
};

/// log2(coarse / fine)
double convergence_order(double coarse, double fine);

ConvergenceReport run_convergence_study(const ManufacturedProblem& problem,
                                        const StudyOptions& options);

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v, double slack) const { return v >= min - slack && v <= max + slack; }
};

struct StabilityOptions {
  int layers = 8;
  int cells_per_side = 8;
  int dim = 2;
  int samples = 1000;
  std::uint64_t seed = 20240611;
  /// Instance used for the exact inf-sup constant (needs N * ndof <= 100).
  int infsup_layers = 4;
  int infsup_cells_per_side = 4;
  double slack = 1e-10;
};

struct StabilityReport {
  Variant variant = Variant::dirichlet_flat;
  int samples = 0;
  std::uint64_t seed = 0;
  // Observed extremes over the samples.
  Range equivalence;   // ||v|| / ||grad T v||
  Range coercivity;    // a(v, T v) / ||v||^2
  Range continuity;    // a(v, phi) / (||v|| ||grad phi||)
  std::optional<double> inf_sup;
  // Bounds the theory gives.
  Range equivalence_bound;
  double coercivity_bound = 0.0;
  double continuity_bound = 0.0;
  double inf_sup_bound = 0.0;
  // Number of samples outside the bounds (with slack).
  int equivalence_violations = 0;
  int coercivity_violations = 0;
  int continuity_violations = 0;

  bool passed(double infsup_slack = 1e-8) const;
  std::string text() const;
};

/// Random-field probes of norm equivalence, coercivity and continuity, plus
/// the exact discrete inf-sup constant on a small instance. Bounds the theory
/// does not state for a variant are NaN and never count as violations.
StabilityReport probe_stability(Variant variant, const StabilityOptions& options = {});

/// Exact discrete inf-sup constant sigma_min(L_Y^{-1} B L_X^{-T}) with B the
/// form matrix and L the Cholesky factors of the two Gram matrices.
double exact_inf_sup(const Discretization& disc, Variant variant, const Surface& surface = {});

}  // namespace mlpg
