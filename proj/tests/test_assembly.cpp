#include <gtest/gtest.h>

#include <cmath>

#include "mlpg/assembly.hpp"
#include "mlpg/error.hpp"
#include "mlpg/fields.hpp"
#include "mlpg/solvers.hpp"
#include "mlpg/verify.hpp"
#include "oracle.hpp"

using namespace mlpg;

namespace {

constexpr double pi = 3.14159265358979323846;

SpaceField zero_source() {
  return [](double, double, double) { return 0.0; };
}

Surface wavy_surface(double eps) {
  Surface s;
  s.eta = [eps](const HorizontalPoint& p) { return 1.0 + eps * std::sin(2 * pi * (p.x + p.y)); };
  s.grad_eta = [eps](const HorizontalPoint& p) {
    const double g = 2 * pi * eps * std::cos(2 * pi * (p.x + p.y));
    return std::array<double, 2>{g, g};
  };
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST(FlatAssembly, BlocksAreWeightedHorizontalMatrices) {
  const auto sm = build_structured_mesh(2, 5);
  const LayerGrid g = build_layer_grid(1.0, 4);
  const auto sys = assemble_dirichlet_flat(sm.mesh, sm.dofs, g, zero_source());
  const auto A = oracle::dense(assemble_weighted_stiffness(sm.mesh, sm.dofs, constant_field(1)));
  const auto M = oracle::dense(assemble_weighted_mass(sm.mesh, sm.dofs, constant_field(1)));
  const double h = g.thickness;
  const double S[4] = {5 * h / 8, 3 * h / 4, 3 * h / 4, 5 * h / 8};
  const double D[4] = {3 / h, 2 / h, 2 / h, 3 / h};
  for (int a = 0; a < 4; ++a) {
    EXPECT_LT((oracle::dense(sys.diag[a]) - (S[a] * A + D[a] * M)).cwiseAbs().maxCoeff(), 1e-13);
    if (a > 0) {
      EXPECT_LT((oracle::dense(sys.lower[a]) - (h / 8 * A - M / h)).cwiseAbs().maxCoeff(), 1e-13);
    }
    if (a < 3) {
      EXPECT_LT((oracle::dense(sys.upper[a]) - oracle::dense(sys.lower[a + 1]).transpose()).cwiseAbs().maxCoeff(),
                1e-14);
    }
  }
  EXPECT_EQ(sys.lower[0].rows(), 0);
  EXPECT_EQ(sys.upper[3].rows(), 0);
}

TEST(FlatAssembly, ZeroSourceGivesZeroRhs) {
  const auto sm = build_structured_mesh(2, 4);
  const auto sys = assemble_dirichlet_flat(sm.mesh, sm.dofs, build_layer_grid(1.0, 3), zero_source());
  for (const auto& r : sys.rhs) EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FlatAssembly, SmallOneDimensionalMatchesOracle) {
  const auto sm = build_structured_mesh(1, 3);
  const auto sys = assemble_dirichlet_flat(sm.mesh, sm.dofs, build_layer_grid(1.0, 2), zero_source());
  const auto G = oracle::dense(sys.global_matrix());
  ASSERT_EQ(G.rows(), 4);
  const auto ref = oracle::bilinear_matrix(sm.mesh, sm.dofs, 1.0, 2, oracle::Form::flat);
  EXPECT_LT(oracle::relative_gap(G, ref), 1e-12);
}

TEST(FlatAssembly, MatchesOracleOnSeveralShapes) {
  struct Case {
    int dim, NH, N;
    double L;
  };
  for (const Case c : {Case{2, 4, 4, 1.0}, Case{2, 6, 8, 1.0}, Case{1, 20, 10, 2.5}, Case{2, 3, 20, 0.7}}) {
    const auto sm = build_structured_mesh(c.dim, c.NH);
    const auto sys = assemble_dirichlet_flat(sm.mesh, sm.dofs, build_layer_grid(c.L, c.N), zero_source());
    const auto ref = oracle::bilinear_matrix(sm.mesh, sm.dofs, c.L, c.N, oracle::Form::flat);
    EXPECT_LT(oracle::relative_gap(oracle::dense(sys.global_matrix()), ref), 1e-12)
        << c.dim << " " << c.NH << " " << c.N;
  }
}

TEST(FlatAssembly, RhsMatchesTensorQuadrature) {
  const int NH = 6, N = 4;
  const auto sm = build_structured_mesh(1, NH);
  auto f = [](double x, double, double z) { return std::exp(x) * (1 + z * z * z); };
  const auto sys = assemble_dirichlet_flat(sm.mesh, sm.dofs, build_layer_grid(1.0, N), f);
  const auto hat = oracle::hats(1.0, N, false);
  using G = boost::math::quadrature::gauss<double, 15>;
  const double k = 1.0 / NH;
  for (int a = 1; a <= N; ++a) {
    for (std::size_t i = 0; i < sm.dofs.ndof(); ++i) {
      const double xi = (i + 1) * k;
      auto horizontal = [&](double z) {
        return G::integrate([&](double x) { return f(x, 0, z) * (1 - (xi - x) / k); }, xi - k, xi) +
               G::integrate([&](double x) { return f(x, 0, z) * (1 - (x - xi) / k); }, xi, xi + k);
      };
      double ref = 0.0;
      for (int cz = 0; cz <= N; ++cz)
        ref += G::integrate([&](double z) { return hat.value(a, z) * horizontal(z); }, hat.knots[cz],
                            hat.knots[cz + 1]);
      EXPECT_NEAR(sys.rhs[a - 1][i], ref, 1e-6 * std::abs(ref)) << a << " " << i;
    }
  }
}

TEST(FlatAssembly, LayerAveragedAgreesForConstantSource) {
  const auto sm = build_structured_mesh(2, 4);
  const LayerGrid g = build_layer_grid(1.0, 5);
  auto f = [](double, double, double) { return 3.0; };
  AssemblyOptions avg;
  avg.rhs = RhsMode::layer_averaged;
  const auto a = assemble_dirichlet_flat(sm.mesh, sm.dofs, g, f);
  const auto b = assemble_dirichlet_flat(sm.mesh, sm.dofs, g, f, avg);
  for (int k = 0; k < 5; ++k) EXPECT_LT((a.rhs[k] - b.rhs[k]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NonflatAssembly, UnitSurfaceReproducesFlat) {
  const auto sm = build_structured_mesh(2, 6);
  const LayerGrid g = build_layer_grid(1.0, 5);
  Surface one{constant_field(1.0), constant_vector_field(0, 0)};
  auto f = [](double x, double y, double z) { return x + y * z; };
  const auto flat = assemble_dirichlet_flat(sm.mesh, sm.dofs, g, f);
  const auto nf = assemble_nonflat(sm.mesh, sm.dofs, g, one, f);
  EXPECT_LT((oracle::dense(flat.global_matrix()) - oracle::dense(nf.global_matrix())).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((flat.global_rhs() - nf.global_rhs()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(NonflatAssembly, ConstantSurfaceScalesBlocks) {
  const auto sm = build_structured_mesh(2, 4);
  const LayerGrid g = build_layer_grid(1.0, 4);
  const double c = 1.6;
  Surface s{constant_field(c), constant_vector_field(0, 0)};
  const auto nf = assemble_nonflat(sm.mesh, sm.dofs, g, s, zero_source());
  const auto A = oracle::dense(assemble_weighted_stiffness(sm.mesh, sm.dofs, constant_field(1)));
  const auto M = oracle::dense(assemble_weighted_mass(sm.mesh, sm.dofs, constant_field(1)));
  const double h = g.thickness;
  EXPECT_LT((oracle::dense(nf.diag[0]) - (c * 5 * h / 8 * A + 3 / h / c * M)).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_LT((oracle::dense(nf.diag[1]) - (c * 3 * h / 4 * A + 2 / h / c * M)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(NonflatAssembly, MatchesOracle) {
  for (double eps : {0.05, 0.10}) {
    const auto sm = build_structured_mesh(2, 5);
    const int N = 6;
    const auto sys = assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, N), wavy_surface(eps), zero_source());
    const auto ref = oracle::bilinear_matrix(sm.mesh, sm.dofs, 1.0, N, oracle::Form::nonflat, wavy_surface(eps));
    EXPECT_LT(oracle::relative_gap(oracle::dense(sys.global_matrix()), ref), 1e-12);
  }
}

TEST(NonflatAssembly, SurfaceWithUnitSlopeRejected) {
  const auto sm = build_structured_mesh(1, 8);
  Surface s{[](const HorizontalPoint& p) { return 1.0 + p.x; }, constant_vector_field(1, 0)};
  EXPECT_EQ(code_of([&] { assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, 3), s, zero_source()); }),
            ErrorCode::eta_condition_violated);
  Surface neg{constant_field(-0.5), constant_vector_field(0, 0)};
  EXPECT_EQ(code_of([&] { assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, 3), neg, zero_source()); }),
            ErrorCode::eta_condition_violated);
}

TEST(NonflatAssembly, SteepSurfaceWarnsWhenAsked) {
  const auto sm = build_structured_mesh(2, 8);
  const auto sample = sample_surface(sm.mesh, wavy_surface(0.15));
  EXPECT_NEAR(sample.grad_max, 0.15 * 2 * std::sqrt(2.0) * pi, 0.02);
  EXPECT_GT(sample.grad_max, 1.0);
  EXPECT_EQ(code_of([&] {
              assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, 4), wavy_surface(0.15), zero_source());
            }),
            ErrorCode::eta_condition_violated);
  AssemblyOptions warn;
  warn.eta_check = EtaCheck::warn;
  const auto sys = assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, 4), wavy_surface(0.15), zero_source(), warn);
  EXPECT_FALSE(sys.warnings.empty());
  // The gentler amplitude satisfies the condition outright.
  EXPECT_NO_THROW(
      assemble_nonflat(sm.mesh, sm.dofs, build_layer_grid(1.0, 4), wavy_surface(0.10), zero_source()));
}

TEST(NeumannAssembly, MatchesOracle) {
  struct Case {
    int dim, NH, N;
  };
  for (const Case c : {Case{2, 4, 3}, Case{2, 6, 8}, Case{1, 12, 16}}) {
    const auto sm = build_structured_mesh(c.dim, c.NH);
    const auto sys = assemble_neumann(sm.mesh, sm.dofs, build_layer_grid(1.0, c.N), zero_source(), constant_field(0));
    const auto ref = oracle::bilinear_matrix(sm.mesh, sm.dofs, 1.0, c.N, oracle::Form::neumann);
    EXPECT_LT(oracle::relative_gap(oracle::dense(sys.global_matrix()), ref), 1e-12);
  }
}

TEST(NeumannAssembly, ZeroFluxLeavesOnlySourceTerms) {
  const auto sm = build_structured_mesh(2, 5);
  const LayerGrid g = build_layer_grid(1.0, 4);
  auto f = [](double x, double y, double z) { return std::sin(pi * x) * y * (1 + z); };
  const auto sys = assemble_neumann(sm.mesh, sm.dofs, g, f, constant_field(0));
  const auto loads = assemble_layer_loads(sm.mesh, sm.dofs, VerticalBasis(g, Layout::neumann), f, RhsMode::tensorized);
  for (int a = 0; a < 4; ++a) EXPECT_LT((sys.rhs[a] - loads[a]).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(NeumannAssembly, RejectsTwoLayersAndBoundaryFlux) {
  const auto sm = build_structured_mesh(2, 4);
  EXPECT_EQ(code_of([&] {
              assemble_neumann(sm.mesh, sm.dofs, build_layer_grid(1.0, 2), zero_source(), constant_field(0));
            }),
            ErrorCode::unsupported_layer_count);
  EXPECT_EQ(code_of([&] {
              assemble_neumann(sm.mesh, sm.dofs, build_layer_grid(1.0, 4), zero_source(), constant_field(1));
            }),
            ErrorCode::g_not_zero_on_boundary);
}

TEST(NeumannAssembly, LiftingGivesConvergentSolutions) {
  // Non-zero flux exercises the lifting; a wrong correction would stall
  // the error at O(1).
  const auto problem = manufactured_neumann_flux(1);
  StudyOptions opts;
  opts.dim = 1;
  opts.resolutions = {{8, 8}, {16, 16}, {32, 32}};
  opts.solver = SolverKind::monolithic;
  const auto rep = run_convergence_study(problem, opts);
  ASSERT_EQ(rep.rows.size(), 3u);
  for (std::size_t r = 1; r < 3; ++r) {
    EXPECT_GT(*rep.rows[r].ord_L2, 1.8);
    EXPECT_GT(*rep.rows[r].ord_H1, 0.9);
    EXPECT_GT(convergence_order(rep.rows[r - 1].err_L2_quad, rep.rows[r].err_L2_quad), 0.9);
  }
  EXPECT_LT(rep.rows.back().err_L2h, 5e-3);
}

TEST(BlockSystem, ApplyMatchesGlobalMatrix) {
  const auto problem = manufactured(3);
  const Discretization disc = make_discretization(1.0, 5, 2, 4);
  const auto sys = assemble_problem(problem, disc);
  std::mt19937_64 rng(3);
  const auto v = random_field(5, disc.ndof(), Space::trial, rng);
  const Vector a = sys.apply(v.coefficients());
  const Vector b = sys.global_matrix() * v.coefficients();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
}
