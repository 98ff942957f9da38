// Solver-level checks: the stiffness matrix is the Gram matrix of the
// optimal test functions, solves satisfy the normal equations to rounding,
// the error lift is orthogonal to the solve test space, and the L2 errors
// against the known interval references behave.
#include "doctest.h"

#include "uwdpg/dpg.hpp"

#include <cmath>

using namespace uwdpg;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

MeshPtr canonical_interval(int n) {
  return build_interval_mesh(Vector2d(-1.0, 0.0), Vector2d(1.0, 0.0), n);
}

MeshPtr small_square(int per_edge) {
  const std::vector<Vector2d> corners = {Vector2d(0.0, 0.0), Vector2d(0.5, 0.0),
                                         Vector2d(0.5, 0.5), Vector2d(0.0, 0.5)};
  return build_polygon_mesh(corners, per_edge);
}

const ScalarField f_half = [](const Vector2d&, double) { return 0.5; };

// References for f = 1/2 on an interval of length 2, in arclength form.
const ScalarField phi_star = [](const Vector2d&, double s) {
  return std::sqrt(std::max(s * (2.0 - s), 0.0));
};
const ScalarField sigma_star = [](const Vector2d&, double s) { return -(s - 1.0) / 2.0; };

VectorXd sigma_hat_star(const Mesh& mesh) {
  VectorXd ref(mesh.node_count());
  for (int j = 0; j < mesh.node_count(); ++j)
    ref[j] = -(mesh.node_arclength(j) - 1.0) / 2.0;
  return ref;
}

std::vector<TestFunction> all_thetas(const DpgSolver& solver) {
  std::vector<TestFunction> thetas;
  const int N = solver.layout().dim();
  for (int m = 0; m < N; ++m) {
    VectorXd unit = VectorXd::Zero(N);
    unit[m] = 1.0;
    thetas.push_back(solver.map().theta(unit));
  }
  return thetas;
}

double max_orthogonality_defect(const DpgSolver& solver, const ErrorReport& report) {
  const double lift_norm = std::max(report.energy_total, 1e-30);
  double worst = 0.0;
  for (const TestFunction& theta : all_thetas(solver)) {
    const TestFunction embedded = embed_test_function(theta, solver.error_space());
    const double theta_norm = std::sqrt(v_inner(embedded, embedded));
    const double defect = std::abs(v_inner(report.lift, embedded)) / (lift_norm * theta_norm);
    worst = std::max(worst, defect);
  }
  return worst;
}

void check_gram(const DpgSolver& solver) {
  const MatrixXd& K = solver.matrix();
  const double scale = K.cwiseAbs().maxCoeff();
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(K);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);

  const std::vector<TestFunction> thetas = all_thetas(solver);
  double worst = 0.0;
  for (size_t m = 0; m < thetas.size(); ++m)
    for (size_t n = m; n < thetas.size(); ++n) {
      const double gram = v_inner(thetas[m], thetas[n]);
      worst = std::max(worst, std::abs(gram - K(int(m), int(n))));
    }
  CHECK(worst <= 1e-9 * std::max(1.0, scale));
}

} // namespace

TEST_CASE("stiffness matrix equals the Gram matrix of the optimal test functions") {
  check_gram(DpgSolver(make_space(canonical_interval(4), 1)));
  check_gram(DpgSolver(make_space(small_square(1), 0)));
  check_gram(DpgSolver(make_space(small_square(2), 1)));
}

TEST_CASE("zero load gives the zero solution and a zero error estimate") {
  DpgSolver solver(make_space(canonical_interval(4), 0));
  const ScalarField zero = [](const Vector2d&, double) { return 0.0; };
  const TrialFunction u = solver.solve(zero);
  CHECK(u.coeff.norm() == 0.0);
  const ErrorReport report = solver.energy_error(u, zero);
  CHECK(report.energy_total == 0.0);
  CHECK(report.indicators.maxCoeff() == 0.0);
}

TEST_CASE("l2 errors of the zero trial function freeze the reference norms") {
  // |phi*|^2 = int_{-1}^{1} (1 - x^2) dx = 4/3; |sigma*|^2 = int x^2/4 = 1/6;
  // trace values (1/2, 0, -1/2) on three nodes give (1/2)/3 = 1/6 as well.
  const MeshPtr mesh = canonical_interval(2);
  const TrialLayout layout(make_space(mesh, 0));
  const TrialFunction zero{layout, VectorXd::Zero(layout.dim())};
  const L2Errors errs = l2_errors(zero, phi_star, sigma_star, sigma_hat_star(*mesh));
  CHECK(errs.phi == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-10));
  CHECK(errs.sigma == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-12));
  CHECK(errs.nodes_scaled == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("interval solve: residual, lift identities and orthogonality") {
  const MeshPtr mesh = canonical_interval(4);
  DpgSolver solver(make_space(mesh, 0));

  // A polynomial load of degree <= 2 is projected exactly, so the residual
  // identities hold to rounding plus potential-quadrature error.
  const ScalarField loads[] = {
      f_half, [](const Vector2d&, double s) { return 0.25 * s * (2.0 - s); }};
  for (const ScalarField& f : loads) {
    const VectorXd F = solver.load(f);
    const TrialFunction u = solver.solve(f);
    const VectorXd residual = F - solver.matrix() * u.coeff;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, F.cwiseAbs().maxCoeff()));

    const ErrorReport report = solver.energy_error(u, f);
    const double total2 = report.energy_total * report.energy_total;
    CHECK(report.indicators.squaredNorm() == doctest::Approx(total2).epsilon(1e-12));
    CHECK(v_inner(report.lift, report.lift) == doctest::Approx(total2).epsilon(1e-11));

    CHECK(max_orthogonality_defect(solver, report) <= 1e-9);

    // Riesz property: |e|_V^2 equals the residual evaluated at the lift,
    // with b evaluated through the independent quadrature path.
    double load_at_lift = 0.0;
    for (int e = 0; e < mesh->element_count(); ++e) {
      const Element& T = mesh->element(e);
      const LocalQuad q = local_gauss(T.length, 12);
      for (int i = 0; i < q.s.size(); ++i)
        load_at_lift +=
            q.w[i] * f(T.point_at(q.s[i]), T.arclength0 + q.s[i]) * report.lift.v[e](q.s[i]);
    }
    const double residual_at_lift = load_at_lift - eval_b(solver.layout(), u.coeff, report.lift);
    CHECK(residual_at_lift == doctest::Approx(total2).epsilon(3e-8));
  }
}

TEST_CASE("interval convergence towards the exact fields") {
  double prev_phi = 0.0, prev_sigma = 0.0, prev_energy = 0.0;
  for (const int n : {8, 16}) {
    const MeshPtr mesh = canonical_interval(n);
    DpgSolver solver(make_space(mesh, 0));
    const TrialFunction u = solver.solve(f_half);
    const L2Errors errs = l2_errors(u, phi_star, sigma_star, sigma_hat_star(*mesh));
    const ErrorReport report = solver.energy_error(u, f_half);

    CHECK(errs.phi < 0.2);
    CHECK(errs.sigma < 0.08);
    CHECK(errs.nodes_scaled < 0.08);
    if (n > 8) {
      CHECK(errs.phi < prev_phi);
      CHECK(errs.sigma < prev_sigma);
      CHECK(report.energy_total < prev_energy);
    }
    prev_phi = errs.phi;
    prev_sigma = errs.sigma;
    prev_energy = report.energy_total;

    // Quasi-optimality smoke check: energy and L2 errors stay comparable.
    const double ratio = report.energy_total / (errs.phi + errs.sigma + errs.nodes_scaled);
    CHECK(ratio > 0.05);
    CHECK(ratio < 20.0);
  }
}

TEST_CASE("closed-curve solve is consistent with its own residual") {
  const MeshPtr mesh = small_square(2);
  DpgSolver solver(make_space(mesh, 1));
  const double L = mesh->total_length();
  const ScalarField f = [L](const Vector2d&, double s) {
    return std::cos(2.0 * M_PI * s / L);
  };

  const VectorXd F = solver.load(f);
  const TrialFunction u = solver.solve(f);
  const VectorXd residual = F - solver.matrix() * u.coeff;
  CHECK(residual.cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, F.cwiseAbs().maxCoeff()));

  const ErrorReport report = solver.energy_error(u, f);
  CHECK(report.energy_total > 0.0);
  CHECK(max_orthogonality_defect(solver, report) <= 1e-9);

  // The stabilized formulation pins the density mean to the load mean (zero).
  CHECK(std::abs(u.phi().mean_integral()) < 0.02);

  DpgSolver fine(make_space(refine_halve(*mesh, {0, 1, 2, 3, 4, 5, 6, 7}), 1));
  const ErrorReport fine_report = fine.energy_error(fine.solve(f), f);
  CHECK(fine_report.energy_total < report.energy_total);
}

TEST_CASE("enrichment options are honoured") {
  const MeshPtr mesh = canonical_interval(4);
  DpgOptions opt;
  opt.enrich_solve = 2;
  opt.enrich_error = 2; // exercises the shared-assembly branch
  DpgSolver solver(make_space(mesh, 0), opt);
  CHECK(solver.error_space()->max_degree() == 2);
  const TrialFunction u = solver.solve(f_half);
  const ErrorReport report = solver.energy_error(u, f_half);
  CHECK(max_orthogonality_defect(solver, report) <= 1e-9);

  DpgOptions deep;
  deep.enrich_solve = 2;
  deep.enrich_error = 4;
  DpgSolver rich(make_space(mesh, 0), deep);
  const L2Errors base =
      l2_errors(solver.solve(f_half), phi_star, sigma_star, sigma_hat_star(*mesh));
  const L2Errors richer =
      l2_errors(rich.solve(f_half), phi_star, sigma_star, sigma_hat_star(*mesh));
  CHECK(richer.phi < 2.0 * base.phi + 1e-12);
  CHECK(richer.sigma < 2.0 * base.sigma + 1e-12);
}
