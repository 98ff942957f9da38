// DPG solver: stiffness assembly as the Gram matrix of the optimal test
// functions, equilibrated Cholesky solve, and the a-posteriori energy error
// via the residual Riesz lift in a further enriched test space.
#pragma once

#include "uwdpg/trialtest.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace uwdpg {

struct DpgOptions {
  int enrich_solve = 1;    // test-space degree p + enrich_solve
  int enrich_error = 2;    // error-lift degree p + enrich_error
  int load_quad_extra = 8; // extra Gauss points projecting the load
  QuadPolicy quad;
};

// Discrete solution (phi | sigma | sigma_hat) over a trial layout.
struct TrialFunction {
  TrialLayout layout;
  Eigen::VectorXd coeff;

  PwPoly phi() const { return layout.phi_part(coeff); }
  PwPoly sigma() const { return layout.sigma_part(coeff); }
  Eigen::VectorXd sigma_hat() const { return layout.hat_part(coeff); }
};

// Energy error split into elementwise indicators, along with the residual
// lift that generated it: energy_total^2 = sum indicators^2 exactly.
struct ErrorReport {
  double energy_total = 0.0;
  Eigen::VectorXd indicators; // eta_T, one per element
  TestFunction lift;          // Riesz lift in the error test space
};

struct L2Errors {
  double phi = 0.0;
  double sigma = 0.0;
  double nodes_scaled = 0.0; // N^(-1/2) |sigma_hat - ref|_2
};

class DpgSolver {
public:
  explicit DpgSolver(SpacePtr trial, DpgOptions opt = {});

  const DpgOptions& options() const { return opt_; }
  const TrialLayout& layout() const { return layout_; }
  const TrialToTest& map() const { return map_; }
  const SpacePtr& error_space() const { return error_space_; }

  // Stiffness matrix K(m,n) = v_inner(theta(u_m), theta(u_n)); symmetric
  // positive definite.
  const Eigen::MatrixXd& matrix() const { return K_; }

  // Load F_m = <f, v-component of theta(u_m)>.
  Eigen::VectorXd load(const ScalarField& f) const;

  TrialFunction solve(const ScalarField& f) const;

  // Residual lift in the error space and its elementwise energy split.
  ErrorReport energy_error(const TrialFunction& u, const ScalarField& f) const;

private:
  PwPoly project_load(const ScalarField& f) const;
  void assemble();
  void factorize();

  DpgOptions opt_;
  TrialLayout layout_;
  SpacePtr error_space_;
  TrialToTest map_;
  Eigen::MatrixXd B_err_;
  std::vector<int> embed_err_;
  Eigen::MatrixXd K_;
  Eigen::VectorXd equilibration_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

// L2 distances against reference fields, with quadrature graded towards the
// element ends (the references may have root singularities at the curve
// endpoints).  The node error is the scaled Euclidean distance of the traces.
L2Errors l2_errors(const TrialFunction& u, const ScalarField& phi_ref,
                   const ScalarField& sigma_ref, const Eigen::VectorXd& sigma_hat_ref);

// L2 distance between two broken polynomials on the same mesh (degrees may
// differ); exact elementwise integration.
double l2_distance(const PwPoly& a, const PwPoly& b);

} // namespace uwdpg
