// Ultra-weak trial unknowns, discrete test functions and the trial-to-test
// operator.
//
// The first-kind equation V phi' ... is tested ultra-weakly: the unknowns are
// the density phi, its flux sigma = phi' and the nodal traces sigma_hat, and
// the bilinear form against a broken test pair (tau, v) reads
//   b(phi, sigma, sigma_hat; tau, v) = <phi, (V tau)'>
//                                    + [closed curves] <phi, 1><v, 1>
//                                    + <sigma, tau + v'>
//                                    + sum_j sigma_hat_j [v]_j.
// The test norm is
//   |(tau, v)|_V^2 = |tau|^2 + sum_T ( |v'|_T^2 + |T| v(x_T)^2 ),
// with x_T the start node of T, and the optimal test function of a trial
// basis vector (its Riesz lift under that norm) comes out in closed form
// elementwise; no local solves are needed.
#pragma once

#include "uwdpg/layerpot.hpp"
#include "uwdpg/mesh.hpp"
#include "uwdpg/polyspace.hpp"

#include <Eigen/Dense>

#include <vector>

namespace uwdpg {

// Block layout of the trial vector: (phi | sigma | sigma_hat), the two fields
// in the same broken polynomial space and one trace value per mesh node.
class TrialLayout {
public:
  explicit TrialLayout(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  int n_field() const { return n_field_; }
  int n_nodes() const { return n_nodes_; }
  int dim() const { return 2 * n_field_ + n_nodes_; }

  int phi(int i) const { return i; }
  int sigma(int i) const { return n_field_ + i; }
  int hat(int j) const { return 2 * n_field_ + j; }

  PwPoly phi_part(const Eigen::VectorXd& u) const;
  PwPoly sigma_part(const Eigen::VectorXd& u) const;
  Eigen::VectorXd hat_part(const Eigen::VectorXd& u) const;

private:
  SpacePtr space_;
  int n_field_ = 0;
  int n_nodes_ = 0;
};

// Discrete test pair: tau by coefficients in a broken space, v as one local
// polynomial per element (broken H^1, no continuity imposed).
struct TestFunction {
  SpacePtr tau_space;
  Eigen::VectorXd tau;
  std::vector<LocalPoly> v;
};

TestFunction zero_test_function(SpacePtr tau_space);

// v-components of the closed-form Riesz lifts on one element of length h.
LocalPoly phi_v_shape(double h);   // (h - s/2) s + 1, lift of v -> <v, 1>
LocalPoly node_v_after(double h);  // 1/h,   lift of v -> v(start)
LocalPoly node_v_before(double h); // -s - 1/h, lift of v -> -v(end)

// Element contribution <p', q'> + h p(0) q(0) of the test norm.
double v_local_inner(const LocalPoly& p, const LocalPoly& q, double h);

// Full test inner product; both arguments must share the tau space.
double v_inner(const TestFunction& a, const TestFunction& b);

// Same test pair with tau re-expressed in a finer space on the same mesh.
TestFunction embed_test_function(const TestFunction& w, SpacePtr finer);

// Jumps of the broken v component at the mesh nodes.
Eigen::VectorXd jump_vector(const Mesh& mesh, const std::vector<LocalPoly>& v);

// b(u; w) by quadrature-backed evaluation of each term.
double eval_b(const TrialLayout& lay, const Eigen::VectorXd& u, const TestFunction& w,
              const QuadPolicy& pol = {});

// Maps trial basis vectors to their optimal test functions.  The tau
// components of the phi block are the rows of the potential-derivative
// matrix; everything else is explicit.
class TrialToTest {
public:
  TrialToTest(TrialLayout layout, SpacePtr enriched, const QuadPolicy& pol = {});

  const TrialLayout& layout() const { return layout_; }
  const SpacePtr& enriched() const { return enriched_; }

  // B(i, k) = <phi_i, (V b_k)'> over trial x enriched basis pairs.
  const Eigen::MatrixXd& b_matrix() const { return B_; }
  // Position of trial basis i inside the enriched space.
  const std::vector<int>& embedding() const { return embed_; }
  // <phi_i, 1>: sqrt(h) on the constant of each element, 0 otherwise.
  const Eigen::VectorXd& phi_means() const { return phi_means_; }

  TestFunction theta_phi(int i) const;
  TestFunction theta_sigma(int i) const;
  TestFunction theta_node(int j) const;
  TestFunction theta(const Eigen::VectorXd& u) const;

private:
  TrialLayout layout_;
  SpacePtr enriched_;
  Eigen::MatrixXd B_;
  std::vector<int> embed_;
  Eigen::VectorXd phi_means_;
  bool closed_ = false;
};

} // namespace uwdpg
