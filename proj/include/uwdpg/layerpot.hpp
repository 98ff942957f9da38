// Single-layer potential of the 2-D Laplacian with log kernel,
//   (V tau)(x) = -(1/2pi) \int_Gamma tau(y) log|x-y| ds_y,
// with analytic inner integration: moments of Legendre polynomials against
// the log kernel are evaluated in closed form through Legendre functions of
// the second kind, so only the outer integration is numerical.
#pragma once

#include "uwdpg/mesh.hpp"
#include "uwdpg/polyspace.hpp"

#include <Eigen/Dense>

namespace uwdpg {

// Outer quadrature policy for the pairwise element integrals.  Orders are
// "element degree + extra" Gauss points; pairs that touch (or nearly touch)
// get a composite rule geometrically graded towards the singular point, and
// separated pairs get their order scaled by the distance-to-size ratio so the
// error stays near machine precision independently of the mesh.
struct QuadPolicy {
  int far_extra = 2;
  int touch_extra = 6;
  int grading_levels = 20;
  double grading_ratio = 0.5;
  double near_threshold = 0.4; // separation / half-length triggering grading
  bool distance_scaled = true;
  int max_order = 48;
};

// Moment of the k-th reference Legendre polynomial on T against the log
// kernel: \int_T P_k(t(y)) log|x-y| ds_y with t the (-1,1) coordinate on T.
// Finite for every x, including points on T and its endpoints.
double log_moment(const Element& T, int k, const Eigen::Vector2d& x);

// All moments k = 0..kmax at once (one recurrence pass).
Eigen::VectorXd log_moments(const Element& T, int kmax, const Eigen::Vector2d& x);

// Pointwise potential (V tau)(x) of a broken polynomial density.
double v_eval(const PwPoly& tau, const Eigen::Vector2d& x);

// <delta, V tau> over the curve; symmetric in its arguments up to the outer
// quadrature error.
double galerkin_v_entry(const PwPoly& delta, const PwPoly& tau, const QuadPolicy& pol = {});

// Full Galerkin matrix G(i,j) = <b_i, V b_j> of the space's basis,
// symmetrized after assembly.  Positive definite while the curve satisfies
// the capacity bound.
Eigen::MatrixXd v_galerkin_matrix(const PwPolySpace& space, const QuadPolicy& pol = {});

// <phi, (V tau)'> over the curve, where ' is the arclength derivative.  The
// derivative never hits the kernel: elementwise integration by parts moves it
// onto phi and one-sided endpoint values,
//   <phi,(V tau)'> = sum_T [ phi (V tau) ]_T - <phi', V tau>_T.
double phi_vtau_form(const PwPoly& phi, const PwPoly& tau, const QuadPolicy& pol = {});

// Matrix of the form above over basis pairs: rows the trial space, columns
// the test space, B(i,k) = <phi_i, (V b_k)'>.
Eigen::MatrixXd phi_vtau_matrix(const PwPolySpace& trial, const PwPolySpace& test,
                                const QuadPolicy& pol = {});

} // namespace uwdpg
