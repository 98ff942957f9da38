// Broken polynomial spaces on a mesh: L2-orthonormal Legendre bases per
// element, Gauss quadrature, projections and elementwise antiderivatives.
#pragma once

#include "uwdpg/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace uwdpg {

// Nodes and weights on the reference interval (-1,1); exact through
// polynomial degree 2n-1.
struct QuadRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

const QuadRule& gauss_rule(int n);

// Legendre P_0..P_kmax at t; optionally also derivatives.
Eigen::VectorXd legendre_values(int kmax, double t);
void legendre_values_derivatives(int kmax, double t, Eigen::VectorXd& val,
                                 Eigen::VectorXd& der);

// Polynomial in the local arclength s of one element, monomial coefficients
// c[0] + c[1] s + ...  Small degrees only; used for the explicit test-function
// components where everything stays exactly integrable.
class LocalPoly {
public:
  LocalPoly() : c_(Eigen::VectorXd::Zero(1)) {}
  explicit LocalPoly(Eigen::VectorXd coeffs) : c_(std::move(coeffs)) {
    if (c_.size() == 0) c_ = Eigen::VectorXd::Zero(1);
  }

  static LocalPoly zero() { return LocalPoly(); }
  static LocalPoly constant(double v) { return LocalPoly(Eigen::Vector<double, 1>(v)); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const Eigen::VectorXd& coeffs() const { return c_; }
  bool is_zero() const { return c_.isZero(0.0); }

  double operator()(double s) const;
  LocalPoly derivative() const;
  LocalPoly antiderivative() const; // vanishing at s = 0
  double integral(double h) const;  // over (0,h)

  LocalPoly& operator+=(const LocalPoly& other);
  LocalPoly scaled(double a) const { return LocalPoly(a * c_); }

  // Exact integral of p*q over (0,h); no product polynomial is formed.
  static double inner(const LocalPoly& p, const LocalPoly& q, double h);

private:
  Eigen::VectorXd c_;
};

// Discontinuous piecewise polynomials with per-element degrees.  The local
// basis on an element of length h is b_k(s) = sqrt((2k+1)/h) P_k(2s/h - 1),
// so the global mass matrix is the identity.
class PwPolySpace {
public:
  PwPolySpace(MeshPtr mesh, int uniform_degree);
  PwPolySpace(MeshPtr mesh, std::vector<int> degrees);

  const MeshPtr& mesh() const { return mesh_; }
  int dim() const { return dim_; }
  int degree(int e) const { return degrees_[e]; }
  int max_degree() const { return max_degree_; }
  int offset(int e) const { return offsets_[e]; }
  int index(int e, int k) const { return offsets_[e] + k; }

  double basis_value(int e, int k, double s) const;
  double basis_derivative(int e, int k, double s) const;
  double basis_at_start(int e, int k) const; // s = 0
  double basis_at_end(int e, int k) const;   // s = length
  LocalPoly basis_local_poly(int e, int k) const;

private:
  MeshPtr mesh_;
  std::vector<int> degrees_;
  std::vector<int> offsets_;
  int dim_ = 0;
  int max_degree_ = 0;
};

using SpacePtr = std::shared_ptr<const PwPolySpace>;

SpacePtr make_space(MeshPtr mesh, int uniform_degree);
SpacePtr make_space(MeshPtr mesh, std::vector<int> degrees);

// Coefficient vector in a PwPolySpace.
struct PwPoly {
  SpacePtr space;
  Eigen::VectorXd coeff;

  PwPoly() = default;
  explicit PwPoly(SpacePtr s) : space(std::move(s)), coeff(Eigen::VectorXd::Zero(space->dim())) {}
  PwPoly(SpacePtr s, Eigen::VectorXd c) : space(std::move(s)), coeff(std::move(c)) {}

  double eval(int e, double s) const;
  double eval_derivative(int e, double s) const;
  double start_value(int e) const;
  double end_value(int e) const;
  // Integral against 1 over the whole curve.
  double mean_integral() const;
};

double eval(const PwPoly& p, int e, double s);

// Scalar fields are sampled as f(point, global arclength).
using ScalarField = std::function<double(const Eigen::Vector2d&, double)>;

// L2 projection; quadrature with degree+1+extra_points Gauss points per
// element (exact whenever g is a polynomial of degree <= local degree).
PwPoly l2_project(const SpacePtr& space, const ScalarField& g, int extra_points = 1);

// Antiderivative of p restricted to element e, vanishing at the element start.
LocalPoly antiderivative_on_element(const PwPoly& p, int e);

// Restriction of p to element e as a local polynomial in s.
LocalPoly element_poly(const PwPoly& p, int e);

// Jumps of a broken polynomial at the mesh nodes.
Eigen::VectorXd jump_vector(const PwPoly& v);

// Quadrature nodes/weights in local arclength on (0,h).
struct LocalQuad {
  Eigen::VectorXd s;
  Eigen::VectorXd w;
};

LocalQuad local_gauss(double h, int n);

// Composite Gauss rule geometrically graded towards each point in `singular`
// (clamped to [0,h]).  n_base points per piece, `levels` pieces per graded
// direction shrinking by `ratio`.  Endpoint singularities are never sampled.
LocalQuad composite_graded_rule(double h, std::vector<double> singular, int n_base,
                                int levels, double ratio);

// Global indices embedding `coarse` into `fine` (same mesh, elementwise
// degree(fine) >= degree(coarse)); the shared Legendre family makes the
// embedding a plain index map.
std::vector<int> embedding_indices(const PwPolySpace& coarse, const PwPolySpace& fine);

} // namespace uwdpg
