#include "uwdpg/reference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace uwdpg {
namespace {

// One continuous basis function, stored as its element-local pieces.
struct Piece {
  int elem;
  LocalPoly shape;
};

using RefBasis = std::vector<Piece>;

std::vector<RefBasis> build_basis(const Mesh& mesh, const PwPolySpace& der_space) {
  std::vector<RefBasis> basis;

  // Nodal hats: value one at the node, linear decay on the two neighbours.
  // Open curves drop the endpoint hats (the solution vanishes there).
  for (int j = 0; j < mesh.node_count(); ++j) {
    const int before = mesh.element_before(j);
    const int after = mesh.element_after(j);
    if (before < 0 || after < 0) continue;
    RefBasis hat;
    const double hb = mesh.element(before).length;
    hat.push_back({before, LocalPoly(Eigen::Vector2d(0.0, 1.0 / hb))}); // s/h
    const double ha = mesh.element(after).length;
    hat.push_back({after, LocalPoly(Eigen::Vector2d(1.0, -1.0 / ha))}); // 1 - s/h
    basis.push_back(std::move(hat));
  }

  // Bubbles: antiderivatives of the non-constant element Legendre basis
  // vanish at both element ends, so extension by zero stays continuous.
  for (int e = 0; e < mesh.element_count(); ++e)
    for (int k = 1; k <= der_space.degree(e); ++k)
      basis.push_back({{e, der_space.basis_local_poly(e, k).antiderivative()}});
  return basis;
}

} // namespace

GalerkinSolution solve_reference(MeshPtr mesh, int degree, const ScalarField& f,
                                 const QuadPolicy& pol) {
  if (degree < 1) throw std::invalid_argument("solve_reference: degree must be >= 1");
  const bool closed = mesh->kind() == CurveKind::ClosedPolygon;

  // Derivative space (degree - 1) and the representation space (degree).
  const SpacePtr der_space = make_space(mesh, degree - 1);
  const SpacePtr rep_space = make_space(mesh, degree);

  // Continuous basis: nodal hats plus per-element bubbles.
  const std::vector<RefBasis> basis = build_basis(*mesh, *der_space);
  const int nb = static_cast<int>(basis.size());
  GalerkinSolution out;
  out.psi = PwPoly(rep_space);
  if (nb == 0) return out; // single-element open curve at degree 1

  // Derivative coefficients in the orthonormal broken basis.
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(nb, der_space->dim());
  for (int i = 0; i < nb; ++i)
    for (const Piece& piece : basis[i]) {
      const double h = mesh->element(piece.elem).length;
      const LocalPoly ds = piece.shape.derivative();
      for (int k = 0; k <= der_space->degree(piece.elem); ++k)
        D(i, der_space->index(piece.elem, k)) =
            LocalPoly::inner(ds, der_space->basis_local_poly(piece.elem, k), h);
    }

  const Eigen::MatrixXd G = v_galerkin_matrix(*der_space, pol);
  const Eigen::MatrixXd A = D * G * D.transpose();

  // Load vector by elementwise Gauss quadrature.
  Eigen::VectorXd L = Eigen::VectorXd::Zero(nb);
  for (int i = 0; i < nb; ++i)
    for (const Piece& piece : basis[i]) {
      const Element& T = mesh->element(piece.elem);
      const LocalQuad q = local_gauss(T.length, degree + 9);
      for (int g = 0; g < q.s.size(); ++g)
        L[i] += q.w[g] * f(T.point_at(q.s[g]), T.arclength0 + q.s[g]) * piece.shape(q.s[g]);
    }

  Eigen::VectorXd x(nb);
  if (!closed) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("solve_reference: Galerkin matrix not positive definite");
    x = llt.solve(L);
  } else {
    // The hats sum to one, so A is singular on constants; border with the
    // mean to pick the zero-mean representative.
    Eigen::VectorXd m = Eigen::VectorXd::Zero(nb);
    for (int i = 0; i < nb; ++i)
      for (const Piece& piece : basis[i])
        m[i] += piece.shape.integral(mesh->element(piece.elem).length);
    Eigen::MatrixXd bordered = Eigen::MatrixXd::Zero(nb + 1, nb + 1);
    bordered.topLeftCorner(nb, nb) = A;
    bordered.block(0, nb, nb, 1) = m;
    bordered.block(nb, 0, 1, nb) = m.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb + 1);
    rhs.head(nb) = L;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered);
    x = lu.solve(rhs).head(nb);
  }

  // Expand into the broken representation space.
  for (int e = 0; e < mesh->element_count(); ++e) {
    LocalPoly local;
    bool any = false;
    for (int i = 0; i < nb; ++i)
      for (const Piece& piece : basis[i])
        if (piece.elem == e) {
          local += piece.shape.scaled(x[i]);
          any = true;
        }
    if (!any) continue;
    const double h = mesh->element(e).length;
    for (int k = 0; k <= rep_space->degree(e); ++k)
      out.psi.coeff[rep_space->index(e, k)] =
          LocalPoly::inner(local, rep_space->basis_local_poly(e, k), h);
  }
  out.energy = x.dot(A * x);
  return out;
}

} // namespace uwdpg
