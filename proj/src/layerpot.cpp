#include "uwdpg/layerpot.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace uwdpg {

namespace {

using cplx = std::complex<double>;

constexpr double kKernelFactor = -1.0 / (2.0 * M_PI);

// w log w extended by its limit 0 at w = 0 (the integrals below stay finite
// when the target sits on an element endpoint).
cplx xlogx(cplx w) { return w == 0.0 ? cplx(0.0, 0.0) : w * std::log(w); }

// Radius of the Bernstein ellipse through z (>= 1, equal to 1 on [-1,1]).
double bernstein_radius(cplx z) {
  const cplx sq = std::sqrt(z - 1.0) * std::sqrt(z + 1.0);
  double r = std::abs(z + sq);
  if (r < 1.0) r = std::abs(z - sq);
  return std::max(r, 1.0);
}

// Real parts of I_k = \int_{-1}^1 P_k(t) Log(z-t) dt for k = 0..kmax.
//
// Upward path (z on or near the cut): with L = Log(z+1) - Log(z-1) and the
// second-kind decomposition Q_k = P_k L / 2 - V_k (V_0 = 0, V_1 = 1, same
// recurrence as P_k), integration by parts against the Legendre antiderivative
// gives I_k = [ (P_{k+1} - P_{k-1}) L - 2 (V_{k+1} - V_{k-1}) ] / (2k+1).
// The product (P_{k+1}-P_{k-1}) L vanishes in the limit z -> +-1, which is the
// only place L blows up, so endpoint targets are exact.
//
// Downward path (distant z): the upward recurrence amplifies rounding like
// rho^k, so Q_k is computed as the minimal solution by a downward recurrence
// normalized at Q_0, and I_0 by the series 2 Log z - 2 sum_j z^{-2j}/(2j(2j+1))
// (the closed form loses absolute accuracy to cancellation for large z).
Eigen::VectorXd log_integrals(int kmax, cplx z) {
  const cplx zm = z - 1.0, zp = z + 1.0;
  Eigen::VectorXd I(kmax + 1);
  const double rho = bernstein_radius(z);

  if (rho <= 3.0) {
    I[0] = (xlogx(zp) - xlogx(zm)).real() - 2.0;
    if (kmax == 0) return I;
    I[1] = 0.5 * (zm * xlogx(zp) - zp * xlogx(zm)).real() - z.real();
    if (kmax == 1) return I;
    const bool at_end = (zm == 0.0 || zp == 0.0);
    const cplx L = at_end ? cplx(0.0, 0.0) : std::log(zp) - std::log(zm);
    std::vector<cplx> P(kmax + 2), V(kmax + 2);
    P[0] = 1.0;
    P[1] = z;
    V[0] = 0.0;
    V[1] = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      P[k + 1] = ((2.0 * k + 1.0) * z * P[k] - double(k) * P[k - 1]) / (k + 1.0);
      V[k + 1] = ((2.0 * k + 1.0) * z * V[k] - double(k) * V[k - 1]) / (k + 1.0);
    }
    for (int k = 2; k <= kmax; ++k) {
      const cplx DL = at_end ? cplx(0.0, 0.0) : (P[k + 1] - P[k - 1]) * L;
      I[k] = (DL - 2.0 * (V[k + 1] - V[k - 1])).real() / (2.0 * k + 1.0);
    }
    return I;
  }

  // I_0 by series in 1/z^2; |z| > 1.6 here so it converges geometrically.
  {
    cplx acc = 0.0;
    const cplx zi2 = 1.0 / (z * z);
    cplx pw = zi2;
    for (int j = 1; j <= 80; ++j) {
      const cplx term = pw / (2.0 * j * (2.0 * j + 1.0));
      acc += term;
      if (std::abs(term) < 1e-18 * (1.0 + std::abs(acc))) break;
      pw *= zi2;
    }
    I[0] = (2.0 * std::log(z) - 2.0 * acc).real();
  }
  if (kmax == 0) return I;

  // Downward recurrence for Q_1..Q_{kmax+1}, normalized with Q_0.
  const cplx Q0 = 0.5 * (std::log(zp) - std::log(zm));
  const int m = std::max(4, static_cast<int>(std::ceil(18.4 / std::log(rho))));
  const int K = kmax + 1 + m;
  std::vector<cplx> q(K + 2);
  q[K + 1] = 0.0;
  q[K] = 1.0;
  for (int k = K; k >= 1; --k) {
    q[k - 1] = ((2.0 * k + 1.0) * z * q[k] - (k + 1.0) * q[k + 1]) / double(k);
    if (std::abs(q[k - 1].real()) > 1e280 || std::abs(q[k - 1].imag()) > 1e280)
      for (int j = k - 1; j <= K + 1; ++j) q[j] *= 1e-280;
  }
  const cplx scale = Q0 / q[0];
  for (int k = 1; k <= kmax; ++k)
    I[k] = (2.0 * (q[k + 1] - q[k - 1]) * scale).real() / (2.0 * k + 1.0);
  return I;
}

// Local complex coordinate of x relative to T: the element maps to [-1,1].
cplx local_coordinate(const Element& T, const Eigen::Vector2d& x) {
  const double half = T.length / 2.0;
  const Eigen::Vector2d mid = 0.5 * (T.a + T.b);
  const Eigen::Vector2d u = (T.b - T.a) / T.length;
  const Eigen::Vector2d d = x - mid;
  return cplx(d.dot(u) / half, (u.x() * d.y() - u.y() * d.x()) / half);
}

double point_segment_distance(const Eigen::Vector2d& p, const Element& S) {
  const Eigen::Vector2d ab = S.b - S.a;
  double t = (p - S.a).dot(ab) / ab.squaredNorm();
  t = std::clamp(t, 0.0, 1.0);
  return (p - (S.a + t * ab)).norm();
}

double segment_distance(const Element& A, const Element& B) {
  return std::min(std::min(point_segment_distance(A.a, B), point_segment_distance(A.b, B)),
                  std::min(point_segment_distance(B.a, A), point_segment_distance(B.b, A)));
}

// Local arclength on A closest to segment B.
double closest_param(const Element& A, const Element& B) {
  const Eigen::Vector2d ab = A.b - A.a;
  auto project = [&](const Eigen::Vector2d& p) {
    return std::clamp((p - A.a).dot(ab) / ab.squaredNorm(), 0.0, 1.0) * A.length;
  };
  double best_s = 0.0, best_d = point_segment_distance(A.a, B);
  for (double s : {A.length, project(B.a), project(B.b)}) {
    const double d = point_segment_distance(A.point_at(s), B);
    if (d < best_d) {
      best_d = d;
      best_s = s;
    }
  }
  return best_s;
}

// Outer rule on target element ea for the potential sourced on eb.
LocalQuad pair_rule(const Mesh& mesh, int ea, int eb, int outer_deg, const QuadPolicy& pol) {
  const Element& A = mesh.element(ea);
  const int n_touch = std::max(4, outer_deg + pol.touch_extra);
  if (ea == eb)
    return composite_graded_rule(A.length, {0.0, A.length}, n_touch, pol.grading_levels,
                                 pol.grading_ratio);
  const Element& B = mesh.element(eb);
  if (mesh.touching(ea, eb)) {
    std::vector<double> sing;
    if (A.start == B.start || A.start == B.end) sing.push_back(0.0);
    if (A.end == B.start || A.end == B.end) sing.push_back(A.length);
    return composite_graded_rule(A.length, sing, n_touch, pol.grading_levels,
                                 pol.grading_ratio);
  }
  const double delta = 2.0 * segment_distance(A, B) / A.length;
  if (delta < pol.near_threshold)
    return composite_graded_rule(A.length, {closest_param(A, B)}, n_touch,
                                 pol.grading_levels, pol.grading_ratio);
  int n = outer_deg + pol.far_extra;
  if (pol.distance_scaled) {
    const double rho = delta + std::sqrt(1.0 + delta * delta);
    n = std::max(n, static_cast<int>(std::ceil(18.4 / std::log(rho))) + outer_deg / 2 + 1);
  }
  return local_gauss(A.length, std::min(n, pol.max_order));
}

// Potential values of all source basis functions of eb at x:
// pot_k = (V b_{eb,k})(x) for the orthonormal local basis.
Eigen::VectorXd basis_potentials(const PwPolySpace& space, int eb, const Eigen::Vector2d& x) {
  const Element& B = space.mesh()->element(eb);
  const int p = space.degree(eb);
  Eigen::VectorXd M = log_moments(B, p, x);
  for (int k = 0; k <= p; ++k) M[k] *= kKernelFactor * std::sqrt((2 * k + 1) / B.length);
  return M;
}

} // namespace

Eigen::VectorXd log_moments(const Element& T, int kmax, const Eigen::Vector2d& x) {
  if (kmax < 0) throw std::invalid_argument("log_moments: negative degree");
  const double half = T.length / 2.0;
  Eigen::VectorXd M = half * log_integrals(kmax, local_coordinate(T, x));
  M[0] += 2.0 * half * std::log(half);
  return M;
}

double log_moment(const Element& T, int k, const Eigen::Vector2d& x) {
  return log_moments(T, k, x)[k];
}

double v_eval(const PwPoly& tau, const Eigen::Vector2d& x) {
  const PwPolySpace& space = *tau.space;
  double v = 0.0;
  for (int e = 0; e < space.mesh()->element_count(); ++e) {
    const int p = space.degree(e);
    const Eigen::VectorXd pot = basis_potentials(space, e, x);
    for (int k = 0; k <= p; ++k) v += tau.coeff[space.index(e, k)] * pot[k];
  }
  return v;
}

double galerkin_v_entry(const PwPoly& delta, const PwPoly& tau, const QuadPolicy& pol) {
  const PwPolySpace& dspace = *delta.space;
  const PwPolySpace& tspace = *tau.space;
  if (dspace.mesh() != tspace.mesh())
    throw std::invalid_argument("galerkin_v_entry: arguments live on different meshes");
  const Mesh& mesh = *dspace.mesh();
  double acc = 0.0;
  for (int ea = 0; ea < mesh.element_count(); ++ea) {
    if (delta.coeff.segment(dspace.offset(ea), dspace.degree(ea) + 1).isZero(0.0)) continue;
    const Element& A = mesh.element(ea);
    for (int eb = 0; eb < mesh.element_count(); ++eb) {
      if (tau.coeff.segment(tspace.offset(eb), tspace.degree(eb) + 1).isZero(0.0)) continue;
      const LocalQuad rule = pair_rule(mesh, ea, eb, dspace.degree(ea), pol);
      for (int q = 0; q < rule.s.size(); ++q) {
        const Eigen::Vector2d x = A.point_at(rule.s[q]);
        const Eigen::VectorXd pot = basis_potentials(tspace, eb, x);
        double vt = 0.0;
        for (int k = 0; k <= tspace.degree(eb); ++k)
          vt += tau.coeff[tspace.index(eb, k)] * pot[k];
        acc += rule.w[q] * delta.eval(ea, rule.s[q]) * vt;
      }
    }
  }
  return acc;
}

Eigen::MatrixXd v_galerkin_matrix(const PwPolySpace& space, const QuadPolicy& pol) {
  const Mesh& mesh = *space.mesh();
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(space.dim(), space.dim());
  for (int ea = 0; ea < mesh.element_count(); ++ea) {
    const Element& A = mesh.element(ea);
    const int pa = space.degree(ea);
    const double scale = std::sqrt(1.0 / A.length);
    for (int eb = 0; eb < mesh.element_count(); ++eb) {
      const int pb = space.degree(eb);
      const LocalQuad rule = pair_rule(mesh, ea, eb, pa, pol);
      for (int q = 0; q < rule.s.size(); ++q) {
        const Eigen::Vector2d x = A.point_at(rule.s[q]);
        const Eigen::VectorXd pot = basis_potentials(space, eb, x);
        const double t = 2.0 * rule.s[q] / A.length - 1.0;
        const Eigen::VectorXd leg = legendre_values(pa, t);
        for (int l = 0; l <= pa; ++l) {
          const double bl = scale * std::sqrt(2.0 * l + 1.0) * leg[l] * rule.w[q];
          for (int k = 0; k <= pb; ++k)
            G(space.index(ea, l), space.index(eb, k)) += bl * pot[k];
        }
      }
    }
  }
  G = 0.5 * (G + G.transpose()).eval();
  return G;
}

double phi_vtau_form(const PwPoly& phi, const PwPoly& tau, const QuadPolicy& pol) {
  const PwPolySpace& pspace = *phi.space;
  const PwPolySpace& tspace = *tau.space;
  if (pspace.mesh() != tspace.mesh())
    throw std::invalid_argument("phi_vtau_form: arguments live on different meshes");
  const Mesh& mesh = *pspace.mesh();
  double acc = 0.0;
  for (int ea = 0; ea < mesh.element_count(); ++ea) {
    if (phi.coeff.segment(pspace.offset(ea), pspace.degree(ea) + 1).isZero(0.0)) continue;
    const Element& A = mesh.element(ea);
    acc += phi.end_value(ea) * v_eval(tau, A.b) - phi.start_value(ea) * v_eval(tau, A.a);
    if (pspace.degree(ea) == 0) continue; // constant: no volume term
    for (int eb = 0; eb < mesh.element_count(); ++eb) {
      if (tau.coeff.segment(tspace.offset(eb), tspace.degree(eb) + 1).isZero(0.0)) continue;
      const LocalQuad rule = pair_rule(mesh, ea, eb, pspace.degree(ea), pol);
      for (int q = 0; q < rule.s.size(); ++q) {
        const Eigen::Vector2d x = A.point_at(rule.s[q]);
        const Eigen::VectorXd pot = basis_potentials(tspace, eb, x);
        double vt = 0.0;
        for (int k = 0; k <= tspace.degree(eb); ++k)
          vt += tau.coeff[tspace.index(eb, k)] * pot[k];
        acc -= rule.w[q] * phi.eval_derivative(ea, rule.s[q]) * vt;
      }
    }
  }
  return acc;
}

Eigen::MatrixXd phi_vtau_matrix(const PwPolySpace& trial, const PwPolySpace& test,
                                const QuadPolicy& pol) {
  if (trial.mesh() != test.mesh())
    throw std::invalid_argument("phi_vtau_matrix: spaces live on different meshes");
  const Mesh& mesh = *trial.mesh();
  const int n = mesh.element_count();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(trial.dim(), test.dim());

  // Potentials of every test basis function at every node (the integration by
  // parts needs one-sided element endpoint values, which are the node values
  // since V maps into continuous functions).
  Eigen::MatrixXd node_pot(mesh.node_count(), test.dim());
  for (int eb = 0; eb < n; ++eb)
    for (int j = 0; j < mesh.node_count(); ++j)
      node_pot.block(j, test.offset(eb), 1, test.degree(eb) + 1) =
          basis_potentials(test, eb, mesh.node(j)).transpose();

  for (int ea = 0; ea < n; ++ea) {
    const Element& A = mesh.element(ea);
    const int pa = trial.degree(ea);
    for (int l = 0; l <= pa; ++l)
      B.row(trial.index(ea, l)) += trial.basis_at_end(ea, l) * node_pot.row(A.end) -
                                   trial.basis_at_start(ea, l) * node_pot.row(A.start);
    if (pa == 0) continue;

    const double dscale = 2.0 / (A.length * std::sqrt(A.length));
    Eigen::VectorXd leg, dleg;
    for (int eb = 0; eb < n; ++eb) {
      const LocalQuad rule = pair_rule(mesh, ea, eb, pa, pol);
      for (int q = 0; q < rule.s.size(); ++q) {
        const Eigen::Vector2d x = A.point_at(rule.s[q]);
        const Eigen::VectorXd pot = basis_potentials(test, eb, x);
        const double t = 2.0 * rule.s[q] / A.length - 1.0;
        legendre_values_derivatives(pa, t, leg, dleg);
        for (int l = 1; l <= pa; ++l) {
          const double w = -rule.w[q] * std::sqrt(2.0 * l + 1.0) * dleg[l] * dscale;
          B.row(trial.index(ea, l)).segment(test.offset(eb), test.degree(eb) + 1) +=
              w * pot.transpose();
        }
      }
    }
  }
  return B;
}

} // namespace uwdpg
