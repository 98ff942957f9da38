#include "uwdpg/dpg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace uwdpg {
namespace {

// Active v-locals of the optimal test functions on one element: the
// antiderivatives lifting the sigma block and the two node shapes.  Row is
// the global trial index the local belongs to.
struct VLocal {
  int row;
  LocalPoly poly;
};

std::vector<VLocal> element_v_locals(const TrialLayout& lay, int e) {
  const PwPolySpace& space = *lay.space();
  const Element& T = space.mesh()->element(e);
  std::vector<VLocal> locals;
  locals.reserve(space.degree(e) + 3);
  for (int k = 0; k <= space.degree(e); ++k)
    locals.push_back({lay.sigma(space.index(e, k)),
                      space.basis_local_poly(e, k).antiderivative()});
  locals.push_back({lay.hat(T.start), node_v_after(T.length)});
  locals.push_back({lay.hat(T.end), node_v_before(T.length)});
  return locals;
}

} // namespace

DpgSolver::DpgSolver(SpacePtr trial, DpgOptions opt)
    : opt_(opt),
      layout_(trial),
      error_space_(make_space(trial->mesh(), trial->max_degree() + opt.enrich_error)),
      map_(layout_, make_space(trial->mesh(), trial->max_degree() + opt.enrich_solve),
           opt.quad) {
  if (opt_.enrich_solve < 1 || opt_.enrich_error < 1)
    throw std::invalid_argument("dpg: enrichment increments must be >= 1");
  embed_err_ = embedding_indices(*layout_.space(), *error_space_);
  B_err_ = opt_.enrich_error == opt_.enrich_solve
               ? map_.b_matrix()
               : phi_vtau_matrix(*layout_.space(), *error_space_, opt_.quad);
  assemble();
  factorize();
}

void DpgSolver::assemble() {
  const PwPolySpace& space = *layout_.space();
  const Mesh& mesh = *space.mesh();
  const int d = layout_.n_field();
  const int N = layout_.dim();
  const Eigen::MatrixXd& B = map_.b_matrix();
  const std::vector<int>& embed = map_.embedding();
  const bool closed = mesh.kind() == CurveKind::ClosedPolygon;

  K_.setZero(N, N);

  // tau-part of the Gram: the tau components are (B-row | unit vector | 0)
  // per block, so the contribution is [B; E; 0] [B; E; 0]^T.
  K_.topLeftCorner(d, d) = B * B.transpose();
  for (int m = 0; m < d; ++m) {
    K_.block(0, layout_.sigma(m), d, 1) = B.col(embed[m]);
    K_.block(layout_.sigma(m), 0, 1, d) = B.col(embed[m]).transpose();
    K_(layout_.sigma(m), layout_.sigma(m)) += 1.0;
  }

  // v-part: elementwise pair products of the sigma/node locals.
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.element(e).length;
    const std::vector<VLocal> locals = element_v_locals(layout_, e);
    for (size_t a = 0; a < locals.size(); ++a) {
      K_(locals[a].row, locals[a].row) +=
          v_local_inner(locals[a].poly, locals[a].poly, h);
      for (size_t b = a + 1; b < locals.size(); ++b) {
        const double val = v_local_inner(locals[a].poly, locals[b].poly, h);
        K_(locals[a].row, locals[b].row) += val;
        K_(locals[b].row, locals[a].row) += val;
      }
    }
  }

  // Closed curves: the phi block carries the mean-lift shape w_T per element,
  // entering as a rank-one kappa c c^T plus the couplings c g^T + g c^T with
  // the locals above.
  if (closed) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
    c.head(d) = map_.phi_means();
    double kappa = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(N);
    for (int e = 0; e < mesh.element_count(); ++e) {
      const double h = mesh.element(e).length;
      const LocalPoly w = phi_v_shape(h);
      kappa += v_local_inner(w, w, h);
      for (const VLocal& loc : element_v_locals(layout_, e))
        g[loc.row] += v_local_inner(w, loc.poly, h);
    }
    K_ += kappa * c * c.transpose();
    K_ += c * g.transpose() + g * c.transpose();
  }

  K_ = 0.5 * (K_ + K_.transpose()).eval();
}

void DpgSolver::factorize() {
  const Eigen::VectorXd diag = K_.diagonal();
  if ((diag.array() <= 0.0).any())
    throw std::runtime_error("dpg: test Gram matrix has a nonpositive diagonal; "
                             "factorization failed");
  equilibration_ = diag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd Ks = equilibration_.asDiagonal() * K_ * equilibration_.asDiagonal();
  Ks = 0.5 * (Ks + Ks.transpose()).eval();
  llt_.compute(Ks);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("dpg: test Gram matrix is not positive definite; "
                             "factorization failed");
}

PwPoly DpgSolver::project_load(const ScalarField& f) const {
  const int p = layout_.space()->max_degree();
  const int q = std::max({p + opt_.enrich_error, p + 1, 2});
  return l2_project(make_space(layout_.space()->mesh(), q), f, opt_.load_quad_extra);
}

Eigen::VectorXd DpgSolver::load(const ScalarField& f) const {
  const PwPoly pf = project_load(f);
  const PwPolySpace& space = *layout_.space();
  const Mesh& mesh = *space.mesh();
  const bool closed = mesh.kind() == CurveKind::ClosedPolygon;

  Eigen::VectorXd F = Eigen::VectorXd::Zero(layout_.dim());
  double mean_sum = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.element(e).length;
    const LocalPoly fT = element_poly(pf, e);
    for (const VLocal& loc : element_v_locals(layout_, e))
      F[loc.row] += LocalPoly::inner(fT, loc.poly, h);
    if (closed) mean_sum += LocalPoly::inner(fT, phi_v_shape(h), h);
  }
  if (closed) F.head(layout_.n_field()) = map_.phi_means() * mean_sum;
  return F;
}

TrialFunction DpgSolver::solve(const ScalarField& f) const {
  const Eigen::VectorXd F = load(f);
  const auto apply = [&](const Eigen::VectorXd& rhs) {
    return (equilibration_.asDiagonal() *
            llt_.solve((equilibration_.asDiagonal() * rhs).eval()))
        .eval();
  };
  Eigen::VectorXd u = apply(F);
  u += apply(F - K_ * u); // one step of iterative refinement
  return TrialFunction{layout_, std::move(u)};
}

ErrorReport DpgSolver::energy_error(const TrialFunction& u, const ScalarField& f) const {
  const PwPolySpace& space = *layout_.space();
  const Mesh& mesh = *space.mesh();
  const PwPolySpace& err = *error_space_;
  const bool closed = mesh.kind() == CurveKind::ClosedPolygon;
  const int d = layout_.n_field();

  const Eigen::VectorXd phi_c = u.coeff.head(d);
  const Eigen::VectorXd sigma_c = u.coeff.segment(d, d);
  const Eigen::VectorXd hat = u.coeff.tail(layout_.n_nodes());
  const PwPoly pf = project_load(f);
  const double phi_mean = closed ? map_.phi_means().dot(phi_c) : 0.0;

  ErrorReport report;
  report.lift = zero_test_function(error_space_);

  // tau block of the lift: the residual against w = (tau, 0) is
  // -<phi,(V tau)'> - <sigma, tau>, and the tau mass matrix is the identity.
  Eigen::VectorXd tau_e = -(B_err_.transpose() * phi_c);
  for (int m = 0; m < d; ++m) tau_e[embed_err_[m]] -= sigma_c[m];
  report.lift.tau = tau_e;

  // v block: decouples elementwise.  In the local basis {1, antiderivatives
  // of the orthonormal element basis} the test-norm Gram is exactly
  // diag(h, 1, ..., 1), so the lift solve is a division per coefficient.
  report.indicators.resize(mesh.element_count());
  double total2 = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& T = mesh.element(e);
    const double h = T.length;
    const LocalPoly fT = element_poly(pf, e);
    const double hat_start = hat[T.start];
    const double hat_end = hat[T.end];

    // Residual against w = (0, 1) on this element.
    const double r0 = fT.integral(h) - phi_mean * h - (hat_start - hat_end);
    const double y0 = r0 / h;
    LocalPoly ve = LocalPoly::constant(y0);
    double v_part2 = r0 * y0; // = r0^2 / h

    for (int k = 0; k <= err.degree(e); ++k) {
      const LocalPoly A = err.basis_local_poly(e, k).antiderivative();
      double rk = LocalPoly::inner(fT, A, h) + hat_end * A(h);
      if (phi_mean != 0.0) rk -= phi_mean * A.integral(h);
      if (k <= space.degree(e)) rk -= sigma_c[space.index(e, k)];
      ve += A.scaled(rk);
      v_part2 += rk * rk;
    }
    report.lift.v[e] = ve;

    double eta2 = v_part2;
    for (int k = 0; k <= err.degree(e); ++k) {
      const double t = tau_e[err.index(e, k)];
      eta2 += t * t;
    }
    report.indicators[e] = std::sqrt(eta2);
    total2 += eta2;
  }
  report.energy_total = std::sqrt(total2);
  return report;
}

L2Errors l2_errors(const TrialFunction& u, const ScalarField& phi_ref,
                   const ScalarField& sigma_ref, const Eigen::VectorXd& sigma_hat_ref) {
  const PwPolySpace& space = *u.layout.space();
  const Mesh& mesh = *space.mesh();
  const PwPoly phi = u.phi();
  const PwPoly sigma = u.sigma();

  const int n_base = std::max(space.max_degree() + 8, 10);
  double err_phi2 = 0.0, err_sigma2 = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& T = mesh.element(e);
    const LocalQuad quad = composite_graded_rule(T.length, {0.0, T.length}, n_base, 20, 0.5);
    for (int i = 0; i < quad.s.size(); ++i) {
      const double s = quad.s[i];
      const Eigen::Vector2d x = T.point_at(s);
      const double arc = T.arclength0 + s;
      const double dphi = phi.eval(e, s) - phi_ref(x, arc);
      const double dsigma = sigma.eval(e, s) - sigma_ref(x, arc);
      err_phi2 += quad.w[i] * dphi * dphi;
      err_sigma2 += quad.w[i] * dsigma * dsigma;
    }
  }

  const Eigen::VectorXd hat = u.sigma_hat();
  if (hat.size() != sigma_hat_ref.size())
    throw std::invalid_argument("l2_errors: sigma_hat reference has wrong length");

  L2Errors out;
  out.phi = std::sqrt(err_phi2);
  out.sigma = std::sqrt(err_sigma2);
  out.nodes_scaled = (hat - sigma_hat_ref).norm() / std::sqrt(double(hat.size()));
  return out;
}

double l2_distance(const PwPoly& a, const PwPoly& b) {
  const Mesh& mesh = *a.space->mesh();
  if (b.space->mesh().get() != &mesh)
    throw std::invalid_argument("l2_distance: meshes differ");
  double acc = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.element(e).length;
    const LocalPoly pa = element_poly(a, e);
    const LocalPoly pb = element_poly(b, e);
    acc += LocalPoly::inner(pa, pa, h) - 2.0 * LocalPoly::inner(pa, pb, h) +
           LocalPoly::inner(pb, pb, h);
  }
  return std::sqrt(std::max(acc, 0.0));
}

} // namespace uwdpg
