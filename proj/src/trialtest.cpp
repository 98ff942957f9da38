#include "uwdpg/trialtest.hpp"

#include <stdexcept>
#include <utility>

namespace uwdpg {

TrialLayout::TrialLayout(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("TrialLayout: null space");
  n_field_ = space_->dim();
  n_nodes_ = space_->mesh()->node_count();
}

PwPoly TrialLayout::phi_part(const Eigen::VectorXd& u) const {
  return {space_, u.segment(0, n_field_)};
}

PwPoly TrialLayout::sigma_part(const Eigen::VectorXd& u) const {
  return {space_, u.segment(n_field_, n_field_)};
}

Eigen::VectorXd TrialLayout::hat_part(const Eigen::VectorXd& u) const {
  return u.segment(2 * n_field_, n_nodes_);
}

TestFunction zero_test_function(SpacePtr tau_space) {
  TestFunction w;
  w.tau = Eigen::VectorXd::Zero(tau_space->dim());
  w.v.assign(tau_space->mesh()->element_count(), LocalPoly::zero());
  w.tau_space = std::move(tau_space);
  return w;
}

LocalPoly phi_v_shape(double h) { return LocalPoly(Eigen::Vector3d(1.0, h, -0.5)); }

LocalPoly node_v_after(double h) { return LocalPoly::constant(1.0 / h); }

LocalPoly node_v_before(double h) { return LocalPoly(Eigen::Vector2d(-1.0 / h, -1.0)); }

double v_local_inner(const LocalPoly& p, const LocalPoly& q, double h) {
  return LocalPoly::inner(p.derivative(), q.derivative(), h) + h * p(0.0) * q(0.0);
}

double v_inner(const TestFunction& a, const TestFunction& b) {
  if (a.tau.size() != b.tau.size() || a.v.size() != b.v.size())
    throw std::invalid_argument("v_inner: test functions from different spaces");
  double acc = a.tau.dot(b.tau);
  const Mesh& mesh = *a.tau_space->mesh();
  for (int e = 0; e < mesh.element_count(); ++e)
    acc += v_local_inner(a.v[e], b.v[e], mesh.element(e).length);
  return acc;
}

TestFunction embed_test_function(const TestFunction& w, SpacePtr finer) {
  const std::vector<int> idx = embedding_indices(*w.tau_space, *finer);
  TestFunction out = zero_test_function(std::move(finer));
  for (int i = 0; i < w.tau.size(); ++i) out.tau[idx[i]] = w.tau[i];
  out.v = w.v;
  return out;
}

Eigen::VectorXd jump_vector(const Mesh& mesh, const std::vector<LocalPoly>& v) {
  Eigen::VectorXd vs(mesh.element_count()), ve(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    vs[e] = v[e](0.0);
    ve[e] = v[e](mesh.element(e).length);
  }
  return jump_vector(mesh, vs, ve);
}

double eval_b(const TrialLayout& lay, const Eigen::VectorXd& u, const TestFunction& w,
              const QuadPolicy& pol) {
  if (u.size() != lay.dim()) throw std::invalid_argument("eval_b: trial size mismatch");
  const Mesh& mesh = *lay.space()->mesh();
  const PwPoly phi = lay.phi_part(u);
  const PwPoly sigma = lay.sigma_part(u);
  const PwPoly tau{w.tau_space, w.tau};

  double b = phi_vtau_form(phi, tau, pol);

  if (mesh.kind() == CurveKind::ClosedPolygon) {
    double v_mean = 0.0;
    for (int e = 0; e < mesh.element_count(); ++e)
      v_mean += w.v[e].integral(mesh.element(e).length);
    b += phi.mean_integral() * v_mean;
  }

  for (int e = 0; e < mesh.element_count(); ++e) {
    const double h = mesh.element(e).length;
    const LocalPoly sig = element_poly(sigma, e);
    b += LocalPoly::inner(sig, element_poly(tau, e), h);
    b += LocalPoly::inner(sig, w.v[e].derivative(), h);
  }

  b += lay.hat_part(u).dot(jump_vector(mesh, w.v));
  return b;
}

TrialToTest::TrialToTest(TrialLayout layout, SpacePtr enriched, const QuadPolicy& pol)
    : layout_(std::move(layout)), enriched_(std::move(enriched)) {
  const PwPolySpace& trial = *layout_.space();
  if (!enriched_) throw std::invalid_argument("TrialToTest: null enriched space");
  B_ = phi_vtau_matrix(trial, *enriched_, pol);
  embed_ = embedding_indices(trial, *enriched_);
  closed_ = trial.mesh()->kind() == CurveKind::ClosedPolygon;

  phi_means_ = Eigen::VectorXd::Zero(trial.dim());
  for (int e = 0; e < trial.mesh()->element_count(); ++e)
    phi_means_[trial.index(e, 0)] = std::sqrt(trial.mesh()->element(e).length);
}

TestFunction TrialToTest::theta_phi(int i) const {
  TestFunction w = zero_test_function(enriched_);
  w.tau = B_.row(i).transpose();
  if (closed_ && phi_means_[i] != 0.0) {
    const Mesh& mesh = *layout_.space()->mesh();
    for (int e = 0; e < mesh.element_count(); ++e)
      w.v[e] = phi_v_shape(mesh.element(e).length).scaled(phi_means_[i]);
  }
  return w;
}

TestFunction TrialToTest::theta_sigma(int i) const {
  TestFunction w = zero_test_function(enriched_);
  w.tau[embed_[i]] = 1.0;
  const PwPolySpace& trial = *layout_.space();
  for (int e = 0; e < trial.mesh()->element_count(); ++e) {
    const int k = i - trial.offset(e);
    if (k >= 0 && k <= trial.degree(e)) {
      w.v[e] = trial.basis_local_poly(e, k).antiderivative();
      break;
    }
  }
  return w;
}

TestFunction TrialToTest::theta_node(int j) const {
  TestFunction w = zero_test_function(enriched_);
  const Mesh& mesh = *layout_.space()->mesh();
  const int after = mesh.element_after(j);
  const int before = mesh.element_before(j);
  if (after >= 0) w.v[after] = node_v_after(mesh.element(after).length);
  if (before >= 0) w.v[before] = node_v_before(mesh.element(before).length);
  return w;
}

TestFunction TrialToTest::theta(const Eigen::VectorXd& u) const {
  if (u.size() != layout_.dim()) throw std::invalid_argument("theta: trial size mismatch");
  const Mesh& mesh = *layout_.space()->mesh();
  const Eigen::VectorXd u_phi = u.segment(0, layout_.n_field());
  const PwPoly sigma = layout_.sigma_part(u);
  const Eigen::VectorXd u_hat = layout_.hat_part(u);

  TestFunction w = zero_test_function(enriched_);
  w.tau = B_.transpose() * u_phi;
  for (int i = 0; i < layout_.n_field(); ++i) w.tau[embed_[i]] += sigma.coeff[i];

  const double phi_mean = closed_ ? phi_means_.dot(u_phi) : 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& T = mesh.element(e);
    LocalPoly acc = antiderivative_on_element(sigma, e);
    if (u_hat[T.start] != 0.0) acc += node_v_after(T.length).scaled(u_hat[T.start]);
    if (u_hat[T.end] != 0.0) acc += node_v_before(T.length).scaled(u_hat[T.end]);
    if (phi_mean != 0.0) acc += phi_v_shape(T.length).scaled(phi_mean);
    w.v[e] = acc;
  }
  return w;
}

} // namespace uwdpg
