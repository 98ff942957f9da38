#include "uwdpg/polyspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace uwdpg {

namespace {

// Gauss-Legendre nodes by Newton iteration on P_n, weights 2/((1-t^2) P_n'^2).
QuadRule compute_gauss(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, then Newton.
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) {
        // one polishing step
        p0 = 1.0;
        p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        t -= p1 / dp;
        break;
      }
    }
    rule.nodes[n - 1 - i] = t;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

} // namespace

const QuadRule& gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: need n >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

Eigen::VectorXd legendre_values(int kmax, double t) {
  Eigen::VectorXd v(kmax + 1);
  v[0] = 1.0;
  if (kmax >= 1) v[1] = t;
  for (int k = 1; k < kmax; ++k)
    v[k + 1] = ((2 * k + 1) * t * v[k] - k * v[k - 1]) / (k + 1);
  return v;
}

void legendre_values_derivatives(int kmax, double t, Eigen::VectorXd& val,
                                 Eigen::VectorXd& der) {
  val = legendre_values(kmax, t);
  der.resize(kmax + 1);
  der[0] = 0.0;
  if (kmax >= 1) der[1] = 1.0;
  // P'_{k+1} = P'_{k-1} + (2k+1) P_k
  for (int k = 1; k < kmax; ++k) der[k + 1] = der[k - 1] + (2 * k + 1) * val[k];
}

double LocalPoly::operator()(double s) const {
  double v = 0.0;
  for (int i = degree(); i >= 0; --i) v = v * s + c_[i];
  return v;
}

LocalPoly LocalPoly::derivative() const {
  if (degree() == 0) return zero();
  Eigen::VectorXd d(degree());
  for (int i = 1; i <= degree(); ++i) d[i - 1] = i * c_[i];
  return LocalPoly(std::move(d));
}

LocalPoly LocalPoly::antiderivative() const {
  Eigen::VectorXd a(c_.size() + 1);
  a[0] = 0.0;
  for (int i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / (i + 1);
  return LocalPoly(std::move(a));
}

double LocalPoly::integral(double h) const {
  double v = 0.0;
  double hp = h;
  for (int i = 0; i < c_.size(); ++i) {
    v += c_[i] * hp / (i + 1);
    hp *= h;
  }
  return v;
}

LocalPoly& LocalPoly::operator+=(const LocalPoly& other) {
  if (other.c_.size() > c_.size()) c_.conservativeResizeLike(Eigen::VectorXd::Zero(other.c_.size()));
  c_.head(other.c_.size()) += other.c_;
  return *this;
}

double LocalPoly::inner(const LocalPoly& p, const LocalPoly& q, double h) {
  // sum_{i,j} p_i q_j h^{i+j+1}/(i+j+1)
  double v = 0.0;
  for (int i = 0; i < p.c_.size(); ++i) {
    if (p.c_[i] == 0.0) continue;
    double hp = std::pow(h, i + 1);
    for (int j = 0; j < q.c_.size(); ++j) {
      v += p.c_[i] * q.c_[j] * hp / (i + j + 1);
      hp *= h;
    }
  }
  return v;
}

namespace {
std::vector<int> uniform_degrees(const MeshPtr& mesh, int degree) {
  if (!mesh) throw std::invalid_argument("PwPolySpace: null mesh");
  if (degree < 0) throw std::invalid_argument("PwPolySpace: negative degree");
  return std::vector<int>(mesh->element_count(), degree);
}
} // namespace

PwPolySpace::PwPolySpace(MeshPtr mesh, int uniform_degree)
    : PwPolySpace(mesh, uniform_degrees(mesh, uniform_degree)) {}

PwPolySpace::PwPolySpace(MeshPtr mesh, std::vector<int> degrees) : mesh_(std::move(mesh)) {
  if (!mesh_) throw std::invalid_argument("PwPolySpace: null mesh");
  if (static_cast<int>(degrees.size()) != mesh_->element_count())
    throw std::invalid_argument("PwPolySpace: one degree per element required");
  degrees_ = std::move(degrees);
  offsets_.resize(degrees_.size());
  dim_ = 0;
  for (size_t e = 0; e < degrees_.size(); ++e) {
    if (degrees_[e] < 0) throw std::invalid_argument("PwPolySpace: negative degree");
    offsets_[e] = dim_;
    dim_ += degrees_[e] + 1;
    max_degree_ = std::max(max_degree_, degrees_[e]);
  }
}

double PwPolySpace::basis_value(int e, int k, double s) const {
  const double h = mesh_->element(e).length;
  const double t = 2.0 * s / h - 1.0;
  return std::sqrt((2 * k + 1) / h) * legendre_values(k, t)[k];
}

double PwPolySpace::basis_derivative(int e, int k, double s) const {
  const double h = mesh_->element(e).length;
  const double t = 2.0 * s / h - 1.0;
  Eigen::VectorXd val, der;
  legendre_values_derivatives(k, t, val, der);
  return std::sqrt((2 * k + 1) / h) * der[k] * 2.0 / h;
}

double PwPolySpace::basis_at_start(int e, int k) const {
  const double h = mesh_->element(e).length;
  return std::sqrt((2 * k + 1) / h) * (k % 2 == 0 ? 1.0 : -1.0);
}

double PwPolySpace::basis_at_end(int e, int k) const {
  const double h = mesh_->element(e).length;
  return std::sqrt((2 * k + 1) / h);
}

LocalPoly PwPolySpace::basis_local_poly(int e, int k) const {
  const double h = mesh_->element(e).length;
  // Legendre recurrence on polynomials in t = 2s/h - 1.
  Eigen::VectorXd t_poly(2);
  t_poly << -1.0, 2.0 / h;
  LocalPoly p0 = LocalPoly::constant(1.0), p1 = LocalPoly(t_poly);
  LocalPoly pk = k == 0 ? p0 : p1;
  for (int m = 1; m < k; ++m) {
    // p2 = ((2m+1) t p1 - m p0)/(m+1), with t-multiplication done on coefficients
    Eigen::VectorXd c1 = p1.coeffs();
    Eigen::VectorXd tc = Eigen::VectorXd::Zero(c1.size() + 1);
    tc.head(c1.size()) += t_poly[0] * c1;
    tc.tail(c1.size()) += t_poly[1] * c1;
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(tc.size());
    c2 = (2 * m + 1) * tc / (m + 1);
    c2.head(p0.coeffs().size()) -= static_cast<double>(m) / (m + 1) * p0.coeffs();
    p0 = p1;
    p1 = LocalPoly(std::move(c2));
    pk = p1;
  }
  return pk.scaled(std::sqrt((2 * k + 1) / h));
}

SpacePtr make_space(MeshPtr mesh, int uniform_degree) {
  return std::make_shared<const PwPolySpace>(std::move(mesh), uniform_degree);
}

SpacePtr make_space(MeshPtr mesh, std::vector<int> degrees) {
  return std::make_shared<const PwPolySpace>(std::move(mesh), std::move(degrees));
}

double PwPoly::eval(int e, double s) const {
  const double h = space->mesh()->element(e).length;
  const double t = 2.0 * s / h - 1.0;
  const int p = space->degree(e);
  Eigen::VectorXd leg = legendre_values(p, t);
  double v = 0.0;
  for (int k = 0; k <= p; ++k)
    v += coeff[space->index(e, k)] * std::sqrt((2 * k + 1) / h) * leg[k];
  return v;
}

double PwPoly::eval_derivative(int e, double s) const {
  const double h = space->mesh()->element(e).length;
  const double t = 2.0 * s / h - 1.0;
  const int p = space->degree(e);
  Eigen::VectorXd val, der;
  legendre_values_derivatives(p, t, val, der);
  double v = 0.0;
  for (int k = 0; k <= p; ++k)
    v += coeff[space->index(e, k)] * std::sqrt((2 * k + 1) / h) * der[k] * 2.0 / h;
  return v;
}

double PwPoly::start_value(int e) const {
  double v = 0.0;
  for (int k = 0; k <= space->degree(e); ++k)
    v += coeff[space->index(e, k)] * space->basis_at_start(e, k);
  return v;
}

double PwPoly::end_value(int e) const {
  double v = 0.0;
  for (int k = 0; k <= space->degree(e); ++k)
    v += coeff[space->index(e, k)] * space->basis_at_end(e, k);
  return v;
}

double PwPoly::mean_integral() const {
  // <p, 1> = sum_e coeff(e,0) sqrt(h_e)
  double v = 0.0;
  const Mesh& mesh = *space->mesh();
  for (int e = 0; e < mesh.element_count(); ++e)
    v += coeff[space->index(e, 0)] * std::sqrt(mesh.element(e).length);
  return v;
}

double eval(const PwPoly& p, int e, double s) { return p.eval(e, s); }

PwPoly l2_project(const SpacePtr& space, const ScalarField& g, int extra_points) {
  if (extra_points < 0) throw std::invalid_argument("l2_project: negative extra_points");
  PwPoly out(space);
  const Mesh& mesh = *space->mesh();
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& el = mesh.element(e);
    const int p = space->degree(e);
    const QuadRule& rule = gauss_rule(p + 1 + extra_points);
    const double half = el.length / 2.0;
    for (int q = 0; q < rule.nodes.size(); ++q) {
      const double s = half * (1.0 + rule.nodes[q]);
      const double gv = g(el.point_at(s), el.arclength0 + s);
      const Eigen::VectorXd leg = legendre_values(p, rule.nodes[q]);
      for (int k = 0; k <= p; ++k)
        out.coeff[space->index(e, k)] +=
            half * rule.weights[q] * gv * std::sqrt((2 * k + 1) / el.length) * leg[k];
    }
  }
  return out;
}

LocalPoly element_poly(const PwPoly& p, int e) {
  LocalPoly acc;
  for (int k = 0; k <= p.space->degree(e); ++k) {
    const double c = p.coeff[p.space->index(e, k)];
    if (c != 0.0) acc += p.space->basis_local_poly(e, k).scaled(c);
  }
  return acc;
}

LocalPoly antiderivative_on_element(const PwPoly& p, int e) {
  return element_poly(p, e).antiderivative();
}

Eigen::VectorXd jump_vector(const PwPoly& v) {
  const Mesh& mesh = *v.space->mesh();
  Eigen::VectorXd vs(mesh.element_count()), ve(mesh.element_count());
  for (int e = 0; e < mesh.element_count(); ++e) {
    vs[e] = v.start_value(e);
    ve[e] = v.end_value(e);
  }
  return jump_vector(mesh, vs, ve);
}

LocalQuad local_gauss(double h, int n) {
  const QuadRule& rule = gauss_rule(n);
  LocalQuad out;
  out.s = (h / 2.0) * (rule.nodes.array() + 1.0);
  out.w = (h / 2.0) * rule.weights;
  return out;
}

namespace {

void append_piece(double alpha, double beta, int n, std::vector<double>& s,
                  std::vector<double>& w) {
  const QuadRule& rule = gauss_rule(n);
  const double half = 0.5 * (beta - alpha);
  for (int q = 0; q < rule.nodes.size(); ++q) {
    s.push_back(alpha + half * (1.0 + rule.nodes[q]));
    w.push_back(half * rule.weights[q]);
  }
}

void append_graded(double alpha, double beta, bool sing_left, bool sing_right, int n,
                   int levels, double ratio, std::vector<double>& s, std::vector<double>& w) {
  if (beta - alpha <= 0.0) return;
  if (sing_left && sing_right) {
    const double mid = 0.5 * (alpha + beta);
    append_graded(alpha, mid, true, false, n, levels, ratio, s, w);
    append_graded(mid, beta, false, true, n, levels, ratio, s, w);
    return;
  }
  if (!sing_left && !sing_right) {
    append_piece(alpha, beta, n, s, w);
    return;
  }
  const double len = beta - alpha;
  double frac = 1.0;
  for (int j = 0; j < levels; ++j) {
    const double next = frac * ratio;
    if (sing_right)
      append_piece(beta - frac * len, beta - next * len, n, s, w);
    else
      append_piece(alpha + next * len, alpha + frac * len, n, s, w);
    frac = next;
  }
  if (sing_right)
    append_piece(beta - frac * len, beta, n, s, w);
  else
    append_piece(alpha, alpha + frac * len, n, s, w);
}

} // namespace

LocalQuad composite_graded_rule(double h, std::vector<double> singular, int n_base,
                                int levels, double ratio) {
  if (n_base < 1 || levels < 1 || !(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("composite_graded_rule: bad parameters");
  const double snap = 1e-12 * h;
  for (double& p : singular) p = std::clamp(p, 0.0, h);
  std::sort(singular.begin(), singular.end());
  std::vector<double> breaks{0.0};
  for (double p : singular)
    if (p > breaks.back() + snap && p < h - snap) breaks.push_back(p);
  breaks.push_back(h);
  auto is_singular = [&](double pos) {
    for (double p : singular)
      if (std::abs(p - pos) <= snap) return true;
    return false;
  };
  std::vector<double> s, w;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const bool left = is_singular(breaks[i]);
    const bool right = is_singular(breaks[i + 1]);
    append_graded(breaks[i], breaks[i + 1], left, right, n_base, levels, ratio, s, w);
  }
  LocalQuad out;
  out.s = Eigen::Map<Eigen::VectorXd>(s.data(), s.size());
  out.w = Eigen::Map<Eigen::VectorXd>(w.data(), w.size());
  return out;
}

std::vector<int> embedding_indices(const PwPolySpace& coarse, const PwPolySpace& fine) {
  if (coarse.mesh()->element_count() != fine.mesh()->element_count())
    throw std::invalid_argument("embedding_indices: meshes differ");
  std::vector<int> map(coarse.dim());
  for (int e = 0; e < coarse.mesh()->element_count(); ++e) {
    if (coarse.degree(e) > fine.degree(e))
      throw std::invalid_argument("embedding_indices: fine space has lower degree");
    for (int k = 0; k <= coarse.degree(e); ++k)
      map[coarse.index(e, k)] = fine.index(e, k);
  }
  return map;
}

} // namespace uwdpg
