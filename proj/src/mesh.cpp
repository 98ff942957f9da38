#include "uwdpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace uwdpg {

namespace {

// Proper intersection test for segments (p1,p2) and (q1,q2) that do not share
// an endpoint.  Used to reject self-intersecting polygons.
bool segments_cross(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                    const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  auto orient = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c) {
    double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    return (v > 0.0) - (v < 0.0);
  };
  int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
  int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  // Collinear overlap also counts as a crossing.
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

} // namespace

Mesh::Mesh(CurveKind kind, std::vector<Eigen::Vector2d> nodes)
    : kind_(kind), nodes_(std::move(nodes)) {
  const int n_nodes = static_cast<int>(nodes_.size());
  const int n_elem = kind_ == CurveKind::OpenInterval ? n_nodes - 1 : n_nodes;
  elements_.reserve(n_elem);
  double arclen = 0.0;
  for (int e = 0; e < n_elem; ++e) {
    Element el;
    el.start = e;
    el.end = (e + 1) % n_nodes;
    el.a = nodes_[el.start];
    el.b = nodes_[el.end];
    el.length = (el.b - el.a).norm();
    el.arclength0 = arclen;
    if (!(el.length > 0.0))
      throw std::invalid_argument("Mesh: zero-length element");
    arclen += el.length;
    elements_.push_back(el);
  }
  total_length_ = arclen;
}

double Mesh::h_min() const {
  double h = elements_.front().length;
  for (const auto& el : elements_) h = std::min(h, el.length);
  return h;
}

double Mesh::h_max() const {
  double h = 0.0;
  for (const auto& el : elements_) h = std::max(h, el.length);
  return h;
}

double Mesh::node_arclength(int j) const {
  const int n = element_count();
  if (kind_ == CurveKind::OpenInterval && j == node_count() - 1)
    return total_length_;
  (void)n;
  return elements_[j].arclength0;
}

int Mesh::element_before(int j) const {
  if (kind_ == CurveKind::OpenInterval)
    return j == 0 ? -1 : j - 1;
  return (j + element_count() - 1) % element_count();
}

int Mesh::element_after(int j) const {
  if (kind_ == CurveKind::OpenInterval)
    return j == node_count() - 1 ? -1 : j;
  return j;
}

bool Mesh::touching(int e1, int e2) const {
  const Element& a = elements_[e1];
  const Element& b = elements_[e2];
  return a.start == b.start || a.start == b.end || a.end == b.start || a.end == b.end;
}

MeshPtr build_interval_mesh(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int n) {
  if (n < 1) throw std::invalid_argument("build_interval_mesh: need n >= 1");
  const double len = (b - a).norm();
  if (!(len > 0.0)) throw std::invalid_argument("build_interval_mesh: endpoints coincide");
  if (!(len / 4.0 < 1.0))
    throw std::invalid_argument(
        "build_interval_mesh: segment capacity |b-a|/4 must be < 1; rescale the geometry");
  std::vector<Eigen::Vector2d> nodes(n + 1);
  for (int j = 0; j <= n; ++j)
    nodes[j] = a + (static_cast<double>(j) / n) * (b - a);
  return MeshPtr(new Mesh(CurveKind::OpenInterval, std::move(nodes)));
}

MeshPtr build_polygon_mesh(const std::vector<Eigen::Vector2d>& vertices, int per_edge) {
  const int nv = static_cast<int>(vertices.size());
  if (nv < 3) throw std::invalid_argument("build_polygon_mesh: need >= 3 vertices");
  if (per_edge < 1) throw std::invalid_argument("build_polygon_mesh: need per_edge >= 1");

  double area2 = 0.0;
  for (int i = 0; i < nv; ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % nv];
    area2 += p.x() * q.y() - q.x() * p.y();
  }
  if (!(area2 > 0.0))
    throw std::invalid_argument("build_polygon_mesh: vertices must be positively oriented");

  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      // Skip edge pairs sharing a vertex (adjacent, including the wrap-around).
      if (j == i || (j + 1) % nv == i || (i + 1) % nv == j) continue;
      if (segments_cross(vertices[i], vertices[(i + 1) % nv], vertices[j],
                         vertices[(j + 1) % nv]))
        throw std::invalid_argument("build_polygon_mesh: polygon is self-intersecting");
    }

  // Sufficient capacity guard: an enclosing disk of radius < 1 exists.
  Eigen::Vector2d lo = vertices[0], hi = vertices[0];
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  double radius = 0.0;
  for (const auto& v : vertices) radius = std::max(radius, (v - center).norm());
  if (!(radius < 1.0))
    throw std::invalid_argument(
        "build_polygon_mesh: polygon does not fit in a disk of radius < 1; rescale the geometry");

  std::vector<Eigen::Vector2d> nodes;
  nodes.reserve(static_cast<size_t>(nv) * per_edge);
  for (int i = 0; i < nv; ++i) {
    const auto& p = vertices[i];
    const auto& q = vertices[(i + 1) % nv];
    for (int k = 0; k < per_edge; ++k)
      nodes.push_back(p + (static_cast<double>(k) / per_edge) * (q - p));
  }
  return MeshPtr(new Mesh(CurveKind::ClosedPolygon, std::move(nodes)));
}

MeshPtr refine_halve(const Mesh& mesh, const std::vector<int>& marked) {
  std::set<int> mark;
  for (int e : marked) {
    if (e < 0 || e >= mesh.element_count())
      throw std::invalid_argument("refine_halve: element index out of range");
    if (!mark.insert(e).second)
      throw std::invalid_argument("refine_halve: duplicate element index");
  }
  std::vector<Eigen::Vector2d> nodes;
  nodes.reserve(mesh.node_count() + mark.size());
  for (int e = 0; e < mesh.element_count(); ++e) {
    const Element& el = mesh.element(e);
    nodes.push_back(el.a);
    if (mark.count(e)) nodes.push_back(0.5 * (el.a + el.b));
  }
  if (mesh.kind() == CurveKind::OpenInterval)
    nodes.push_back(mesh.node(mesh.node_count() - 1));
  return MeshPtr(new Mesh(mesh.kind(), std::move(nodes)));
}

Eigen::VectorXd jump_vector(const Mesh& mesh, const Eigen::VectorXd& v_start,
                            const Eigen::VectorXd& v_end) {
  const int n = mesh.element_count();
  if (v_start.size() != n || v_end.size() != n)
    throw std::invalid_argument("jump_vector: one value pair per element required");
  Eigen::VectorXd jump(mesh.node_count());
  for (int j = 0; j < mesh.node_count(); ++j) {
    double v = 0.0;
    if (int e = mesh.element_after(j); e >= 0) v += v_start[e];
    if (int e = mesh.element_before(j); e >= 0) v -= v_end[e];
    jump[j] = v;
  }
  return jump;
}

} // namespace uwdpg
