// Piecewise-straight boundary meshes: open intervals and closed polygons in R^2.
#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace uwdpg {

enum class CurveKind { OpenInterval, ClosedPolygon };

// One straight element.  Local arclength s runs from 0 at node `start` to
// `length` at node `end`; the positive orientation of the curve is start->end.
struct Element {
  Eigen::Vector2d a;       // start point
  Eigen::Vector2d b;       // end point
  int start = -1;          // global node index of a
  int end = -1;            // global node index of b
  double length = 0.0;
  double arclength0 = 0.0; // arclength of the start point along the curve

  Eigen::Vector2d tangent() const { return (b - a) / length; }
  Eigen::Vector2d point_at(double s) const { return a + (s / length) * (b - a); }
};

// Immutable after construction; safe to share between solver stages.
class Mesh {
public:
  CurveKind kind() const { return kind_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int element_count() const { return static_cast<int>(elements_.size()); }
  const Eigen::Vector2d& node(int j) const { return nodes_[j]; }
  const Element& element(int e) const { return elements_[e]; }
  const std::vector<Element>& elements() const { return elements_; }

  double total_length() const { return total_length_; }
  double h_min() const;
  double h_max() const;
  double node_arclength(int j) const;

  // Element owning node j as its end/start point; -1 past an open endpoint.
  int element_before(int j) const;
  int element_after(int j) const;

  // True when the two elements share at least one node.
  bool touching(int e1, int e2) const;

private:
  friend std::shared_ptr<const Mesh> build_interval_mesh(const Eigen::Vector2d&,
                                                         const Eigen::Vector2d&, int);
  friend std::shared_ptr<const Mesh> build_polygon_mesh(const std::vector<Eigen::Vector2d>&,
                                                        int);
  friend std::shared_ptr<const Mesh> refine_halve(const Mesh&, const std::vector<int>&);

  Mesh(CurveKind kind, std::vector<Eigen::Vector2d> nodes);

  CurveKind kind_;
  std::vector<Eigen::Vector2d> nodes_;
  std::vector<Element> elements_;
  double total_length_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

// n equal elements on the segment (a,b).  Requires n >= 1, 0 < |b-a| and
// |b-a|/4 < 1 (logarithmic capacity of a segment is a quarter of its length;
// the single-layer operator must stay elliptic).
MeshPtr build_interval_mesh(const Eigen::Vector2d& a, const Eigen::Vector2d& b, int n);

// Closed polygon through `vertices` (positively oriented, simple, >= 3
// vertices), each edge split into per_edge equal elements.  The polygon must
// fit in a disk of radius < 1 (sufficient capacity bound; rescale otherwise).
MeshPtr build_polygon_mesh(const std::vector<Eigen::Vector2d>& vertices, int per_edge);

// New mesh with every marked element split at its midpoint.  Unknown indices
// or duplicates are rejected; an empty set reproduces the mesh.
MeshPtr refine_halve(const Mesh& mesh, const std::vector<int>& marked);

// Jump vector of an elementwise function with one-sided limits v_start[e],
// v_end[e] on element e.  Entry j is the jump at node j: value after minus
// value before.  At the open endpoints the missing one-sided value drops out,
// so jump(first node) = value after and jump(last node) = -(value before).
Eigen::VectorXd jump_vector(const Mesh& mesh, const Eigen::VectorXd& v_start,
                            const Eigen::VectorXd& v_end);

} // namespace uwdpg
