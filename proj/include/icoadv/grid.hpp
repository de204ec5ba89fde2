#ifndef ICOADV_GRID_HPP_
#define ICOADV_GRID_HPP_

#include "icoadv/geometry.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace icoadv {

inline constexpr double kEarthRadius = 6.371229e6;  // m

struct GridVertex {
  Vector3d pos;  // unit vector
  double lon = 0.0;
  double lat = 0.0;
};

struct GridCell {
  std::array<int, 3> vertex{};   // counterclockwise seen from outside
  std::array<int, 3> edge{};     // local edge k joins vertex[k] and vertex[(k+1)%3]
  std::array<int, 3> sign{};     // +1 if the edge normal points out of this cell
  std::array<int, 3> neighbor{}; // cell across edge[k]
  Vector3d center;               // normalized vertex barycenter
  double area = 0.0;             // m^2
  double inradius = 0.0;         // m, planar estimate 2A/perimeter
  TangentFrame<double> frame;
};

struct GridEdge {
  std::array<int, 2> vertex{};  // ordered so that (normal x mid) points vertex[0] -> vertex[1]
  std::array<int, 2> cell{};    // owner (lower index), neighbor
  double length = 0.0;          // m
  Vector3d mid;                 // unit vector
  Vector3d normal;              // unit, tangent at mid, owner -> neighbor
  Vector3d tangent;             // mid x normal
};

/// Least-squares gradient weights of one cell: grad = W * (q_nb - q_self),
/// expressed in the cell's tangent frame (per meter).
struct LsqStencil {
  Eigen::Matrix<double, 2, 3> weights = Eigen::Matrix<double, 2, 3>::Zero();
  bool degenerate = false;
};

/// Geodesic triangulation of the sphere. Immutable after construction.
class SphereGrid {
 public:
  /// Build an RnBk grid: spherical icosahedron, edges split into n_r equal
  /// great-arc parts, then n_b rounds of 4-way bisection.
  static std::shared_ptr<const SphereGrid> build(int n_r, int n_b, double radius = kEarthRadius);

  /// Arbitrary closed triangulation (used for small hand-made test meshes).
  /// Faces are reoriented counterclockwise as needed.
  static std::shared_ptr<const SphereGrid> from_triangles(
      std::vector<Vector3d> vertices, std::vector<std::array<int, 3>> faces, double radius);

  int n_r() const { return n_r_; }
  int n_b() const { return n_b_; }
  double radius() const { return radius_; }

  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }

  const std::vector<GridVertex>& vertices() const { return vertices_; }
  const std::vector<GridCell>& cells() const { return cells_; }
  const std::vector<GridEdge>& edges() const { return edges_; }
  const std::vector<LsqStencil>& lsq() const { return lsq_; }

  const GridCell& cell(int j) const { return cells_[static_cast<std::size_t>(j)]; }
  const GridEdge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }

  /// Cell areas as a vector (m^2).
  const Eigen::VectorXd& areas() const { return areas_; }
  double total_area() const { return total_area_; }

 private:
  SphereGrid() = default;
  void finalize(std::vector<Vector3d> vertices, std::vector<std::array<int, 3>> faces);

  int n_r_ = 0;
  int n_b_ = 0;
  double radius_ = 1.0;
  std::vector<GridVertex> vertices_;
  std::vector<GridCell> cells_;
  std::vector<GridEdge> edges_;
  std::vector<LsqStencil> lsq_;
  Eigen::VectorXd areas_;
  double total_area_ = 0.0;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

struct GridMetrics {
  double min_cell_area_km2 = 0.0;
  double max_cell_area_km2 = 0.0;
  double global_edge_ratio = 0.0;    // max edge / min edge over the grid
  double triangle_edge_ratio = 0.0;  // max over cells of (max edge / min edge)
  double min_edge_km = 0.0;
  double max_edge_km = 0.0;
};

GridMetrics grid_metrics_report(const SphereGrid& grid);

/// Line-oriented text dump: header `GRID n_r n_b radius`, then VERTICES,
/// CELLS and EDGES sections.
void write_grid(std::ostream& os, const SphereGrid& grid);

}  // namespace icoadv

#endif  // ICOADV_GRID_HPP_
