#include "icoadv/grid.hpp"

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace icoadv {

namespace {

std::uint64_t pair_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

struct Icosahedron {
  std::vector<Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
};

Icosahedron make_icosahedron() {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  Icosahedron ico;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      ico.vertices.emplace_back(0.0, s1, s2 * phi);
      ico.vertices.emplace_back(s1, s2 * phi, 0.0);
      ico.vertices.emplace_back(s2 * phi, 0.0, s1);
    }
  }
  for (auto& v : ico.vertices) v.normalize();
  // Faces are the vertex triples that are pairwise nearest neighbours.
  const int n = static_cast<int>(ico.vertices.size());
  double edge = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edge = std::min(edge, (ico.vertices[i] - ico.vertices[j]).norm());
  auto adjacent = [&](int i, int j) {
    return std::abs((ico.vertices[i] - ico.vertices[j]).norm() - edge) < 1e-9;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        if (adjacent(i, j) && adjacent(j, k) && adjacent(i, k)) ico.faces.push_back({i, j, k});
  return ico;
}

// Split every icosahedron edge into n equal great-arc parts and triangulate
// each face accordingly.
void split_root(int n, std::vector<Vector3d>& verts, std::vector<std::array<int, 3>>& faces) {
  if (n == 1) return;
  std::unordered_map<std::uint64_t, std::vector<int>> edge_points;
  auto edge_point = [&](int u, int v, int m) -> int {
    if (m == 0) return u;
    if (m == n) return v;
    const int lo = std::min(u, v);
    const int hi = std::max(u, v);
    auto [it, inserted] = edge_points.try_emplace(pair_key(lo, hi));
    if (inserted) {
      it->second.resize(static_cast<std::size_t>(n + 1));
      for (int k = 1; k < n; ++k) {
        it->second[static_cast<std::size_t>(k)] = static_cast<int>(verts.size());
        verts.push_back(slerp<double>(verts[lo], verts[hi], static_cast<double>(k) / n));
      }
    }
    const int from_lo = (u == lo) ? m : n - m;
    return it->second[static_cast<std::size_t>(from_lo)];
  };

  std::vector<std::array<int, 3>> out;
  out.reserve(faces.size() * static_cast<std::size_t>(n * n));
  for (const auto& f : faces) {
    const int a = f[0], b = f[1], c = f[2];
    // rows[k][j]: k steps from a, j steps towards c within the row
    std::vector<std::vector<int>> rows(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
      auto& row = rows[static_cast<std::size_t>(k)];
      row.resize(static_cast<std::size_t>(k + 1));
      for (int j = 0; j <= k; ++j) {
        int idx;
        if (k == 0) {
          idx = a;
        } else if (j == 0) {
          idx = edge_point(a, b, k);
        } else if (j == k) {
          idx = edge_point(a, c, k);
        } else if (k == n) {
          idx = edge_point(b, c, j);
        } else {
          const Vector3d start = verts[static_cast<std::size_t>(edge_point(a, b, k))];
          const Vector3d end = verts[static_cast<std::size_t>(edge_point(a, c, k))];
          idx = static_cast<int>(verts.size());
          verts.push_back(slerp<double>(start, end, static_cast<double>(j) / k));
        }
        row[static_cast<std::size_t>(j)] = idx;
      }
    }
    for (int k = 0; k < n; ++k) {
      const auto& r0 = rows[static_cast<std::size_t>(k)];
      const auto& r1 = rows[static_cast<std::size_t>(k + 1)];
      for (int j = 0; j <= k; ++j) {
        out.push_back({r0[j], r1[j], r1[j + 1]});
        if (j < k) out.push_back({r0[j], r1[j + 1], r0[j + 1]});
      }
    }
  }
  faces = std::move(out);
}

void bisect(std::vector<Vector3d>& verts, std::vector<std::array<int, 3>>& faces) {
  std::unordered_map<std::uint64_t, int> mids;
  mids.reserve(faces.size() * 2);
  auto midpoint = [&](int u, int v) {
    auto [it, inserted] = mids.try_emplace(pair_key(u, v), 0);
    if (inserted) {
      it->second = static_cast<int>(verts.size());
      const Vector3d& pu = verts[static_cast<std::size_t>(std::min(u, v))];
      const Vector3d& pv = verts[static_cast<std::size_t>(std::max(u, v))];
      verts.push_back((pu + pv).normalized());
    }
    return it->second;
  };
  std::vector<std::array<int, 3>> out;
  out.reserve(faces.size() * 4);
  for (const auto& f : faces) {
    const int ab = midpoint(f[0], f[1]);
    const int bc = midpoint(f[1], f[2]);
    const int ca = midpoint(f[2], f[0]);
    out.push_back({f[0], ab, ca});
    out.push_back({ab, f[1], bc});
    out.push_back({ca, bc, f[2]});
    out.push_back({ab, bc, ca});
  }
  faces = std::move(out);
}

LsqStencil make_lsq(const SphereGrid& grid, const GridCell& c) {
  Eigen::Matrix<double, 3, 2> a;
  for (int k = 0; k < 3; ++k) {
    const Vector3d& p = grid.cell(c.neighbor[k]).center;
    a.row(k) = grid.radius() * c.frame.project(p).transpose();
  }
  const Eigen::Matrix2d normal = a.transpose() * a;
  LsqStencil s;
  if (std::abs(normal.determinant()) <= 1e-12 * normal.trace() * normal.trace()) {
    s.degenerate = true;
    return s;
  }
  s.weights = normal.inverse() * a.transpose();
  return s;
}

}  // namespace

std::shared_ptr<const SphereGrid> SphereGrid::build(int n_r, int n_b, double radius) {
  if (n_r < 1) throw std::invalid_argument("build_grid: n_r must be >= 1");
  if (n_b < 0) throw std::invalid_argument("build_grid: n_b must be >= 0");
  if (!(radius > 0.0)) throw std::invalid_argument("build_grid: radius must be positive");
  Icosahedron ico = make_icosahedron();
  split_root(n_r, ico.vertices, ico.faces);
  for (int b = 0; b < n_b; ++b) bisect(ico.vertices, ico.faces);
  auto grid = std::shared_ptr<SphereGrid>(new SphereGrid());
  grid->n_r_ = n_r;
  grid->n_b_ = n_b;
  grid->radius_ = radius;
  grid->finalize(std::move(ico.vertices), std::move(ico.faces));
  return grid;
}

std::shared_ptr<const SphereGrid> SphereGrid::from_triangles(
    std::vector<Vector3d> vertices, std::vector<std::array<int, 3>> faces, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("from_triangles: radius must be positive");
  for (auto& v : vertices) v.normalize();
  auto grid = std::shared_ptr<SphereGrid>(new SphereGrid());
  grid->radius_ = radius;
  grid->finalize(std::move(vertices), std::move(faces));
  return grid;
}

void SphereGrid::finalize(std::vector<Vector3d> verts, std::vector<std::array<int, 3>> faces) {
  vertices_.resize(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const auto ll = lonlat_of(verts[i]);
    vertices_[i] = {verts[i], ll.lon, ll.lat};
  }

  const std::size_t nc = faces.size();
  cells_.resize(nc);
  for (std::size_t j = 0; j < nc; ++j) {
    auto f = faces[j];
    const Vector3d& a = verts[static_cast<std::size_t>(f[0])];
    const Vector3d& b = verts[static_cast<std::size_t>(f[1])];
    const Vector3d& c = verts[static_cast<std::size_t>(f[2])];
    if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(f[1], f[2]);
    GridCell& cell = cells_[j];
    cell.vertex = f;
    cell.center = (a + b + c).normalized();
    cell.area = spherical_triangle_area(a, b, c) * radius_ * radius_;
    cell.frame = TangentFrame<double>::at(cell.center);
  }

  std::unordered_map<std::uint64_t, int> edge_of;
  edge_of.reserve(nc * 2);
  edges_.clear();
  edges_.reserve(nc * 3 / 2);
  for (std::size_t j = 0; j < nc; ++j) {
    GridCell& cell = cells_[j];
    for (int k = 0; k < 3; ++k) {
      const int u = cell.vertex[static_cast<std::size_t>(k)];
      const int v = cell.vertex[static_cast<std::size_t>((k + 1) % 3)];
      auto [it, inserted] = edge_of.try_emplace(pair_key(u, v), static_cast<int>(edges_.size()));
      if (inserted) {
        GridEdge e;
        e.vertex = {u, v};
        e.cell = {static_cast<int>(j), -1};
        edges_.push_back(e);
        cell.sign[static_cast<std::size_t>(k)] = 1;
      } else {
        GridEdge& e = edges_[static_cast<std::size_t>(it->second)];
        if (e.cell[1] != -1) throw std::invalid_argument("grid: edge shared by more than two cells");
        e.cell[1] = static_cast<int>(j);
        cell.sign[static_cast<std::size_t>(k)] = -1;
      }
      cell.edge[static_cast<std::size_t>(k)] = it->second;
    }
  }

  for (auto& e : edges_) {
    if (e.cell[1] < 0) throw std::invalid_argument("grid: surface is not closed");
    const Vector3d& p0 = verts[static_cast<std::size_t>(e.vertex[0])];
    const Vector3d& p1 = verts[static_cast<std::size_t>(e.vertex[1])];
    e.mid = (p0 + p1).normalized();
    e.length = arc_angle(p0, p1) * radius_;
    Vector3d n = p0.cross(p1).normalized();
    const Vector3d& c_own = cells_[static_cast<std::size_t>(e.cell[0])].center;
    const Vector3d& c_nb = cells_[static_cast<std::size_t>(e.cell[1])].center;
    if (n.dot(c_nb - c_own) < 0.0) n = -n;
    e.normal = n;
    e.tangent = e.mid.cross(n);
    if (n.cross(e.mid).dot(p1 - p0) < 0.0) std::swap(e.vertex[0], e.vertex[1]);
  }

  for (std::size_t j = 0; j < nc; ++j) {
    GridCell& cell = cells_[j];
    double perimeter = 0.0;
    for (int k = 0; k < 3; ++k) {
      const GridEdge& e = edges_[static_cast<std::size_t>(cell.edge[static_cast<std::size_t>(k)])];
      cell.neighbor[static_cast<std::size_t>(k)] = e.cell[0] == static_cast<int>(j) ? e.cell[1] : e.cell[0];
      perimeter += e.length;
    }
    cell.inradius = 2.0 * cell.area / perimeter;
  }

  lsq_.resize(nc);
  areas_.resize(static_cast<Eigen::Index>(nc));
  for (std::size_t j = 0; j < nc; ++j) {
    lsq_[j] = make_lsq(*this, cells_[j]);
    areas_[static_cast<Eigen::Index>(j)] = cells_[j].area;
  }
  total_area_ = areas_.sum();
}

GridMetrics grid_metrics_report(const SphereGrid& grid) {
  GridMetrics m;
  m.min_cell_area_km2 = grid.areas().minCoeff() * 1e-6;
  m.max_cell_area_km2 = grid.areas().maxCoeff() * 1e-6;
  double lmin = std::numeric_limits<double>::max();
  double lmax = 0.0;
  for (const auto& e : grid.edges()) {
    lmin = std::min(lmin, e.length);
    lmax = std::max(lmax, e.length);
  }
  double tri = 0.0;
  for (const auto& c : grid.cells()) {
    double cmin = std::numeric_limits<double>::max();
    double cmax = 0.0;
    for (int e : c.edge) {
      cmin = std::min(cmin, grid.edge(e).length);
      cmax = std::max(cmax, grid.edge(e).length);
    }
    tri = std::max(tri, cmax / cmin);
  }
  m.global_edge_ratio = lmax / lmin;
  m.triangle_edge_ratio = tri;
  m.min_edge_km = lmin * 1e-3;
  m.max_edge_km = lmax * 1e-3;
  return m;
}

void write_grid(std::ostream& os, const SphereGrid& grid) {
  const auto old_flags = os.flags();
  const auto old_prec = os.precision();
  os << std::setprecision(17);
  os << "GRID " << grid.n_r() << ' ' << grid.n_b() << ' ' << grid.radius() << '\n';
  os << "VERTICES " << grid.num_vertices() << '\n';
  for (int i = 0; i < grid.num_vertices(); ++i) {
    const auto& v = grid.vertices()[static_cast<std::size_t>(i)];
    os << i << ' ' << v.lon << ' ' << v.lat << '\n';
  }
  os << "CELLS " << grid.num_cells() << '\n';
  for (int j = 0; j < grid.num_cells(); ++j) {
    const auto& c = grid.cell(j);
    os << j << ' ' << c.vertex[0] << ' ' << c.vertex[1] << ' ' << c.vertex[2] << ' ' << c.area << '\n';
  }
  os << "EDGES " << grid.num_edges() << '\n';
  for (int i = 0; i < grid.num_edges(); ++i) {
    const auto& e = grid.edge(i);
    const auto frame = TangentFrame<double>::at(e.mid);
    os << i << ' ' << e.vertex[0] << ' ' << e.vertex[1] << ' ' << e.cell[0] << ' ' << e.cell[1] << ' '
       << e.length << ' ' << e.normal.dot(frame.east) << ' ' << e.normal.dot(frame.north) << '\n';
  }
  os.flags(old_flags);
  os.precision(old_prec);
}

}  // namespace icoadv
