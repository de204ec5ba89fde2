#ifndef ICOADV_FIELDS_HPP_
#define ICOADV_FIELDS_HPP_

#include "icoadv/grid.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace icoadv {

/// One value per cell, tied to the grid it lives on.
struct CellField {
  GridPtr grid;
  Eigen::VectorXd values;

  CellField() = default;
  explicit CellField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(Eigen::VectorXd::Constant(grid->num_cells(), fill)) {}
  CellField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->num_cells()) throw std::invalid_argument("CellField: size mismatch");
  }

  Eigen::Index size() const { return values.size(); }
  double& operator[](Eigen::Index j) { return values[j]; }
  double operator[](Eigen::Index j) const { return values[j]; }
};

/// One value per edge.
struct EdgeField {
  GridPtr grid;
  Eigen::VectorXd values;

  EdgeField() = default;
  explicit EdgeField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(Eigen::VectorXd::Constant(grid->num_edges(), fill)) {}
  EdgeField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->num_edges()) throw std::invalid_argument("EdgeField: size mismatch");
  }

  Eigen::Index size() const { return values.size(); }
  double& operator[](Eigen::Index e) { return values[e]; }
  double operator[](Eigen::Index e) const { return values[e]; }
};

void require_same_grid(const CellField& a, const CellField& b, const char* what);

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
};

struct NormReport {
  double l1_rel = 0.0;
  double l1_abs = 0.0;
  double l2_rel = 0.0;
  double l2_abs = 0.0;
  double linf_rel = 0.0;
  double linf_abs = 0.0;
  int undershoot_count = 0;
  int overshoot_count = 0;
  double min_value = 0.0;
  double max_value = 0.0;
};

/// Error norms against a reference. Relative l1/l2 are area weighted, the
/// absolute ones and both max norms are plain sums/maxima over cells.
template <typename DA, typename DQ, typename DT>
NormReport compute_norms(const Eigen::MatrixBase<DA>& area, const Eigen::MatrixBase<DQ>& q,
                         const Eigen::MatrixBase<DT>& q_true, Bounds bounds) {
  if (q.size() != q_true.size() || q.size() != area.size())
    throw std::invalid_argument("compute_norms: size mismatch");
  const auto diff = (q - q_true).eval();
  const double w1_true = area.dot(q_true.cwiseAbs());
  const double w2_true = area.dot(q_true.cwiseAbs2());
  const double max_true = q_true.cwiseAbs().maxCoeff();
  if (w1_true == 0.0 || max_true == 0.0)
    throw std::domain_error("compute_norms: reference field is identically zero");
  NormReport r;
  r.l1_abs = diff.cwiseAbs().sum();
  r.l2_abs = std::sqrt(diff.squaredNorm());
  r.linf_abs = diff.cwiseAbs().maxCoeff();
  r.l1_rel = area.dot(diff.cwiseAbs()) / w1_true;
  r.l2_rel = std::sqrt(area.dot(diff.cwiseAbs2()) / w2_true);
  r.linf_rel = r.linf_abs / max_true;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (q[i] < bounds.lo) ++r.undershoot_count;
    if (q[i] > bounds.hi) ++r.overshoot_count;
  }
  r.min_value = q.minCoeff();
  r.max_value = q.maxCoeff();
  return r;
}

NormReport compute_norms(const CellField& q, const CellField& q_true, Bounds bounds);

/// Total tracer mass sum_j |Omega_j| rho_j q_j.
double mass(const CellField& q, const CellField& rho);

/// CSV header / row in table order:
/// l1_rel,l2_rel,linf_rel,l1_abs,l2_abs,linf_abs,undershoot,min,overshoot,max
std::string norm_csv_header();
std::string to_csv_row(const NormReport& r);

}  // namespace icoadv

#endif  // ICOADV_FIELDS_HPP_
