#include "icoadv/fields.hpp"

#include <cstdio>
#include <string>

namespace icoadv {

void require_same_grid(const CellField& a, const CellField& b, const char* what) {
  if (!a.grid || a.grid != b.grid) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

NormReport compute_norms(const CellField& q, const CellField& q_true, Bounds bounds) {
  require_same_grid(q, q_true, "compute_norms");
  return compute_norms(q.grid->areas(), q.values, q_true.values, bounds);
}

double mass(const CellField& q, const CellField& rho) {
  require_same_grid(q, rho, "mass");
  const Eigen::VectorXd& a = q.grid->areas();
  double total = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) total += a[j] * rho[j] * q[j];
  return total;
}

std::string norm_csv_header() {
  return "l1_rel,l2_rel,linf_rel,l1_abs,l2_abs,linf_abs,undershoot,min,overshoot,max";
}

std::string to_csv_row(const NormReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.6e,%.6e,%.6e,%.6e,%.6e,%.6e,%d,%.6e,%d,%.6e", r.l1_rel, r.l2_rel, r.linf_rel,
                r.l1_abs, r.l2_abs, r.linf_abs, r.undershoot_count, r.min_value, r.overshoot_count, r.max_value);
  return buf;
}

}  // namespace icoadv
