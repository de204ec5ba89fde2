#include <doctest.h>

#include "icoadv/checks.hpp"

using namespace icoadv;

TEST_CASE("assembled flux operator equals the probed one") {
  auto g = SphereGrid::build(2, 1);
  const Eigen::VectorXd rho = Eigen::VectorXd::Ones(g->num_cells());
  for (auto id : {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalDiv, WindCaseId::MovingVortices})
    for (auto order : {Order::Constant, Order::Linear}) {
      SchemeConfig c;
      c.dt = 4800;
      c.order = order;
      const EdgeWind w = edge_normal_wind(WindCase::standard(id), 0.3 * kPeriod, g);
      const auto a = assemble_forward_operator(w, rho, c.dt, *g, c);
      const auto p = probe_forward_operator(w, rho, c.dt, *g, c);
      const Eigen::MatrixXd da(a.m), dp(p.m);
      CHECK((da - dp).cwiseAbs().maxCoeff() <= 1e-12 * dp.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("standard adjoint refuses a limited scheme") {
  auto g = SphereGrid::build(2, 0);
  SchemeConfig c;
  c.limiter = Limiter::FctMinmax;
  const EdgeWind w = edge_normal_wind(WindCase::standard(WindCaseId::SolidBodyRotation), 0.0, g);
  CHECK_THROWS_WITH(assemble_forward_operator(w, Eigen::VectorXd::Ones(80), 600, *g, c),
                    "standard adjoint undefined for limited scheme");
}

TEST_CASE("summation by parts on every wind") {
  auto g = SphereGrid::build(2, 1);
  SchemeConfig c;
  c.dt = 4800;
  for (auto id : {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalNonDiv, WindCaseId::DeformationalDiv,
                  WindCaseId::MovingVortices})
    CHECK(duality_check(g, WindCase::standard(id), c, 20, 3, 0.2 * kPeriod).max_rel <= 1e-12);
  // spatially varying density
  c.density = Eigen::VectorXd::LinSpaced(g->num_cells(), 0.5, 1.5);
  CHECK(duality_check(g, WindCase::standard(WindCaseId::DeformationalDiv), c, 20, 4).max_rel <= 1e-12);
}

TEST_CASE("adjoints with zero forcing retro-transport") {
  auto g = SphereGrid::build(2, 1);
  SchemeConfig c;
  c.dt = 4800;
  const WindCase wc = WindCase::standard(WindCaseId::MovingVortices);
  c.order = Order::Constant;
  CHECK(retro_check(AdjointMethod::Standard, g, wc, c, 10, 5).max_rel <= 1e-12);
  CHECK(retro_check(AdjointMethod::ArtSource, g, wc, c, 10, 5).max_rel <= 1e-12);
  c.order = Order::Linear;
  CHECK(retro_check(AdjointMethod::ArtSource, g, wc, c, 10, 5).max_rel <= 1e-12);
}

// Dense end-to-end check of the gradient: the unlimited model is linear, so
// q^n = P_n q0 with P_n a product of dense step matrices.
TEST_CASE("standard gradient equals the dense Jacobian-transpose gradient on R2B1") {
  auto g = SphereGrid::build(2, 1);
  const int nc = g->num_cells();
  const ScalarCase sc = ScalarCase::standard(ScalarCaseId::CosineBell);
  const WindCase wc = WindCase::standard(WindCaseId::MovingVortices);
  SchemeConfig c;
  c.dt = 4800;
  AssimProblem p;
  p.grid = g;
  p.wind = wc;
  p.config = c;
  p.horizon = 12 * c.dt;
  p.w_b = 0.3;
  p.w_o = 0.7;
  const CellField truth = initial_field(sc, g);
  p.background = make_background(truth, BackgroundMode::Uniform10pct);
  p.obs = make_observations(TruthSource::ReferenceRun, sc, wc, nc / 2, g, c, p.horizon);
  CellField x = p.background;
  x.values += 0.05 * Eigen::VectorXd::LinSpaced(nc, -1.0, 1.0);

  const Eigen::VectorXd kb = p.background_kernel(), ko = p.observation_kernel();
  const int nt = p.num_steps();
  Eigen::MatrixXd prop = Eigen::MatrixXd::Identity(nc, nc);
  Eigen::VectorXd grad = 2.0 * p.w_b * kb.cwiseProduct(x.values - p.background.values);
  auto add_level = [&](int n) {
    const Eigen::VectorXd q = prop * x.values;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nc);
    for (int k = 0; k < p.obs.num_obs(); ++k) {
      const int cell = p.obs.cells[static_cast<std::size_t>(k)];
      r[cell] = 2.0 * ko[k] * (q[cell] - p.obs.values[static_cast<std::size_t>(n)][k]);
    }
    grad += p.w_o * p.horizon / (2.0 * nt) * prop.transpose() * r;
  };
  add_level(0);
  const Eigen::VectorXd rho = Eigen::VectorXd::Ones(nc);
  for (int n = 0; n < nt; ++n) {
    const EdgeWind w = edge_normal_wind(wc, step_wind_time(n, c.dt), g);
    const Eigen::MatrixXd m(assemble_forward_operator(w, rho, c.dt, *g, c).m);
    const Eigen::MatrixXd step_matrix =
        Eigen::MatrixXd::Identity(nc, nc) - c.dt * g->areas().cwiseInverse().asDiagonal() * m;
    prop = step_matrix * prop;
    add_level(n + 1);
  }
  const Evaluation ev = evaluate(x, p, AdjointMethod::Standard);
  CHECK((ev.gradient.values - grad).norm() <= 1e-10 * grad.norm());
  // and the forward part: the dense propagator reproduces the model
  CHECK((prop * x.values - run_forward(x, p.horizon, c, wc).q_final.values).norm() <= 1e-12 * x.values.norm());
}

TEST_CASE("method names") {
  CHECK(parse_adjoint_method("standard") == AdjointMethod::Standard);
  CHECK(parse_adjoint_method("artsource") == AdjointMethod::ArtSource);
  CHECK(to_string(AdjointMethod::ArtSource) == "artsource");
  CHECK_THROWS(parse_adjoint_method("tangent"));
}
