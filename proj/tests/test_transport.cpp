#include <doctest.h>

#include "icoadv/transport.hpp"

using namespace icoadv;

namespace {
const WindCaseId kAllWinds[] = {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalNonDiv,
                                WindCaseId::DeformationalDiv, WindCaseId::MovingVortices};
const Limiter kAllLimiters[] = {Limiter::None, Limiter::FctMinmax, Limiter::FctPositive};
}  // namespace

TEST_CASE("constant field stays constant in divergence-free winds") {
  auto g = SphereGrid::build(2, 2);
  SchemeConfig c;
  c.dt = 2400;
  for (auto id : {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalNonDiv, WindCaseId::MovingVortices}) {
    CellField q(g, 1.0);
    const WindCase wc = WindCase::standard(id);
    for (int n = 0; n < 20; ++n) q = step(q, n * c.dt, c, wc);
    CHECK((q.values.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mass is conserved for every wind and limiter") {
  auto g = SphereGrid::build(2, 2);
  const CellField q0 = initial_field(ScalarCase::standard(ScalarCaseId::SlottedCylinder), g);
  const CellField ones(g, 1.0);
  for (auto id : kAllWinds)
    for (auto lim : kAllLimiters) {
      SchemeConfig c;
      c.dt = 2400;
      c.limiter = lim;
      const ForwardResult r = run_forward(q0, 40 * c.dt, c, WindCase::standard(id));
      CHECK(std::abs(mass(r.q_final, ones) - mass(q0, ones)) / mass(q0, ones) < 1e-12);
    }
}

TEST_CASE("limiters keep the slotted cylinder in range") {
  auto g = SphereGrid::build(2, 2);
  const CellField q0 = initial_field(ScalarCase::standard(ScalarCaseId::SlottedCylinder), g);
  SchemeConfig c;
  c.dt = 2400;
  c.limiter = Limiter::FctMinmax;
  const WindCase wc = WindCase::standard(WindCaseId::DeformationalNonDiv);
  const CellField q = run_forward(q0, 100 * c.dt, c, wc).q_final;
  CHECK(q.values.minCoeff() >= 0.0);
  CHECK(q.values.maxCoeff() <= 1.0 + 1e-12);
  c.limiter = Limiter::FctPositive;
  CHECK(run_forward(q0, 100 * c.dt, c, wc).q_final.values.minCoeff() >= 0.0);
  c.limiter = Limiter::None;
  CHECK(run_forward(q0, 100 * c.dt, c, wc).q_final.values.minCoeff() < 0.0);
}

TEST_CASE("too large a time step raises a CFL error") {
  auto g = SphereGrid::build(2, 2);
  SchemeConfig c;
  c.dt = 40000;
  CellField q(g, 1.0);
  CHECK_THROWS_AS(step(q, 0.0, c, WindCase::standard(WindCaseId::SolidBodyRotation)), CflError);
}

TEST_CASE("checkpointed trajectory reproduces every level") {
  auto g = SphereGrid::build(2, 1);
  const CellField q0 = initial_field(ScalarCase::standard(ScalarCaseId::CosineBell), g);
  SchemeConfig c;
  c.dt = 4800;
  const WindCase wc = WindCase::standard(WindCaseId::MovingVortices);
  const ForwardResult full = run_forward(q0, 30 * c.dt, c, wc, true, 1);
  const ForwardResult ck = run_forward(q0, 30 * c.dt, c, wc, true, 7);
  for (int n = 0; n <= 30; ++n) CHECK((full.trajectory->level(n) - ck.trajectory->level(n)).norm() == 0.0);
  CHECK((full.q_final.values - ck.q_final.values).norm() == 0.0);
}

TEST_CASE("wind cache refuses a different wind") {
  auto g = SphereGrid::build(2, 1);
  auto cache = std::make_shared<WindCache>();
  WindProvider a(WindCase::standard(WindCaseId::MovingVortices), g, cache);
  a.at(100.0);
  CHECK_THROWS(WindProvider(WindCase::standard(WindCaseId::DeformationalDiv), g, cache).at(100.0));
}

TEST_CASE("step counts and limiter names") {
  CHECK(steps_for(kPeriod, 600.0) == 1728);
  CHECK_THROWS(steps_for(1000.0, 600.0));
  CHECK(parse_limiter("minmax") == Limiter::FctMinmax);
  CHECK(parse_limiter("positive") == Limiter::FctPositive);
  CHECK(parse_limiter("none") == Limiter::None);
  CHECK_THROWS(parse_limiter("superbee"));
}
