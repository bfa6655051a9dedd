#include <doctest.h>

#include <numbers>
#include <numeric>

#include "smokeflow/synth.hpp"
#include "support.hpp"

using namespace smokeflow;

namespace {

double mass(const Frame& f) { return std::accumulate(f.values().begin(), f.values().end(), 0.0); }

double interior_rms(const Frame& a, const Frame& b, int border) {
  double s = 0.0;
  int n = 0;
  for (int y = border; y < a.height() - border; ++y) {
    for (int x = border; x < a.width() - border; ++x) {
      s += (a(x, y) - b(x, y)) * (a(x, y) - b(x, y));
      ++n;
    }
  }
  return std::sqrt(s / n);
}

}  // namespace

TEST_CASE("make_density") {
  const Frame a = make_density(80, 64, 12, 4);
  CHECK(a == make_density(80, 64, 12, 4));
  CHECK_FALSE(a == make_density(80, 64, 13, 4));

  const double m = mass(a);
  CHECK(std::isfinite(m));
  CHECK(m > 0.0);
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      CHECK(a(x, y) >= 0.0);
      CHECK(a(x, y) <= 1.0);
      if (std::min({x, y, a.width() - 1 - x, a.height() - 1 - y}) < kDensityMargin) CHECK(a(x, y) == 0.0);
    }
  }

  const Frame one = make_density(65, 65, 3, 1);
  const auto it = std::max_element(one.values().begin(), one.values().end());
  const auto idx = static_cast<std::size_t>(it - one.values().begin());
  CHECK(idx % 65 == 32);
  CHECK(idx / 65 == 32);

  CHECK_THROWS_AS(make_density(64, 64, 1, 0), Error);
  CHECK_THROWS_AS(make_density(10, 64, 1, 2), Error);
}

TEST_CASE("identity and integer translation") {
  const Frame f = make_density(64, 48, 2, 3);
  const SynthCase same = advect(f, FlowSpec::translate(0, 0));
  CHECK(same.f2 == f);
  CHECK(same.gt == FlowField(64, 48));

  const SynthCase t = advect(f, FlowSpec::translate(3, 0));
  for (int y = 0; y < 48; ++y) {
    for (int x = 3; x < 64; ++x) CHECK(t.f2(x, y) == f(x - 3, y));
  }
  for (std::size_t i = 0; i < t.gt.u.size(); ++i) {
    CHECK(t.gt.u[i] == 3.0);
    CHECK(t.gt.v[i] == 0.0);
  }
}

TEST_CASE("rotation ground truth is the analytic displacement") {
  const Vec2 c{40.0, 30.0};
  const double a = 5.0 * std::numbers::pi / 180.0;
  const SynthCase sc = advect(make_density(81, 61, 5, 3), FlowSpec::rotate(c, a));
  for (int y = 0; y < 61; ++y) {
    for (int x = 0; x < 81; ++x) {
      const double dx = x - c.x, dy = y - c.y;
      CHECK(std::abs(sc.gt.u(x, y) - (std::cos(a) * dx - std::sin(a) * dy - dx)) < 1e-12);
      CHECK(std::abs(sc.gt.v(x, y) - (std::sin(a) * dx + std::cos(a) * dy - dy)) < 1e-12);
    }
  }
}

TEST_CASE("ground truth follows the spec formula for every kind") {
  const Vec2 c{31.5, 31.5};
  FlowSpec specs[] = {FlowSpec::translate(1.5, -2.0), FlowSpec::rotate(c, 0.05), FlowSpec::vortex(c, 0.3, 12.0),
                      FlowSpec::shear(c, 0.04)};
  specs[2].steps = 3;
  const Frame f = make_density(64, 64, 8, 2);
  for (const FlowSpec& s : specs) {
    const SynthCase sc = advect(f, s);
    for (int y = 0; y < 64; y += 3) {
      for (int x = 0; x < 64; x += 3) {
        const Vec2 d = s.displacement({double(x), double(y)});
        CHECK(sc.gt.u(x, y) == d.x);
        CHECK(sc.gt.v(x, y) == d.y);
      }
    }
  }
  // the vortex turns each circle rigidly: displacement keeps the radius
  const FlowSpec v = FlowSpec::vortex(c, 0.4, 10.0);
  const Vec2 p{40.0, 35.0};
  const Vec2 q = p + v.displacement(p);
  CHECK(std::hypot(q.x - c.x, q.y - c.y) == doctest::Approx(std::hypot(p.x - c.x, p.y - c.y)).epsilon(1e-12));
}

TEST_CASE("inverse_step undoes one step") {
  const Vec2 c{20.0, 25.0};
  for (const FlowSpec& s : {FlowSpec::translate(1.5, -0.5), FlowSpec::rotate(c, 0.2), FlowSpec::vortex(c, 0.5, 8.0),
                            FlowSpec::shear(c, 0.1)}) {
    for (Vec2 p : {Vec2{3.0, 4.0}, Vec2{22.5, 19.0}, Vec2{40.0, 31.0}}) {
      const Vec2 back = s.inverse_step(p + s.displacement(p));
      CHECK(back.x == doctest::Approx(p.x).epsilon(1e-12));
      CHECK(back.y == doctest::Approx(p.y).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward warp of f2 by the ground truth reconstructs f1") {
  const Frame f = make_density(96, 96, 6, 4);
  const Vec2 c{47.5, 47.5};
  for (const FlowSpec& s : {FlowSpec::translate(2.5, -1.25), FlowSpec::rotate(c, 0.05), FlowSpec::vortex(c, 0.2, 25.0)}) {
    const SynthCase sc = advect(f, s);
    CHECK(interior_rms(warp_backward(sc.f2, sc.gt), sc.f1, 12) < 0.02);
  }
}

TEST_CASE("divergence-free motions conserve mass") {
  const Frame f = make_density(96, 96, 10, 5);
  const Vec2 c{47.5, 47.5};
  for (const FlowSpec& s : {FlowSpec::translate(3.0, -4.0), FlowSpec::rotate(c, 0.07), FlowSpec::vortex(c, 0.2, 25.0)}) {
    const SynthCase sc = advect(f, s);
    CHECK(std::abs(mass(sc.f2) - mass(sc.f1)) < 0.01 * mass(sc.f1));
  }
}

TEST_CASE("diffusion is applied after advection") {
  FlowSpec s = FlowSpec::translate(0, 0);
  s.diffusion = 1.5;
  const Frame f = make_density(48, 48, 1, 2);
  const SynthCase sc = advect(f, s);
  CHECK(sc.f2 == gaussian_blur(f, 1.5));
}

TEST_CASE("spec validation and errors") {
  const Frame f = make_density(40, 40, 1, 1);
  try {
    advect(f, FlowSpec::translate(500, 0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FlowTooLarge);
    CHECK(std::string(e.what()) == "flow too large");
  }
  FlowSpec bad = FlowSpec::translate(1, 0);
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FlowSpec::translate(std::nan(""), 0);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FlowSpec::vortex({0, 0}, 0.1, 0.0);
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = FlowSpec::translate(1, 0);
  bad.diffusion = -1;
  CHECK_THROWS_AS(advect(f, bad), Error);

  CHECK(flow_kind_from_string("vortex") == FlowKind::Vortex);
  CHECK_THROWS_AS(flow_kind_from_string("spin"), Error);
  const auto j = FlowSpec::rotate({1, 2}, 0.1).to_json();
  CHECK(j["kind"] == "rotate");
  CHECK(j["angle"] == 0.1);
}
