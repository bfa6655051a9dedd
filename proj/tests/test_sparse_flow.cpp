#include <doctest.h>

#include <limits>
#include <numbers>
#include <numeric>

#include "smokeflow/sparse_flow.hpp"
#include "support.hpp"

using namespace smokeflow;

namespace {

SkeletalPoint point(double x, double y, double h = 1.0, double angle = 0.0) {
  const Vec2 t{std::cos(angle), std::sin(angle)};
  return {{x, y}, h, t, {-t.y, t.x}};
}

MultiScaleSkeleton skeleton_of(int w, int h, std::vector<SkeletalPoint> pts) {
  MultiScaleSkeleton s;
  s.scale_count = 5;
  s.stability = Grid<double>(w, h, 0.0);
  for (const auto& p : pts) s.stability(int(p.pos.x), int(p.pos.y)) = p.stability;
  s.points = std::move(pts);
  return s;
}

MultiScaleSkeleton vertical_line(int w, int h, int x) {
  std::vector<SkeletalPoint> pts;
  for (int y = 0; y < h; ++y) pts.push_back(point(x, y, 1.0, 0.5 * std::numbers::pi));
  return skeleton_of(w, h, pts);
}

AttractionParams all_candidates(double sigma = 10.0) {
  AttractionParams p;
  p.sigma_spatial = sigma;
  p.neighbor_radius = std::numeric_limits<double>::infinity();
  return p;
}

}  // namespace

TEST_CASE("covariance_at") {
  AttractionParams p;
  p.sigma_spatial = 10.0;
  p.eta = 0.1;
  Cov2 c = covariance_at(point(0, 0), p);
  CHECK(c.xx == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.xy == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(c.yy == doctest::Approx(100.0).epsilon(1e-14));

  p.eta = 1.0;
  for (double a : {0.0, 0.3, 1.2, 2.5}) {
    c = covariance_at(point(0, 0, 1.0, a), p);
    CHECK(c.xx == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(std::abs(c.xy) < 1e-12);
    CHECK(c.yy == doctest::Approx(100.0).epsilon(1e-12));
  }

  // C(R frame) = R C R^T
  p.eta = 0.3;
  const Cov2 c0 = covariance_at(point(0, 0), p);
  for (double a : {0.4, 1.1, 2.9}) {
    const double cs = std::cos(a), sn = std::sin(a);
    const Cov2 cr = covariance_at(point(0, 0, 1.0, a), p);
    const double xx = cs * cs * c0.xx - 2 * cs * sn * c0.xy + sn * sn * c0.yy;
    const double xy = cs * sn * (c0.xx - c0.yy) + (cs * cs - sn * sn) * c0.xy;
    const double yy = sn * sn * c0.xx + 2 * cs * sn * c0.xy + cs * cs * c0.yy;
    CHECK(cr.xx == doctest::Approx(xx).epsilon(1e-12));
    CHECK(cr.xy == doctest::Approx(xy).epsilon(1e-12));
    CHECK(cr.yy == doctest::Approx(yy).epsilon(1e-12));
    CHECK(cr.det() > 0.0);
  }
}

TEST_CASE("attraction_weights basic cases") {
  const AttractionParams p = all_candidates();
  const SkeletalPoint x = point(10, 10);

  const std::vector<SkeletalPoint> pair{point(8, 12), point(12, 12)};
  Attraction a = attraction_weights(x, pair, p);
  REQUIRE(a.probabilities.size() == 2);
  CHECK(std::abs(a.probabilities[0] - 0.5) < 1e-12);
  CHECK(std::abs(a.probabilities[1] - 0.5) < 1e-12);

  const std::vector<SkeletalPoint> one{point(11, 14)};
  a = attraction_weights(x, one, p);
  REQUIRE(a.probabilities.size() == 1);
  CHECK(a.probabilities[0] == 1.0);

  CHECK(attraction_weights(x, {}, p).filtered());
}

TEST_CASE("points beyond the 3 sigma level map to nothing") {
  AttractionParams p = all_candidates(4.0);
  p.min_weight = std::exp(-0.5 * 3.0 * 3.0);
  // normal of a point with tangent (1,0) is (0,1): 3.5 sigma along the normal
  const std::vector<SkeletalPoint> far{point(20, 20 + 3.5 * 4.0)};
  CHECK(attraction_weights(point(20, 20), far, p).filtered());
  Vec2 e;
  CHECK_FALSE(expected_destination(point(20, 20), far, p, e));

  const std::vector<SkeletalPoint> near{point(20, 20 + 2.5 * 4.0)};
  CHECK_FALSE(attraction_weights(point(20, 20), near, p).filtered());
}

TEST_CASE("expected_destination") {
  const AttractionParams p = all_candidates();
  Vec2 e;
  const std::vector<SkeletalPoint> one{point(3, 4)};
  REQUIRE(expected_destination(point(1, 1), one, p, e));
  CHECK(e == Vec2{3, 4});

  // tangent (1,0): both candidates sit 5 px off along the normal, 1 px along the tangent
  const std::vector<SkeletalPoint> two{point(0, 0), point(2, 0)};
  REQUIRE(expected_destination(point(1, 5), two, p, e));
  CHECK(e.x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.y == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  const std::vector<SkeletalPoint> three{point(0, 3, 0.2), point(1, 3, 0.6), point(3, 3, 1.0)};
  const SkeletalPoint x = point(1.5, 1.0, 0.6);
  REQUIRE(expected_destination(x, three, p, e));
  const Attraction a = attraction_weights(x, three, p);
  double ex = 0.0, ey = 0.0;
  for (std::size_t i = 0; i < three.size(); ++i) {
    ex += a.probabilities[i] * three[i].pos.x;
    ey += a.probabilities[i] * three[i].pos.y;
  }
  CHECK(e.x == doctest::Approx(ex).epsilon(1e-13));
  CHECK(e.y == doctest::Approx(ey).epsilon(1e-13));

  // weights by hand: Mahalanobis along the tangent axis (std 1) and stability
  std::vector<double> w;
  for (const auto& y : three) {
    const double dt = x.pos.x - y.pos.x, dn = x.pos.y - y.pos.y;
    const double dh = x.stability - y.stability;
    w.push_back(std::exp(-0.5 * (dt * dt / 1.0 + dn * dn / 100.0) - 0.5 * dh * dh / (0.5 * 0.5)));
  }
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.probabilities[i] == doctest::Approx(w[i] / sw).epsilon(1e-12));
}

TEST_CASE("attraction properties on random configurations") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(0.0, 30.0), ang(0.0, std::numbers::pi), st(0.2, 1.0);
  for (int t = 0; t < 300; ++t) {
    AttractionParams p = all_candidates(std::uniform_real_distribution<double>(2.0, 12.0)(rng));
    p.eta = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    p.min_weight = 0.0;
    const SkeletalPoint x = point(pos(rng), pos(rng), st(rng), ang(rng));
    std::vector<SkeletalPoint> cand;
    const int n = 1 + int(rng() % 8);
    for (int i = 0; i < n; ++i) cand.push_back(point(pos(rng), pos(rng), st(rng), ang(rng)));

    const Attraction a = attraction_weights(x, cand, p);
    if (a.filtered()) continue;
    CHECK(std::abs(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0) - 1.0) < 1e-9);

    // a constant added to every stability changes nothing
    SkeletalPoint xs = x;
    xs.stability += 0.375;
    auto cs = cand;
    for (auto& c : cs) c.stability += 0.375;
    const Attraction b = attraction_weights(xs, cs, p);
    REQUIRE(b.probabilities.size() == a.probabilities.size());
    for (std::size_t i = 0; i < a.probabilities.size(); ++i)
      CHECK(b.probabilities[i] == doctest::Approx(a.probabilities[i]).epsilon(1e-9));

    // translating the candidates translates the expectation
    const Vec2 shift{3.25, -1.5};
    auto moved = cand;
    for (auto& c : moved) c.pos = c.pos + shift;
    SkeletalPoint xm = x;
    xm.pos = x.pos + shift;
    Vec2 e1, e2;
    REQUIRE(expected_destination(x, cand, p, e1));
    REQUIRE(expected_destination(xm, moved, p, e2));
    CHECK(e2.x == doctest::Approx(e1.x + shift.x).epsilon(1e-9));
    CHECK(e2.y == doctest::Approx(e1.y + shift.y).epsilon(1e-9));
  }
}

TEST_CASE("larger sigma_v flattens the stability factor") {
  AttractionParams p = all_candidates();
  const SkeletalPoint x = point(5, 5, 1.0);
  const std::vector<SkeletalPoint> cand{point(5, 7, 1.0), point(5, 3, 0.2)};  // same spatial term
  double prev = std::numeric_limits<double>::infinity();
  for (double sv : {0.1, 0.2, 0.5, 1.0, 2.0, 8.0}) {
    p.sigma_v = sv;
    const Attraction a = attraction_weights(x, cand, p);
    const double ratio = std::abs(std::log(a.probabilities[0] / a.probabilities[1]));
    CHECK(ratio <= prev);
    prev = ratio;
  }
}

TEST_CASE("estimate_sparse on straight lines") {
  const AttractionParams p = [] {
    AttractionParams a;
    a.sigma_spatial = 10.0;
    return a;
  }();
  const MultiScaleSkeleton s1 = vertical_line(64, 64, 20);

  const SparseFlow same = estimate_sparse(s1, s1, p);
  CHECK(same.samples.size() == 64);
  for (const auto& s : same.samples) {
    if (s.anchor.y < 10 || s.anchor.y > 53) continue;
    CHECK(std::hypot(s.displacement.x, s.displacement.y) < 0.1);
  }

  const SparseFlow moved = estimate_sparse(s1, vertical_line(64, 64, 25), p);
  for (const auto& s : moved.samples) {
    if (s.anchor.y < 10 || s.anchor.y > 53) continue;
    CHECK(std::abs(s.displacement.x - 5.0) < 0.5);
    CHECK(std::abs(s.displacement.y) < 0.5);
  }
  const Mask anchors = moved.anchor_mask();
  CHECK(anchors(20, 30) == 1);
  CHECK(anchors(21, 30) == 0);

  const SparseFlow none = estimate_sparse(s1, skeleton_of(64, 64, {}), p);
  CHECK(none.empty());
}

TEST_CASE("estimate_sparse with the truncated neighbourhood agrees with all candidates nearby") {
  std::mt19937_64 rng(8);
  std::vector<SkeletalPoint> a, b;
  for (int i = 0; i < 60; ++i) {
    a.push_back(point(rng() % 40, rng() % 40, 0.2 * (1 + rng() % 5), 0.1 * (rng() % 31)));
    b.push_back(point(rng() % 40, rng() % 40, 0.2 * (1 + rng() % 5), 0.1 * (rng() % 31)));
  }
  auto row_major = [](std::vector<SkeletalPoint>& v) {
    std::sort(v.begin(), v.end(), [](auto& l, auto& r) {
      return std::pair(l.pos.y, l.pos.x) < std::pair(r.pos.y, r.pos.x);
    });
    v.erase(std::unique(v.begin(), v.end(), [](auto& l, auto& r) { return l.pos == r.pos; }), v.end());
  };
  row_major(a);
  row_major(b);
  const auto s1 = skeleton_of(40, 40, a), s2 = skeleton_of(40, 40, b);

  AttractionParams p;
  p.sigma_spatial = 3.0;
  p.neighbor_radius = 1000.0;  // covers the frame
  const SparseFlow wide = estimate_sparse(s1, s2, p);
  p.neighbor_radius = std::numeric_limits<double>::infinity();
  const SparseFlow inf = estimate_sparse(s1, s2, p);
  REQUIRE(wide.samples.size() == inf.samples.size());
  for (std::size_t i = 0; i < wide.samples.size(); ++i) {
    CHECK(wide.samples[i].displacement == inf.samples[i].displacement);
  }
  CHECK(int(wide.samples.size()) + wide.filtered == int(a.size()));
}

TEST_CASE("AttractionParams validation") {
  AttractionParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(AttractionParams::sigma_v_for_scales(5) == 0.5);
  CHECK(p.effective_radius() == 3.0 * p.sigma_spatial);
  p.eta = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.eta = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.sigma_spatial = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.sigma_v = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.min_weight = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);
}
