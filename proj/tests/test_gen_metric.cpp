#include <doctest.h>

#include "levyot/gen_metric.hpp"
#include "test_support.hpp"

using namespace levyot;
using levyot::testing::random_measure;
using levyot::testing::random_psd;
using levyot::testing::random_triplet;
using levyot::testing::random_vec;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

LevyTriplet pure_jump(const DiscreteLevyMeasure& m) {
  return make_triplet(Vec::Zero(m.dim()), Mat::Zero(m.dim(), m.dim()), m);
}

// The running pure-jump pair with distance 4 through the origin.
std::pair<LevyTriplet, LevyTriplet> running_pair() {
  return {pure_jump(DiscreteLevyMeasure(2, {{v2(2, 0), 1.0}})),
          pure_jump(DiscreteLevyMeasure(2, {{v2(-2, 0), 1.0}}))};
}

}  // namespace

TEST_CASE("distance decomposition on the hand examples") {
  SUBCASE("identical triplets") {
    CounterRng rng(113);
    const auto a = random_triplet(rng, 2, 6);
    const auto g = generator_distance(a, a);
    CHECK(g.total_sq == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("pure drifts") {
    auto a = make_triplet(v2(1, 2), Mat::Zero(2, 2), DiscreteLevyMeasure(2));
    auto b = make_triplet(v2(-1, 0), Mat::Zero(2, 2), DiscreteLevyMeasure(2));
    const auto g = generator_distance(a, b);
    CHECK(g.total_sq == doctest::Approx(0.5 * 8.0));
    CHECK(g.diffusion_sq == 0.0);
    CHECK(g.jump_sq == 0.0);
  }
  SUBCASE("1-D diffusions") {
    Mat a4(1, 1), a1(1, 1);
    a4 << 4;
    a1 << 1;
    auto a = make_triplet(Vec::Zero(1), a4, DiscreteLevyMeasure(1));
    auto b = make_triplet(Vec::Zero(1), a1, DiscreteLevyMeasure(1));
    CHECK(generator_distance(a, b).total_sq == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("pure jumps through the origin") {
    const auto [a, b] = running_pair();
    CHECK(generator_distance(a, b).total_sq == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("theta2 is affine in x - y") {
  CounterRng rng(127);
  const auto a = random_triplet(rng, 3, 5);
  const auto b = random_triplet(rng, 3, 5);
  const Vec x = random_vec(rng, 3, 2.0);
  const Vec y = random_vec(rng, 3, 2.0);
  const Vec h = random_vec(rng, 3, 5.0);

  const double at_origin = theta2(a, b, Vec::Zero(3), Vec::Zero(3));
  const auto g = generator_distance(a, b);
  CHECK(at_origin == doctest::Approx(g.diffusion_sq + g.jump_sq).epsilon(1e-12));

  // x = y collapses to the origin value.
  CHECK(theta2(a, b, x, x) == doctest::Approx(at_origin).epsilon(1e-12));

  // Translation invariance.
  CHECK(theta2(a, b, x + h, y + h) == doctest::Approx(theta2(a, b, x, y)).epsilon(1e-12));

  // Pure drift generators: only the affine term survives.
  auto da = make_triplet(v2(2, 0), Mat::Zero(2, 2), DiscreteLevyMeasure(2));
  auto db = make_triplet(v2(0, 1), Mat::Zero(2, 2), DiscreteLevyMeasure(2));
  const Vec p = random_vec(rng, 2, 2.0), q = random_vec(rng, 2, 2.0);
  CHECK(theta2(da, db, p, q) == doctest::Approx((da.drift - db.drift).dot(p - q)));
}

TEST_CASE("optimal coupled triplet assembly") {
  SUBCASE("identical triplets: repeated blocks, diagonal jumps, flat growth") {
    CounterRng rng(131);
    const auto a = random_triplet(rng, 2, 5);
    const auto j = build_optimal_coupling(a, a);
    CHECK((j.diffusion.topRightCorner(2, 2) - a.diffusion).cwiseAbs().maxCoeff() < 1e-9);
    for (const auto& atom : j.jumps.atoms()) CHECK(atom.x == atom.y);
    const Vec x = random_vec(rng, 2, 1.0), y = random_vec(rng, 2, 1.0);
    for (double t : {0.1, 1.0, 10.0})
      CHECK(predicted_cost_growth(j, x, y, t) ==
            doctest::Approx(squared_cost(x, y)).epsilon(1e-9));
  }
  SUBCASE("running pure-jump pair: growth 4t from the origin") {
    const auto [a, b] = running_pair();
    const auto j = build_optimal_coupling(a, b);
    for (const auto& atom : j.jumps.atoms())
      CHECK((atom.x.isZero(0.0) != atom.y.isZero(0.0)));
    const Vec o = Vec::Zero(2);
    CHECK(predicted_cost_growth(j, o, o, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(predicted_cost_growth(j, o, o, 2.5) == doctest::Approx(10.0).epsilon(1e-12));
  }
  SUBCASE("growth matches the theta2 + quadratic drift formula") {
    CounterRng rng(137);
    const auto a = random_triplet(rng, 2, 5);
    const auto b = random_triplet(rng, 2, 5);
    const auto j = build_optimal_coupling(a, b);
    const Vec x = random_vec(rng, 2, 2.0), y = random_vec(rng, 2, 2.0);
    const double dm2 = (a.drift - b.drift).squaredNorm();
    for (double t : {0.25, 1.0, 4.0}) {
      CHECK(predicted_cost_growth(j, x, y, t) ==
            doctest::Approx(squared_cost(x, y) + t * theta2(a, b, x, y) +
                            0.5 * t * t * dm2)
                .epsilon(1e-9));
    }
  }
}

TEST_CASE("optimal growth undercuts alternative couplings") {
  CounterRng rng(139);
  for (int it = 0; it < 25; ++it) {
    const int d = 1 + static_cast<int>(rng.next_below(3));
    const auto a = random_triplet(rng, d, 6);
    const auto b = random_triplet(rng, d, 6);
    const auto opt = build_optimal_coupling(a, b);
    const auto ind = independent_coupling(a, b);

    // Five alternatives: trivial jumps, zero cross block, both, and mixtures.
    std::vector<CoupledTriplet> alts;
    alts.push_back(ind);
    alts.push_back({opt.drift, ind.diffusion, opt.jumps});
    alts.push_back({opt.drift, opt.diffusion, ind.jumps});
    {
      std::vector<CouplingAtom> mix = opt.jumps.atoms();
      for (auto& at : mix) at.w *= 0.5;
      auto half_triv = ind.jumps.atoms();
      for (auto& at : half_triv) at.w *= 0.5;
      mix.insert(mix.end(), half_triv.begin(), half_triv.end());
      alts.push_back({opt.drift, opt.diffusion, LevyCoupling(d, std::move(mix))});
    }
    alts.push_back({opt.drift, 0.5 * (opt.diffusion + ind.diffusion), opt.jumps});

    const Vec x = random_vec(rng, d, 2.0), y = random_vec(rng, d, 2.0);
    for (const auto& alt : alts) {
      CHECK(validate_coupling(alt.jumps, a.jumps, b.jumps).pass);
      CHECK(is_psd(alt.diffusion));
      for (double t : {0.1, 1.0, 10.0}) {
        CHECK(predicted_cost_growth(opt, x, y, t) <=
              predicted_cost_growth(alt, x, y, t) + 1e-9);
      }
    }
  }
}

TEST_CASE("metric axioms on random triples") {
  CounterRng rng(149);
  for (int it = 0; it < 60; ++it) {
    const int d = 1 + static_cast<int>(rng.next_below(3));
    const auto a = random_triplet(rng, d, 5);
    const auto b = random_triplet(rng, d, 5);
    const auto c = random_triplet(rng, d, 5);

    const auto gab = generator_distance(a, b);
    const auto gba = generator_distance(b, a);
    CHECK(gab.total_sq == gba.total_sq);  // bitwise symmetry

    const double ab = std::sqrt(gab.total_sq);
    const double bc = std::sqrt(generator_distance(b, c).total_sq);
    const double ac = std::sqrt(generator_distance(a, c).total_sq);
    CHECK(ac <= ab + bc + 1e-8);

    // Jump metric alone.
    const double jab = std::sqrt(levy_ot_solve(a.jumps, b.jumps).cost);
    const double jbc = std::sqrt(levy_ot_solve(b.jumps, c.jumps).cost);
    const double jac = std::sqrt(levy_ot_solve(a.jumps, c.jumps).cost);
    CHECK(jac <= jab + jbc + 1e-8);
  }

  // Identity of indiscernibles at the canonical-form level.
  const auto a = random_triplet(rng, 2, 5);
  CHECK(generator_distance(a, a).total_sq <= 1e-12);
  CHECK(approx_equal(a, a, 1e-9));
  auto nudged = a;
  nudged.drift[0] += 1e-3;
  CHECK_FALSE(approx_equal(a, nudged, 1e-9));
  CHECK(generator_distance(a, nudged).total_sq > 1e-8);
}

TEST_CASE("growth bound by max{t, t^2} times the squared distance") {
  CounterRng rng(151);
  for (int it = 0; it < 40; ++it) {
    const int d = 1 + static_cast<int>(rng.next_below(3));
    const auto a = random_triplet(rng, d, 5);
    const auto b = random_triplet(rng, d, 5);
    const auto g = generator_distance(a, b);
    const double theta0 = g.diffusion_sq + g.jump_sq;
    for (double t : {0.5, 1.0, 2.0}) {
      const double lhs = t * theta0 + 0.5 * t * t * (a.drift - b.drift).squaredNorm();
      CHECK(lhs <= std::max(t, t * t) * g.total_sq + 1e-12);
    }
  }
}

TEST_CASE("truncation: dropped atoms and the error bound") {
  SUBCASE("below-threshold delta is the identity with zero bound") {
    CounterRng rng(157);
    const auto mu = random_measure(rng, 2, 8, 2.0, 0.5);
    const auto res = truncate_measure(mu, 0.25, 0.0);
    CHECK(lex_compare(res.measure, mu) == 0);
    CHECK(res.error_bound == 0.0);
  }
  SUBCASE("single dropped atom pays exactly half its squared norm") {
    DiscreteLevyMeasure mu(2, {{v2(0.1, 0), 1.0}, {v2(3, 0), 1.0}});
    const auto res = truncate_measure(mu, 0.5, 0.0);
    CHECK(res.measure.size() == 1);
    CHECK(res.error_bound == doctest::Approx(0.005).epsilon(1e-14));
    CHECK(levy_ot_solve(mu, res.measure).cost == doctest::Approx(0.005).epsilon(1e-12));
  }
  SUBCASE("pure thinning bound") {
    CounterRng rng(163);
    const auto mu = random_measure(rng, 2, 8, 2.0, 0.5);
    const auto res = truncate_measure(mu, 1e-9, 0.5);
    CHECK(res.error_bound == doctest::Approx(0.25 * second_moment(mu)).epsilon(1e-12));
  }
  SUBCASE("solver-verified bound on random measures") {
    CounterRng rng(167);
    for (int it = 0; it < 40; ++it) {
      const auto mu = random_measure(rng, 2, 10);
      const double delta = 0.2 + rng.next_uniform();
      const double dp = 0.5 * rng.next_uniform();
      const auto res = truncate_measure(mu, delta, dp);
      CHECK(levy_ot_solve(mu, res.measure).cost <= res.error_bound + 1e-10);
    }
  }
}

TEST_CASE("convergence diagnostics") {
  CounterRng rng(173);
  const auto target = random_measure(rng, 2, 10, 2.0, 0.05);

  SUBCASE("constant sequence reports zeros") {
    const auto rep = lambda_convergence_report({target, target, target}, target);
    for (const auto& r : rep.rows) {
      CHECK(r.w_lambda == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(r.second_moment_gap == 0.0);
      CHECK(r.battery_defect == 0.0);
    }
    CHECK(rep.co_trending);
  }
  SUBCASE("truncation tails vanish and co-trend") {
    std::vector<DiscreteLevyMeasure> seq;
    for (int n = 1; n <= 64; n *= 2)
      seq.push_back(truncate_measure(target, 1.0 / n, 0.0).measure);
    const auto rep = lambda_convergence_report(seq, target);
    CHECK(rep.rows.back().w_lambda <= 1e-9);
    CHECK(rep.rows.back().second_moment_gap <= 1e-9);
    CHECK(rep.rows.back().battery_defect <= 1e-9);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      CHECK(rep.rows[i].w_lambda <= rep.rows[i - 1].w_lambda + 1e-12);
      CHECK(rep.rows[i].battery_defect <= rep.rows[i - 1].battery_defect + 1e-12);
    }
    CHECK(rep.co_trending);
  }
  SUBCASE("a shifted target stays bounded away from zero") {
    std::vector<DiscreteLevyMeasure> seq;
    const Vec h = v2(0.75, -0.5);
    for (int n = 0; n < 5; ++n) seq.push_back(target.shifted(h));
    const auto rep = lambda_convergence_report(seq, target);
    for (const auto& r : rep.rows) CHECK(r.w_lambda > 0.05);
  }
}

TEST_CASE("battery functions are dominated by min(1, |x|^2)") {
  CounterRng rng(179);
  const Vec lo = Vec::Constant(2, -3.0), hi = Vec::Constant(2, 3.0);
  for (int it = 0; it < 500; ++it) {
    const Vec x = random_vec(rng, 2, 4.0);
    for (int k = 0; k < 32; ++k) {
      const double val = convergence_test_function(k, x, lo, hi);
      CHECK(val >= 0.0);
      CHECK(val <= std::min(1.0, x.squaredNorm()) + 1e-15);
    }
  }
}
