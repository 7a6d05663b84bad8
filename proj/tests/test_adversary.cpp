#include <doctest.h>

#include <cmath>
#include <random>

#include "recourse/adversary.hpp"
#include "recourse/errors.hpp"
#include "test_util.hpp"

using namespace recourse;

TEST_SUITE("adversary") {

TEST_CASE("best response lowers every weight against its input") {
  const Neighborhood n{ModelParams{{1.0, -0.5, 0.2}, 0.3}, 0.25};
  const Vector x{2.0, -1.0, 0.0};
  const ModelParams t = best_response(n, x);
  CHECK(t.weights[0] == doctest::Approx(0.75));
  CHECK(t.weights[1] == doctest::Approx(-0.25));
  CHECK(t.weights[2] == doctest::Approx(-0.05));  // x = 0 counts as positive
  CHECK(t.intercept == doctest::Approx(0.05));
  const Neighborhood fixed{n.base, n.alpha, false};
  CHECK(best_response(fixed, x).intercept == 0.3);
}

TEST_CASE("best response matches the corner enumeration") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<int> dim(1, 4), coin(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = static_cast<std::size_t>(dim(rng));
    Neighborhood n{ModelParams{testutil::uniform_vector(rng, d, -2.0, 2.0), testutil::uniform_vector(rng, 1, -1, 1)[0]},
                   testutil::uniform_vector(rng, 1, 0.0, 1.0)[0], trial % 2 == 0};
    Vector x = testutil::uniform_vector(rng, d, -3.0, 3.0);
    for (auto& v : x)
      if (coin(rng) == 0) v = 0.0;
    const double a = score(best_response(n, x), x);
    const double b = score(corner_oracle(n, x), x);
    CHECK(std::abs(a - b) <= 1e-12);
  }
}

TEST_CASE("corner oracle breaks ties toward negative perturbations") {
  const Neighborhood n{ModelParams{{1.0, 1.0}, 0.0}, 0.5};
  const Vector x{0.0, 0.0};
  const ModelParams t = corner_oracle(n, x);
  CHECK(t.weights[0] == doctest::Approx(0.5));
  CHECK(t.weights[1] == doctest::Approx(0.5));
  CHECK(t.intercept == doctest::Approx(-0.5));
}

TEST_CASE("worst-case total grows with alpha") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    RecourseQuery q;
    q.x0 = testutil::uniform_vector(rng, 3, -2.0, 2.0);
    q.lambda = 0.2;
    const Vector x = testutil::uniform_vector(rng, 3, -3.0, 3.0);
    const ModelParams base{testutil::uniform_vector(rng, 3, -1.0, 1.0), 0.1};
    double prev = -1.0;
    for (double alpha = 0.0; alpha <= 1.0; alpha += 0.1) {
      const double v = worst_case_total(q, Neighborhood{base, alpha}, x);
      CHECK(v >= prev - 1e-12);
      CHECK(v >= eval_total_cost(q, x, base) - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("neighborhood membership and clamping") {
  const Neighborhood n{ModelParams{{1.0, 2.0}, 0.0}, 0.5};
  CHECK(n.contains(ModelParams{{1.5, 1.5}, -0.5}));
  CHECK_FALSE(n.contains(ModelParams{{1.6, 2.0}, 0.0}));
  const ModelParams c = n.clamp(ModelParams{{3.0, -1.0}, 0.9});
  CHECK(c.weights == Vector{1.5, 1.5});
  CHECK(c.intercept == 0.5);
  const Neighborhood fixed{n.base, 0.5, false};
  CHECK(fixed.clamp(ModelParams{{1.0, 2.0}, 0.3}).intercept == 0.0);
  CHECK_FALSE(fixed.contains(ModelParams{{1.0, 2.0}, 0.3}));
  CHECK_THROWS_AS((Neighborhood{n.base, -0.1}.validate()), InvalidInput);
  CHECK_THROWS_AS(best_response(n, Vector{1.0}), DimensionError);
}

TEST_CASE("shared worst-case model stays in the ball and raises the loss") {
  const Neighborhood n{ModelParams{{1.0, 1.0}, 0.0}, 0.2};
  const std::vector<Vector> xs{{0.5, 0.5}, {1.0, -0.2}, {-0.1, 0.8}, {2.0, 2.0}};
  const ModelParams worst = worst_case_shared_model(n, xs);
  CHECK(n.contains(worst));
  CHECK(mean_recourse_loss(worst, xs) > mean_recourse_loss(n.base, xs));
  // The best joint model is not above any single instance's own adversary.
  for (const auto& x : xs) CHECK(score(worst, x) >= score(best_response(n, x), x) - 1e-12);
  AscentConfig none;
  none.steps = 0;
  const ModelParams start = worst_case_shared_model(n, xs, none);
  CHECK(start.weights == n.base.weights);
}

TEST_CASE("shared worst-case network stays within alpha per parameter") {
  MlpWeights w;
  w.layers.push_back({{{1.0, -1.0}, {0.5, 0.5}}, {0.0, -1.0}});
  w.layers.push_back({{{2.0, -3.0}}, {0.25}});
  const std::vector<Vector> xs{{2.0, 1.0}, {1.0, 1.0}, {3.0, 0.0}};
  const MlpWeights worst = worst_case_shared_mlp(w, 0.1, xs);
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    for (std::size_t o = 0; o < w.layers[l].outputs(); ++o) {
      CHECK(std::abs(worst.layers[l].b[o] - w.layers[l].b[o]) <= 0.1 + 1e-12);
      for (std::size_t i = 0; i < w.layers[l].inputs(); ++i)
        CHECK(std::abs(worst.layers[l].w[o][i] - w.layers[l].w[o][i]) <= 0.1 + 1e-12);
    }
  }
  CHECK(mean_recourse_loss(worst, xs) > mean_recourse_loss(w, xs));
}

}  // TEST_SUITE
