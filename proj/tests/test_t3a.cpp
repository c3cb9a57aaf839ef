#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtnam/mtnam.hpp"
#include "mtnam/rng.hpp"
#include "mtnam/t3a.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mtnam;

namespace {

/// Forward function that returns the input row itself as contributions.
void identity_forward(const VectorXd& x, VectorXd& contrib) { contrib = x; }

FeatureMatrix random_stream(int n, int dim, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, scale);
  MatrixXd rows(n, dim);
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) rows(i, j) = g(rng);
    labels.push_back(rows.row(i).sum() > 0 ? 1 : 0);
  }
  return testutil::make_features(rows, labels);
}

}  // namespace

TEST_CASE("adapter initialisation") {
  const auto s = init_adapter(4, 0.1);
  CHECK(s.mu1 == VectorXd::Constant(4, 0.5));
  CHECK(s.mu0 == -s.mu1);
  CHECK(s.mu1.norm() == doctest::Approx(1.0));
  CHECK(s.n0 == 1);
  CHECK(s.n1 == 1);
  CHECK(std::abs(init_adapter(207, 0.1).mu1.norm() - 1.0) <= 1e-12);
  CHECK_THROWS_AS(init_adapter(0, 0.1), Error);
}

TEST_CASE("binary entropy") {
  CHECK(entropy(0.5) == doctest::Approx(std::numbers::ln2));
  CHECK(entropy(0.0) == 0.0);
  CHECK(entropy(1.0) == 0.0);
  CHECK(entropy(0.9) == doctest::Approx(-(0.9 * std::log(0.9) + 0.1 * std::log(0.1))));
  CHECK(entropy(0.9) == doctest::Approx(0.3251).epsilon(1e-4));
  CHECK_THROWS_AS(entropy(1.5), Error);
}

TEST_CASE("single adaptation step") {
  SUBCASE("running mean of a confident class-1 sample") {
    auto s = init_adapter(2, 0.1);
    const VectorXd f = (VectorXd(2) << 3, 4).finished();
    const auto r = adapt_step(s, f);
    CHECK(r.accepted);
    CHECK(r.class_assigned == 1);
    CHECK(s.n1 == 2);
    CHECK(s.n0 == 1);
    CHECK(s.mu1(0) == doctest::Approx((1 / std::sqrt(2.0) + 0.6) / 2).epsilon(1e-14));
    CHECK(s.mu1(1) == doctest::Approx((1 / std::sqrt(2.0) + 0.8) / 2).epsilon(1e-14));
    CHECK(s.mu1(0) == doctest::Approx(0.6536).epsilon(1e-4));
    CHECK(s.mu1(1) == doctest::Approx(0.7536).epsilon(1e-4));
    // The adjusted prediction uses the updated centroids.
    CHECK(r.y_adapted == doctest::Approx(sigmoid(f.dot(s.mu1 - s.mu0))).epsilon(1e-15));
    CHECK(r.y_offline == sigmoid(7.0));
  }
  SUBCASE("closed gate") {
    auto s = init_adapter(3, 0.0);
    const VectorXd f = (VectorXd(3) << 0.3, -1.0, 2.5).finished();
    for (int k = 0; k < 5; ++k) {
      const auto r = adapt_step(s, f);
      CHECK_FALSE(r.accepted);
      CHECK(r.y_adapted == doctest::Approx(sigmoid(2 * f.sum() / std::sqrt(3.0))).epsilon(1e-14));
    }
    CHECK(s.n0 == 1);
    CHECK(s.n1 == 1);
  }
  SUBCASE("zero contribution is never accepted") {
    auto s = init_adapter(3, 1.0);
    const auto r = adapt_step(s, VectorXd::Zero(3));
    CHECK_FALSE(r.accepted);
    CHECK(r.y_adapted == 0.5);
  }
  SUBCASE("entropy equal to the threshold is gated out") {
    const VectorXd f = (VectorXd(1) << 2.0).finished();
    auto s = init_adapter(1, entropy(sigmoid(2.0)));
    CHECK_FALSE(adapt_step(s, f).accepted);
  }
}

TEST_CASE("streaming centroids equal batch means") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0, 1);
  const int dim = 6;
  SUBCASE("ten class-1 vectors") {
    auto s = init_adapter(dim, std::numbers::ln2 + 1);
    const VectorXd init = s.mu1;
    std::vector<VectorXd> acc;
    for (int k = 0; k < 10; ++k) {
      VectorXd v = VectorXd::NullaryExpr(dim, [&] { return std::abs(g(rng)); });
      REQUIRE(adapt_step(s, v).accepted);
      acc.push_back(v);
    }
    CHECK((s.mu1 - oracle::batch_centroid(init, acc)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("mixed classes with gating") {
    auto s = init_adapter(dim, 0.3);
    const VectorXd init1 = s.mu1, init0 = s.mu0;
    std::vector<VectorXd> acc0, acc1;
    for (int k = 0; k < 1000; ++k) {
      const VectorXd v = VectorXd::NullaryExpr(dim, [&] { return 2 * g(rng); });
      const auto r = adapt_step(s, v);
      if (r.accepted) (r.class_assigned ? acc1 : acc0).push_back(v);
    }
    CHECK(acc0.size() > 10);
    CHECK(acc1.size() > 10);
    CHECK((s.mu1 - oracle::batch_centroid(init1, acc1)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s.mu0 - oracle::batch_centroid(init0, acc0)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s.mu1.norm() <= 1.0 + 1e-12);
    CHECK(s.mu0.norm() <= 1.0 + 1e-12);
    CHECK(long(acc1.size()) + 1 == s.n1);
  }
}

TEST_CASE("stream behaviour") {
  const auto stream = random_stream(2000, 5, 1.0, 32);

  SUBCASE("empty stream") {
    auto s = init_adapter(5, 0.5);
    const auto out = run_stream(identity_forward, s, stream.slice(0, 0));
    CHECK(out.y_offline.empty());
    CHECK(out.y_adapted.empty());
  }
  SUBCASE("closed gate keeps offline decisions") {
    auto s = init_adapter(5, 0.0);
    const auto out = run_stream(identity_forward, s, stream);
    for (std::size_t i = 0; i < out.y_offline.size(); ++i) {
      CHECK((out.y_adapted[i] >= 0.5) == (out.y_offline[i] >= 0.5));
      CHECK(out.accepted[i] == 0);
    }
  }
  SUBCASE("raising the threshold only adds accepted samples") {
    std::vector<int> prev(std::size_t(stream.n_windows()), 0);
    for (double h0 : default_h0_grid()) {
      auto s = init_adapter(5, h0);
      const auto out = run_stream(identity_forward, s, stream);
      for (std::size_t i = 0; i < prev.size(); ++i) CHECK(out.accepted[i] >= prev[i]);
      prev = out.accepted;
    }
  }
  SUBCASE("the teacher is not modified by a stream") {
    const auto data = testutil::gaussian_classes(50, 5, 2.0, 33);
    auto rng = make_rng(4, "init");
    NamModel teacher;
    teacher.net = init_nam(5, {10, Activation::ExU}, rng);
    teacher.scaler = Scaler::identity(5);
    const auto mt = distill(teacher, data, 2);
    const auto before_nam = model_fingerprint(teacher);
    auto s = init_adapter(5, 0.6);
    run_stream([&](const VectorXd& x, VectorXd& c) { c = teacher.forward(x).contrib; }, s, stream);
    run_stream([&](const VectorXd& x, VectorXd& c) { mtnam_forward_into(mt, x, c); }, s, stream);
    CHECK(model_fingerprint(teacher) == before_nam);
    CHECK(mt.teacher_hash == before_nam);
  }
}

TEST_CASE("entropy threshold tuning") {
  const auto val = random_stream(300, 4, 1.0, 34);
  CHECK(tune_h0(identity_forward, val, {0.0}).h0 == 0.0);

  const auto r = tune_h0(identity_forward, val, {0.0, std::numbers::ln2});
  REQUIRE(r.report.size() == 2);
  const auto best = r.report[0].f1 > r.report[1].f1 ? 0.0 : std::numbers::ln2;
  CHECK(r.h0 == best);

  const auto grid = default_h0_grid();
  CHECK(grid.size() == 20);
  CHECK(grid.front() == doctest::Approx(1e-4));
  CHECK(grid.back() == std::numbers::ln2);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(tune_h0(identity_forward, val, grid).report.size() == 20);
  CHECK_THROWS_AS(tune_h0(identity_forward, val, {}), Error);
}

TEST_CASE("stream CSV") {
  const auto dir = testutil::scratch("stream_csv");
  const auto val = random_stream(4, 2, 1.0, 35);
  auto s = init_adapter(2, 0.5);
  const auto out = run_stream(identity_forward, s, val);
  write_stream_csv((dir / "s.csv").string(), val, out, "config_hash=x");
  const auto text = testutil::read_text(dir / "s.csv");
  CHECK(text.rfind("# config_hash=x\n" + stream_csv_header() + "\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
