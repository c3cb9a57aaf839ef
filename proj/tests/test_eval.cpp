#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtnam/eval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace mtnam;

namespace {

/// n one-second windows labelled by overlap with the events.
FeatureMatrix timeline(int n, const std::vector<Interval>& events) {
  MatrixXd rows = MatrixXd::Zero(n, 1);
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    rows(i, 0) = i;
    int y = 0;
    for (const auto& e : events) y |= (i < e.end_s && e.start_s < i + 1);
    labels.push_back(y);
  }
  return testutil::make_features(rows, labels);
}

}  // namespace

TEST_CASE("chronological split") {
  SUBCASE("nominal cuts already hold one event each") {
    const std::vector<Interval> ev{{10, 13}, {25, 28}};
    const auto s = chronological_split(timeline(100, ev), ev);
    CHECK(s.train.n_windows() == 15);
    CHECK(s.val.n_windows() == 15);
    CHECK(s.test.n_windows() == 70);
  }
  SUBCASE("both events early") {
    const std::vector<Interval> ev{{2, 4}, {6, 8}};
    const auto s = chronological_split(timeline(100, ev), ev);
    CHECK(s.train.count_ictal() == 2);
    CHECK(s.val.count_ictal() == 2);
    CHECK(s.val_end > 8);
  }
  SUBCASE("train cut moves past a long first event") {
    const std::vector<Interval> ev{{10, 20}, {40, 45}, {80, 90}};
    const auto s = chronological_split(timeline(100, ev), ev);
    CHECK(s.train_end == 20);
    CHECK(s.val_end == 45);
    CHECK(s.test.count_ictal() == 10);
  }
  SUBCASE("timestamps increase within and across splits") {
    const std::vector<Interval> ev{{5, 9}, {30, 33}, {60, 70}};
    const auto s = chronological_split(timeline(100, ev), ev);
    std::vector<double> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) {
      all.insert(all.end(), part->window_start_s.begin(), part->window_start_s.end());
    }
    CHECK(all.size() == 100);
    CHECK(std::adjacent_find(all.begin(), all.end(), std::greater_equal<>()) == all.end());
  }
  SUBCASE("errors") {
    const std::vector<Interval> one{{10, 13}};
    CHECK_THROWS_AS(chronological_split(timeline(100, one), one), Error);
    const std::vector<Interval> late{{10, 13}, {95, 100}};
    CHECK_THROWS_AS(chronological_split(timeline(100, late), late), Error);
    SplitSpec bad{0.5, 0.5, 0.5};
    CHECK_THROWS_AS(chronological_split(timeline(100, {{1, 2}, {50, 51}}), {{1, 2}, {50, 51}}, bad), Error);
  }
}

TEST_CASE("confusion") {
  const std::vector<int> y{1, 0};
  auto c = confusion(std::vector<double>{0.9, 0.1}, y);
  CHECK(c.sensitivity == 1.0);
  CHECK(c.specificity == 1.0);
  c = confusion(std::vector<double>{0.4, 0.6}, y);
  CHECK(c.sensitivity == 0.0);
  CHECK(c.specificity == 0.0);
  c = confusion(std::vector<double>{0.7, 0.2, 0.1}, std::vector<int>{0, 0, 0});
  CHECK(c.no_positives);
  CHECK(c.sensitivity == 1.0);
  CHECK(c.specificity == doctest::Approx(2.0 / 3.0));
  CHECK(confusion(std::vector<double>{0.5}, std::vector<int>{1}).tp == 1);
}

TEST_CASE("event sensitivity on crafted cases") {
  auto run = [](const std::vector<int>& pred, const std::vector<double>& starts, const std::vector<Interval>& ev) {
    return event_sensitivity(pred, starts, 1.0, ev);
  };
  CHECK(run({1}, {15}, {{10, 20}}).sensitivity == 1.0);
  CHECK(run({0, 1, 0}, {12, 35, 50}, {{10, 20}, {30, 40}}).sensitivity == 0.5);
  CHECK(run({1, 0, 1}, {0, 15, 25}, {{10, 20}}).sensitivity == 0.0);
  // A window [9, 10) touches but does not overlap [10, 20).
  CHECK(run({1}, {9}, {{10, 20}}).sensitivity == 0.0);
  // A window [9.5, 10.5) overlaps it.
  CHECK(run({1}, {9.5}, {{10, 20}}).sensitivity == 1.0);
  const auto three = run({1, 1, 0, 0}, {1, 5, 9, 20}, {{0, 2}, {5.5, 6}, {20, 21}});
  CHECK(three.n_events == 3);
  CHECK(three.n_detected == 2);
  CHECK(run({1}, {1}, {}).undefined);
}

TEST_CASE("window and event sensitivity agree at the extremes") {
  std::mt19937_64 rng(41);
  std::bernoulli_distribution coin(0.3);
  const std::vector<Interval> ev{{3, 6}, {12, 13}, {20, 25}};
  const auto fm = timeline(30, ev);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> pred;
    std::vector<double> scores;
    for (int i = 0; i < 30; ++i) {
      pred.push_back(coin(rng) ? 1 : 0);
      scores.push_back(pred.back());
    }
    const double win = confusion(scores, fm.labels).sensitivity;
    const double evt = event_sensitivity(pred, fm.window_start_s, 1.0, ev).sensitivity;
    if (win == 1.0) CHECK(evt == 1.0);
    if (evt == 0.0) CHECK(win == 0.0);
  }
}

TEST_CASE("AUROC") {
  CHECK(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{0, 1, 1}) == 0.5);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);

  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> n_dist(2, 20), level(0, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = n_dist(rng);
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      s.push_back(level(rng) / 5.0);
      y.push_back(i < 1 ? 0 : (i < 2 ? 1 : level(rng) % 2));
    }
    const double a = auroc(s, y);
    CHECK(std::abs(a - oracle::pairwise_auroc(s, y)) <= 1e-12);
    std::vector<double> t;
    for (double v : s) t.push_back(std::exp(3 * v) - 7);
    CHECK(auroc(t, y) == a);
  }
}

TEST_CASE("weighted F1") {
  const std::vector<int> y{1, 1, 0, 0};
  CHECK(f1_weighted(std::vector<double>{0.9, 0.8, 0.1, 0.2}, y) == 1.0);
  CHECK(f1_weighted(std::vector<double>{0.9, 0.9, 0.9, 0.9}, y) == doctest::Approx(1.0 / 3.0));
  CHECK(f1_weighted(std::vector<double>{0.1, 0.2, 0.9, 0.8}, y) == 0.0);
  // Supports 1 and 3: F1+ = 2/3, F1- = 4/5.
  CHECK(f1_weighted(std::vector<double>{0.9, 0.9, 0.1, 0.1}, std::vector<int>{1, 0, 0, 0}) ==
        doctest::Approx(0.25 * 2.0 / 3.0 + 0.75 * 0.8));
}

TEST_CASE("metrics report") {
  const std::vector<Interval> ev{{2, 4}};
  const auto fm = timeline(10, ev);
  std::vector<double> scores(10, 0.1);
  scores[3] = 0.9;
  const auto r = evaluate("m", scores, fm, ev);
  CHECK(r.sensitivity == 0.5);
  CHECK(r.specificity == 1.0);
  CHECK(r.event_sensitivity == 1.0);
  CHECK(r.n_events == 1);
  CHECK(r.auroc == 0.75);  // the missed ictal window ties every negative
  CHECK(r.to_key_value().find("model=m") != std::string::npos);
  const auto header = MetricsReport::csv_header();
  const auto row = r.to_csv_row();
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));

  const auto clipped = events_within(fm.slice(3, 10), {{2, 4}, {20, 30}});
  CHECK(clipped == std::vector<Interval>{{3, 4}});
}
