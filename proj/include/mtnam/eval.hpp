#pragma once

#include "mtnam/features.hpp"
#include "mtnam/signal_io.hpp"

#include <span>
#include <string>
#include <vector>

namespace mtnam {

struct SplitSpec {
  double train{0.15};
  double val{0.15};
  double test{0.70};

  void validate() const;
};

struct Split {
  FeatureMatrix train, val, test;
  Eigen::Index train_end{0};  // first row of val
  Eigen::Index val_end{0};    // first row of test
};

/// Contiguous time-ordered split. The nominal cut points are moved the
/// least amount needed so that train and val each hold one complete event.
Split chronological_split(const FeatureMatrix& fm, const std::vector<Interval>& events, const SplitSpec& spec = {});

struct Confusion {
  long tp{0}, fp{0}, tn{0}, fn{0};
  double sensitivity{1.0};
  double specificity{1.0};
  bool no_positives{false};  // sensitivity undefined, reported as 1
  bool no_negatives{false};  // specificity undefined, reported as 1
};

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct EventResult {
  double sensitivity{0.0};
  int n_events{0};
  int n_detected{0};
  bool undefined{false};
};

/// An event counts as detected when any window [t, t + window_s) that
/// overlaps it is predicted positive.
EventResult event_sensitivity(std::span<const int> predictions, std::span<const double> window_start_s,
                              double window_s, const std::vector<Interval>& events);

/// Mann-Whitney AUROC with ties counted one half.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Support-weighted mean of the class-0 and class-1 F1 scores.
double f1_weighted(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct MetricsReport {
  std::string model;
  double sensitivity{0};
  double specificity{0};
  double f1_weighted{0};
  double auroc{0};
  double event_sensitivity{0};
  long tp{0}, fp{0}, tn{0}, fn{0};
  int n_events{0};
  int n_events_detected{0};

  std::string to_key_value() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

MetricsReport evaluate(const std::string& model, std::span<const double> scores, const FeatureMatrix& fm,
                       const std::vector<Interval>& events, double threshold = 0.5);

/// Events clipped to the time range covered by the windows of `fm`.
std::vector<Interval> events_within(const FeatureMatrix& fm, const std::vector<Interval>& events);

}  // namespace mtnam
