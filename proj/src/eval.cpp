#include "mtnam/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mtnam {

void SplitSpec::validate() const {
  if (train <= 0 || val <= 0 || test <= 0) throw config_error("split fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw config_error("split fractions must sum to 1");
}

namespace {

struct EventSpan {
  Eigen::Index first;
  Eigen::Index last;
};

bool overlaps(double w0, double w1, const Interval& e) { return w0 < e.end_s && e.start_s < w1; }

std::vector<EventSpan> event_spans(const FeatureMatrix& fm, const std::vector<Interval>& events) {
  std::vector<EventSpan> spans;
  for (const auto& e : events) {
    EventSpan s{-1, -1};
    for (Eigen::Index r = 0; r < fm.n_windows(); ++r) {
      const double t0 = fm.window_start_s[static_cast<std::size_t>(r)];
      if (overlaps(t0, t0 + fm.window_s, e)) {
        if (s.first < 0) s.first = r;
        s.last = r;
      }
    }
    if (s.first >= 0) spans.push_back(s);
  }
  return spans;
}

}  // namespace

Split chronological_split(const FeatureMatrix& fm, const std::vector<Interval>& events, const SplitSpec& spec) {
  spec.validate();
  const auto sorted = validate_intervals(events);
  const auto spans = event_spans(fm, sorted);
  if (spans.size() < 2) {
    throw data_error("chronological split needs at least 2 seizure events (one for training, one for validation); got " +
                     std::to_string(spans.size()));
  }
  const Eigen::Index n = fm.n_windows();
  const auto nominal_train = static_cast<Eigen::Index>(std::llround(spec.train * double(n)));
  const auto nominal_val = static_cast<Eigen::Index>(std::llround((spec.train + spec.val) * double(n)));

  auto first_event_from = [&](Eigen::Index row) -> const EventSpan* {
    for (const auto& s : spans) {
      if (s.first >= row) return &s;
    }
    return nullptr;
  };

  // Train must hold the first event completely.
  Eigen::Index train_end = std::max(nominal_train, spans.front().last + 1);
  if (first_event_from(train_end) == nullptr) {
    // Every later event already fell inside train: cut right after the first
    // event so that validation can still receive one.
    train_end = spans.front().last + 1;
  }
  const EventSpan* val_event = first_event_from(train_end);
  if (val_event == nullptr) throw data_error("no complete seizure event left for the validation split");
  const Eigen::Index val_end = std::max({nominal_val, val_event->last + 1, train_end + 1});
  if (val_end >= n) throw data_error("recording too short: no windows left for the test split");

  Split out;
  out.train_end = train_end;
  out.val_end = val_end;
  out.train = fm.slice(0, train_end);
  out.val = fm.slice(train_end, val_end);
  out.test = fm.slice(val_end, n);
  return out;
}

Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw data_error("confusion: scores and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  c.no_positives = (c.tp + c.fn) == 0;
  c.no_negatives = (c.tn + c.fp) == 0;
  c.sensitivity = c.no_positives ? 1.0 : double(c.tp) / double(c.tp + c.fn);
  c.specificity = c.no_negatives ? 1.0 : double(c.tn) / double(c.tn + c.fp);
  return c;
}

EventResult event_sensitivity(std::span<const int> predictions, std::span<const double> window_start_s,
                              double window_s, const std::vector<Interval>& events) {
  if (predictions.size() != window_start_s.size()) throw data_error("event_sensitivity: length mismatch");
  EventResult r;
  r.n_events = static_cast<int>(events.size());
  if (events.empty()) {
    r.undefined = true;
    return r;
  }
  for (const auto& e : events) {
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i] == 1 && overlaps(window_start_s[i], window_start_s[i] + window_s, e)) {
        ++r.n_detected;
        break;
      }
    }
  }
  r.sensitivity = double(r.n_detected) / double(r.n_events);
  return r;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw data_error("auroc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum with midranks for ties.
  double pos_rank_sum = 0.0;
  long n_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (double(i + 1) + double(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const long n_neg = static_cast<long>(scores.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw data_error("auroc needs both classes present");
  const double u = pos_rank_sum - double(n_pos) * double(n_pos + 1) / 2.0;
  return u / (double(n_pos) * double(n_neg));
}

double f1_weighted(std::span<const double> scores, std::span<const int> labels, double threshold) {
  const auto c = confusion(scores, labels, threshold);
  auto f1 = [](long tp, long fp, long fn) {
    const long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * double(tp) / double(denom);
  };
  const double f1_pos = f1(c.tp, c.fp, c.fn);
  const double f1_neg = f1(c.tn, c.fn, c.fp);
  const double n_pos = double(c.tp + c.fn);
  const double n_neg = double(c.tn + c.fp);
  if (n_pos + n_neg == 0) return 0.0;
  return (n_pos * f1_pos + n_neg * f1_neg) / (n_pos + n_neg);
}

std::vector<Interval> events_within(const FeatureMatrix& fm, const std::vector<Interval>& events) {
  std::vector<Interval> out;
  if (fm.n_windows() == 0) return out;
  const double t0 = fm.window_start_s.front();
  const double t1 = fm.window_start_s.back() + fm.window_s;
  for (const auto& e : events) {
    if (overlaps(t0, t1, e)) out.push_back({std::max(e.start_s, t0), std::min(e.end_s, t1)});
  }
  return out;
}

MetricsReport evaluate(const std::string& model, std::span<const double> scores, const FeatureMatrix& fm,
                       const std::vector<Interval>& events, double threshold) {
  MetricsReport r;
  r.model = model;
  const auto c = confusion(scores, fm.labels, threshold);
  r.sensitivity = c.sensitivity;
  r.specificity = c.specificity;
  r.tp = c.tp;
  r.fp = c.fp;
  r.tn = c.tn;
  r.fn = c.fn;
  r.f1_weighted = f1_weighted(scores, fm.labels, threshold);
  r.auroc = (c.no_positives || c.no_negatives) ? std::nan("") : auroc(scores, fm.labels);

  std::vector<int> preds(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= threshold ? 1 : 0;
  const auto ev = event_sensitivity(preds, fm.window_start_s, fm.window_s, events_within(fm, events));
  r.event_sensitivity = ev.undefined ? std::nan("") : ev.sensitivity;
  r.n_events = ev.n_events;
  r.n_events_detected = ev.n_detected;
  return r;
}

std::string MetricsReport::to_key_value() const {
  std::ostringstream os;
  os << "model=" << model << '\n'
     << "sensitivity=" << format_double(sensitivity) << '\n'
     << "specificity=" << format_double(specificity) << '\n'
     << "f1_weighted=" << format_double(f1_weighted) << '\n'
     << "auroc=" << format_double(auroc) << '\n'
     << "event_sensitivity=" << format_double(event_sensitivity) << '\n'
     << "tp=" << tp << '\n'
     << "fp=" << fp << '\n'
     << "tn=" << tn << '\n'
     << "fn=" << fn << '\n'
     << "n_events=" << n_events << '\n'
     << "n_events_detected=" << n_events_detected << '\n';
  return os.str();
}

std::string MetricsReport::csv_header() {
  return "model,sensitivity,specificity,f1_weighted,auroc,event_sensitivity,tp,fp,tn,fn,n_events,n_events_detected";
}

std::string MetricsReport::to_csv_row() const {
  std::ostringstream os;
  os << model << ',' << format_double(sensitivity) << ',' << format_double(specificity) << ','
     << format_double(f1_weighted) << ',' << format_double(auroc) << ',' << format_double(event_sensitivity) << ','
     << tp << ',' << fp << ',' << tn << ',' << fn << ',' << n_events << ',' << n_events_detected;
  return os.str();
}

}  // namespace mtnam
