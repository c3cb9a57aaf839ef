#include "mtnam/pipeline.hpp"

#include "mtnam/bench.hpp"
#include "mtnam/model_io.hpp"
#include "mtnam/mtnam.hpp"
#include "mtnam/t3a.hpp"

#include <fstream>
#include <iostream>
#include <span>

namespace mtnam {

std::string files::mtnam_model(int depth) { return "mtnam_d" + std::to_string(depth) + ".model"; }
std::string files::stream(const std::string& model) { return "stream_" + model + ".csv"; }

std::string RunContext::header() const { return "config_hash=" + cfg.hash() + " format=1"; }

namespace {

std::ostream& log_of(const RunContext& ctx) {
  static std::ostream silent(nullptr);
  return ctx.log ? *ctx.log : silent;
}

std::filesystem::path require(const RunContext& ctx, const std::string& name, const char* producer) {
  const auto p = ctx.out(name);
  if (!std::filesystem::exists(p)) {
    throw missing_input("missing input " + p.string() + " (run '" + producer + "' first)");
  }
  if (ctx.warn_on_hash_mismatch) {
    const auto found = read_header_value(p, "config_hash");
    if (!found.empty() && found != ctx.cfg.hash()) {
      log_of(ctx) << "warning: " << p.string() << " was produced with config hash " << found << ", current is "
                  << ctx.cfg.hash() << '\n';
    }
  }
  return p;
}

void ensure_out_dir(const RunContext& ctx) { std::filesystem::create_directories(ctx.cfg.out_dir); }

std::span<const double> as_span(const VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double f1_of(const VectorXd& scores, const FeatureMatrix& fm) { return f1_weighted(as_span(scores), fm.labels, 0.5); }

VectorXd predict_rows(const FeatureMatrix& fm, const std::function<double(const VectorXd&)>& f) {
  VectorXd out(fm.n_windows());
  for (Eigen::Index r = 0; r < fm.n_windows(); ++r) out(r) = f(fm.rows.row(r).transpose());
  return out;
}

void write_metrics(const RunContext& ctx, const std::string& stem, const std::vector<MetricsReport>& reports) {
  std::ofstream csv(ctx.out(stem + ".csv"));
  std::ofstream txt(ctx.out(stem + ".txt"));
  if (!csv || !txt) throw missing_input("cannot write metrics under " + ctx.cfg.out_dir.string());
  csv << "# " << ctx.header() << '\n' << MetricsReport::csv_header() << '\n';
  txt << "# " << ctx.header() << '\n';
  for (const auto& r : reports) {
    csv << r.to_csv_row() << '\n';
    txt << r.to_key_value() << '\n';
  }
}

}  // namespace

PreparedData prepare_data(const RunContext& ctx) {
  const auto features = read_feature_csv(require(ctx, files::kFeatures, "extract"), ctx.cfg.window_s);
  PreparedData d;
  d.events = load_annotations(require(ctx, files::kEvents, "extract"));
  d.split = chronological_split(features, d.events, ctx.cfg.split);
  d.scaler = Scaler::fit(d.split.train);
  const auto downsampled = downsample_nonictal(d.split.train, ctx.cfg.train.downsample_ratio, ctx.cfg.seed);
  d.train = d.scaler.apply(downsampled);
  d.val = d.scaler.apply(d.split.val);
  d.test = d.scaler.apply(d.split.test);
  return d;
}

void cmd_synth(const RunContext& ctx) {
  if (ctx.cfg.source != DataSource::Synth) throw config_error("synth requires data.source = synth");
  ensure_out_dir(ctx);
  const auto rec = synth_recording(ctx.cfg.synth);
  write_csv_recording(ctx.out(files::kRecording), rec, ctx.header());
  write_annotations(ctx.out(files::kAnnotations), rec.seizures, ctx.header());
  log_of(ctx) << "synth: " << rec.n_channels() << " channels, " << rec.duration_s() << " s, " << rec.seizures.size()
              << " seizures\n";
}

void cmd_extract(const RunContext& ctx) {
  ensure_out_dir(ctx);
  Recording rec;
  switch (ctx.cfg.source) {
    case DataSource::Synth:
      rec = read_csv_recording(require(ctx, files::kRecording, "synth"), ctx.cfg.synth.fs);
      rec.seizures = load_annotations(require(ctx, files::kAnnotations, "synth"));
      break;
    case DataSource::Csv:
      if (!std::filesystem::exists(ctx.cfg.data_path)) throw missing_input("missing input " + ctx.cfg.data_path.string());
      rec = read_csv_recording(ctx.cfg.data_path, ctx.cfg.csv_fs);
      rec.seizures = load_annotations(ctx.cfg.annotations_path);
      break;
    case DataSource::Edf:
      if (!std::filesystem::exists(ctx.cfg.data_path)) throw missing_input("missing input " + ctx.cfg.data_path.string());
      rec = read_edf(ctx.cfg.data_path, ctx.cfg.channels);
      rec.seizures = load_annotations(ctx.cfg.annotations_path);
      break;
  }
  const auto fm = extract_features(rec, ctx.cfg.window_s);
  write_feature_csv(ctx.out(files::kFeatures), fm, ctx.header());
  write_annotations(ctx.out(files::kEvents), rec.seizures, ctx.header());
  log_of(ctx) << "extract: " << fm.n_windows() << " windows x " << fm.dim() << " features, " << fm.count_ictal()
              << " ictal\n";
}

void cmd_train(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto data = prepare_data(ctx);

  std::vector<NamCandidate> space;
  for (int h : cfg.nam_hidden) {
    for (auto a : cfg.nam_activations) space.push_back({{h, a}, cfg.train});
  }
  auto grid = grid_search(space, data.train, data.val);
  grid.model.scaler = data.scaler;
  save_nam(ctx.out(files::kNam), grid.model, ctx.header());
  {
    std::ofstream os(ctx.out(files::kGridReport));
    os << "# " << ctx.header() << '\n' << "hidden,activation,val_f1\n";
    for (const auto& row : grid.report) {
      os << row.candidate.arch.hidden << ',' << to_string(row.candidate.arch.activation) << ','
         << format_double(row.val_f1) << '\n';
    }
  }
  log_of(ctx) << "train: NAM h=" << grid.best.arch.hidden << " " << to_string(grid.best.arch.activation) << '\n';

  std::ofstream base(ctx.out(files::kBaselineReport));
  base << "# " << ctx.header() << '\n' << "model,param,val_f1\n";

  LrModel best_lr;
  double best_lr_f1 = -1.0;
  for (double l2 : cfg.lr_l2) {
    auto tc = cfg.train;
    tc.l2 = l2;
    auto m = train_lr(data.train, data.val, tc);
    const double f1 = f1_of(predict_rows(data.val, [&](const VectorXd& x) { return m.predict(x); }), data.val);
    base << "lr,l2=" << format_double(l2) << ',' << format_double(f1) << '\n';
    if (f1 > best_lr_f1) {
      best_lr_f1 = f1;
      best_lr = std::move(m);
    }
  }
  best_lr.scaler = data.scaler;
  save_lr(ctx.out(files::kLr), best_lr, ctx.header());

  DnnModel best_dnn;
  double best_dnn_f1 = -1.0;
  for (int h : cfg.dnn_hidden) {
    for (auto act : {DnnActivation::ReLU, DnnActivation::LeakyReLU}) {
      auto m = train_dnn(data.train, data.val, cfg.train, h, act);
      const double f1 = f1_of(predict_rows(data.val, [&](const VectorXd& x) { return m.predict(x); }), data.val);
      base << "dnn,hidden=" << h << (act == DnnActivation::ReLU ? ";relu" : ";leaky_relu") << ','
           << format_double(f1) << '\n';
      if (f1 > best_dnn_f1) {
        best_dnn_f1 = f1;
        best_dnn = std::move(m);
      }
    }
  }
  best_dnn.scaler = data.scaler;
  save_dnn(ctx.out(files::kDnn), best_dnn, ctx.header());
}

void cmd_distill(const RunContext& ctx) {
  const auto teacher = load_nam(require(ctx, files::kNam, "train"));
  const auto data = prepare_data(ctx);
  for (int d : ctx.cfg.distill_depths) {
    const auto student = distill(teacher, data.train, d);
    save_mtnam(ctx.out(files::mtnam_model(d)), student, ctx.header());
  }
  log_of(ctx) << "distill: " << ctx.cfg.distill_depths.size() << " depth(s)\n";
}

void cmd_eval(const RunContext& ctx) {
  const auto data = prepare_data(ctx);
  const auto nam = load_nam(require(ctx, files::kNam, "train"));
  const auto lr = load_lr(require(ctx, files::kLr, "train"));
  const auto dnn = load_dnn(require(ctx, files::kDnn, "train"));

  std::vector<MetricsReport> reports;
  auto add = [&](const std::string& name, const VectorXd& scores) {
    reports.push_back(evaluate(name, as_span(scores), data.test, data.events));
  };
  add("nam", nam_predict(nam.net, data.test.rows));
  for (int d : ctx.cfg.distill_depths) {
    const auto mt = load_mtnam(require(ctx, files::mtnam_model(d), "distill"));
    add("mt" + std::to_string(d) + "_nam", mtnam_predict(mt, data.test.rows));
  }
  add("lr", predict_rows(data.test, [&](const VectorXd& x) { return lr.predict(x); }));
  add("dnn", predict_rows(data.test, [&](const VectorXd& x) { return dnn.predict(x); }));
  write_metrics(ctx, files::kMetricsOffline, reports);
  for (const auto& r : reports) {
    log_of(ctx) << "eval: " << r.model << " sens=" << r.sensitivity << " spec=" << r.specificity << '\n';
  }
}

void cmd_adapt_eval(const RunContext& ctx) {
  const auto data = prepare_data(ctx);
  const auto nam = load_nam(require(ctx, files::kNam, "train"));

  std::vector<std::pair<std::string, ForwardFn>> models;
  models.emplace_back("nam", [&nam](const VectorXd& x, VectorXd& contrib) { contrib = nam.forward(x).contrib; });
  std::vector<MtNamModel> students;
  students.reserve(ctx.cfg.distill_depths.size());
  for (int d : ctx.cfg.distill_depths) {
    students.push_back(load_mtnam(require(ctx, files::mtnam_model(d), "distill")));
    const auto* mt = &students.back();
    models.emplace_back("mt" + std::to_string(d) + "_nam",
                        [mt](const VectorXd& x, VectorXd& contrib) { mtnam_forward_into(*mt, x, contrib); });
  }

  std::vector<MetricsReport> reports;
  std::ofstream h0_report(ctx.out(files::kH0Report));
  h0_report << "# " << ctx.header() << '\n' << "model,h0,val_f1,selected\n";
  for (const auto& [name, forward] : models) {
    const auto tuned = tune_h0(forward, data.val, ctx.cfg.h0_grid);
    for (const auto& row : tuned.report) {
      h0_report << name << ',' << format_double(row.h0) << ',' << format_double(row.f1) << ','
                << (row.h0 == tuned.h0 ? 1 : 0) << '\n';
    }
    auto adapter = init_adapter(data.test.dim(), tuned.h0);
    const auto stream = run_stream(forward, adapter, data.test);
    write_stream_csv(ctx.out(files::stream(name + "_t3a")).string(), data.test, stream, ctx.header());
    reports.push_back(evaluate(name + "_t3a", stream.y_adapted, data.test, data.events));
    log_of(ctx) << "adapt-eval: " << name << " H0=" << tuned.h0 << " sens=" << reports.back().sensitivity
                << " spec=" << reports.back().specificity << '\n';
  }
  write_metrics(ctx, files::kMetricsAdapted, reports);
}

void cmd_bench(const RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto data = prepare_data(ctx);
  const auto nam = load_nam(require(ctx, files::kNam, "train"));
  const auto lr = load_lr(require(ctx, files::kLr, "train"));
  const auto dnn = load_dnn(require(ctx, files::kDnn, "train"));

  std::vector<VectorXd> inputs;
  for (Eigen::Index r = 0; r < data.test.n_windows(); ++r) inputs.push_back(data.test.rows.row(r).transpose());
  const auto dim = static_cast<std::int64_t>(nam.dim());

  std::vector<BenchRow> rows;
  auto bench = [&](const std::string& name, const ModelDescriptor& desc, const std::function<double(std::size_t)>& f) {
    rows.push_back({name, count_flops(desc), measure_latency(name, f, inputs.size(), cfg.bench_repetitions,
                                                              cfg.bench_warmups)});
  };

  VectorXd contrib;
  bench("nam", {ModelKind::Nam, dim, nam.arch.hidden, 0, false},
        [&](std::size_t i) { return nam.forward(inputs[i]).y_hat; });
  std::vector<MtNamModel> students;
  for (int d : cfg.distill_depths) students.push_back(load_mtnam(require(ctx, files::mtnam_model(d), "distill")));
  for (const auto& mt : students) {
    const std::string name = "mt" + std::to_string(mt.depth) + "_nam";
    bench(name, {ModelKind::MtNam, dim, 0, mt.depth, false},
          [&](std::size_t i) { return mtnam_forward_into(mt, inputs[i], contrib); });
    auto adapter = init_adapter(mt.dim(), cfg.h0_grid.back());
    bench(name + "_t3a", {ModelKind::MtNam, dim, 0, mt.depth, true}, [&](std::size_t i) {
      mtnam_forward_into(mt, inputs[i], contrib);
      return adapt_step(adapter, contrib).y_adapted;
    });
  }
  bench("lr", {ModelKind::Lr, dim, 0, 0, false}, [&](std::size_t i) { return lr.predict(inputs[i]); });
  bench("dnn", {ModelKind::Dnn, dim, dnn.W1.rows(), 0, false}, [&](std::size_t i) { return dnn.predict(inputs[i]); });

  std::ofstream os(ctx.out(files::kBench));
  os << "# " << ctx.header() << " flop_rules=" << flop_rules::kVersion << '\n' << bench_csv_header() << '\n';
  for (const auto& r : rows) os << bench_csv_row(r, cfg.host_tag) << '\n';
  for (const auto& r : rows) {
    log_of(ctx) << "bench: " << r.model << " flops=" << r.flops << " mean_us=" << r.latency.mean_us << '\n';
  }
}

void cmd_all(const RunContext& ctx) {
  if (ctx.cfg.source == DataSource::Synth) cmd_synth(ctx);
  cmd_extract(ctx);
  cmd_train(ctx);
  cmd_distill(ctx);
  cmd_eval(ctx);
  cmd_adapt_eval(ctx);
  cmd_bench(ctx);
}

}  // namespace mtnam
