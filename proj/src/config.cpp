#include "mtnam/config.hpp"

#include "mtnam/t3a.hpp"

#include <fstream>
#include <functional>
#include <sstream>

namespace mtnam {

namespace {

std::string trim_copy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, sep)) {
    item = trim_copy(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const Error&) {
    throw config_error(key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<double>(static_cast<long long>(d))) throw config_error(key + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

std::vector<int> to_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(static_cast<int>(to_int(key, item)));
  return out;
}

const char* kDefaults = R"(# Pipeline configuration: "section.key = value".
run.seed = 42
output.dir = out

# data.source: synth | csv | edf
data.source = synth
data.path =
data.annotations =
data.fs = 256
data.channels =

synth.n_channels = 4
synth.duration_s = 1800
synth.fs = 256
synth.seizures = 120:160, 400:440, 900:950, 1400:1450
synth.noise_scale = 10
# low_hz:high_hz:amplitude_uV per band
synth.band_effects = 4:8:40, 13:30:20, 30:50:8
synth.line_length_boost = 1.0

split.train = 0.15
split.val = 0.15
split.test = 0.70

features.window_s = 1

nam.hidden = 10, 50, 100, 200
nam.activations = relu, exu

train.learning_rate = 0.001
train.epochs = 200
train.batch_size = 128
train.beta1 = 0.9
train.beta2 = 0.999
train.epsilon = 1e-8
train.downsample_ratio = 10
train.patience = 20

baselines.lr_l2 = 0.01, 0.1, 1
baselines.dnn_hidden = 50, 100, 200, 300

distill.depths = 1, 2, 4

# "default" = 20 log-spaced values in [1e-4, ln 2]
t3a.h0_grid = default

bench.repetitions = 30
bench.warmups = 5
bench.host_tag = local
)";

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.seed", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         const auto s = to_int(k, v);
         if (s < 0) throw config_error(k + ": seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output.dir", [](PipelineConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
      {"data.source", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (v == "synth") c.source = DataSource::Synth;
         else if (v == "csv") c.source = DataSource::Csv;
         else if (v == "edf") c.source = DataSource::Edf;
         else throw config_error(k + ": expected synth, csv or edf");
       }},
      {"data.path", [](PipelineConfig& c, const std::string&, const std::string& v) { c.data_path = v; }},
      {"data.annotations", [](PipelineConfig& c, const std::string&, const std::string& v) { c.annotations_path = v; }},
      {"data.fs", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.csv_fs = static_cast<int>(to_int(k, v)); }},
      {"data.channels", [](PipelineConfig& c, const std::string&, const std::string& v) { c.channels = split_list(v); }},
      {"synth.n_channels", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.synth.n_channels = static_cast<int>(to_int(k, v)); }},
      {"synth.duration_s", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.synth.duration_s = to_double(k, v); }},
      {"synth.fs", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.synth.fs = static_cast<int>(to_int(k, v)); }},
      {"synth.seizures", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.synth.seizures.clear();
         for (const auto& item : split_list(v)) {
           const auto parts = split_list(item, ':');
           if (parts.size() != 2) throw config_error(k + ": expected start:end pairs");
           c.synth.seizures.push_back({to_double(k, parts[0]), to_double(k, parts[1])});
         }
       }},
      {"synth.noise_scale", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.synth.noise_scale = to_double(k, v); }},
      {"synth.band_effects", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.synth.band_effects.clear();
         for (const auto& item : split_list(v)) {
           const auto parts = split_list(item, ':');
           if (parts.size() != 3) throw config_error(k + ": expected low:high:amplitude triples");
           c.synth.band_effects.push_back({to_double(k, parts[0]), to_double(k, parts[1]), to_double(k, parts[2])});
         }
       }},
      {"synth.line_length_boost", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.synth.line_length_boost = to_double(k, v); }},
      {"split.train", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.split.train = to_double(k, v); }},
      {"split.val", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.split.val = to_double(k, v); }},
      {"split.test", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.split.test = to_double(k, v); }},
      {"features.window_s", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.window_s = to_double(k, v); }},
      {"nam.hidden", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.nam_hidden = to_ints(k, v); }},
      {"nam.activations", [](PipelineConfig& c, const std::string&, const std::string& v) {
         c.nam_activations.clear();
         for (const auto& item : split_list(v)) c.nam_activations.push_back(parse_activation(item));
       }},
      {"train.learning_rate", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.learning_rate = to_double(k, v); }},
      {"train.epochs", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.epochs = static_cast<int>(to_int(k, v)); }},
      {"train.batch_size", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.batch_size = static_cast<int>(to_int(k, v)); }},
      {"train.beta1", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.beta1 = to_double(k, v); }},
      {"train.beta2", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.beta2 = to_double(k, v); }},
      {"train.epsilon", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.epsilon = to_double(k, v); }},
      {"train.downsample_ratio", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.downsample_ratio = static_cast<int>(to_int(k, v)); }},
      {"train.patience", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.train.patience = static_cast<int>(to_int(k, v)); }},
      {"baselines.lr_l2", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.lr_l2 = to_doubles(k, v); }},
      {"baselines.dnn_hidden", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.dnn_hidden = to_ints(k, v); }},
      {"distill.depths", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.distill_depths = to_ints(k, v); }},
      {"t3a.h0_grid", [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.h0_grid = v == "default" ? default_h0_grid() : to_doubles(k, v);
       }},
      {"bench.repetitions", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.bench_repetitions = static_cast<int>(to_int(k, v)); }},
      {"bench.warmups", [](PipelineConfig& c, const std::string& k, const std::string& v) { c.bench_warmups = static_cast<int>(to_int(k, v)); }},
      {"bench.host_tag", [](PipelineConfig& c, const std::string&, const std::string& v) { c.host_tag = v; }},
  };
  return table;
}

std::map<std::string, std::string> parse_entries(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim_copy(line.substr(0, eq));
    if (!setters().count(key)) throw config_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    entries[key] = trim_copy(line.substr(eq + 1));
  }
  return entries;
}

void apply_all(PipelineConfig& c) {
  for (const auto& [key, value] : c.entries) setters().at(key)(c, key, value);
  c.train.seed = c.seed;
  c.synth.seed = sub_seed(c.seed, "data");
}

}  // namespace

std::string default_config_text() { return kDefaults; }

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  c.entries = parse_entries(kDefaults);
  for (auto& [k, v] : parse_entries(text)) c.entries[k] = v;
  apply_all(c);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw missing_input("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string PipelineConfig::hash() const {
  std::string canonical;
  for (const auto& [k, v] : entries) {
    if (k == "output.dir") continue;
    canonical += k + "=" + v + "\n";
  }
  return hex64(fnv1a(canonical));
}

void PipelineConfig::set_seed(std::uint64_t s) {
  entries["run.seed"] = std::to_string(s);
  seed = s;
  train.seed = s;
  synth.seed = sub_seed(s, "data");
}

void PipelineConfig::validate() const {
  if (source == DataSource::Synth) {
    synth.validate();
  } else {
    if (data_path.empty()) throw config_error("data.path is required for csv and edf sources");
    if (annotations_path.empty()) throw config_error("data.annotations is required for csv and edf sources");
    if (source == DataSource::Csv && csv_fs <= 0) throw config_error("data.fs must be positive");
  }
  split.validate();
  if (!(window_s > 0.0)) throw config_error("features.window_s must be positive");
  if (nam_hidden.empty() || nam_activations.empty()) throw config_error("NAM grid is empty");
  for (int h : nam_hidden) {
    if (h <= 0) throw config_error("nam.hidden values must be positive");
  }
  train.validate();
  for (double l : lr_l2) {
    if (l < 0.0) throw config_error("baselines.lr_l2 values must be non-negative");
  }
  for (int h : dnn_hidden) {
    if (h <= 0) throw config_error("baselines.dnn_hidden values must be positive");
  }
  if (distill_depths.empty()) throw config_error("distill.depths is empty");
  for (int d : distill_depths) {
    if (d <= 0 || d > 16) throw config_error("distill.depths values must lie in 1..16");
  }
  if (h0_grid.empty()) throw config_error("t3a.h0_grid is empty");
  for (double h : h0_grid) {
    if (!(h >= 0.0)) throw config_error("t3a.h0_grid values must be non-negative");
  }
  if (bench_repetitions < 30 || bench_warmups < 5) throw config_error("bench needs repetitions >= 30 and warmups >= 5");
}

}  // namespace mtnam
