#pragma once

#include "mtnam/eval.hpp"
#include "mtnam/nam.hpp"
#include "mtnam/signal_io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mtnam {

enum class DataSource { Synth, Csv, Edf };

struct PipelineConfig {
  DataSource source{DataSource::Synth};
  std::filesystem::path data_path;
  std::filesystem::path annotations_path;
  int csv_fs{256};
  std::vector<std::string> channels;  // EDF channel selection; empty = all

  SynthConfig synth;
  SplitSpec split;
  double window_s{1.0};

  std::vector<int> nam_hidden{10, 50, 100, 200};
  std::vector<Activation> nam_activations{Activation::ReLU, Activation::ExU};
  TrainConfig train;

  std::vector<double> lr_l2{0.01, 0.1, 1.0};
  std::vector<int> dnn_hidden{50, 100, 200, 300};

  std::vector<int> distill_depths{1, 2, 4};
  std::vector<double> h0_grid;

  int bench_repetitions{30};
  int bench_warmups{5};
  std::string host_tag{"local"};

  std::filesystem::path out_dir{"out"};
  std::uint64_t seed{42};

  /// Canonical "key = value" listing; the config hash is taken over it.
  std::map<std::string, std::string> entries;

  std::string hash() const;
  void set_seed(std::uint64_t s);
  void validate() const;
};

/// Parses "section.key = value" lines ('#' starts a comment). Unknown keys
/// and malformed values are config errors. Missing keys keep defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// The default configuration written out as text.
std::string default_config_text();

}  // namespace mtnam
