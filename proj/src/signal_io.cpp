#include "mtnam/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>

namespace mtnam {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_skippable(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

double parse_double(std::string_view field) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw data_error("non-numeric value '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    const auto piece = std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    out.emplace_back(trim(piece));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void Recording::validate() const {
  if (fs <= 0) throw data_error("sampling rate must be positive");
  if (channels.size() != samples.size()) throw data_error("channel label count does not match sample arrays");
  for (const auto& ch : samples) {
    if (ch.size() != n_samples()) throw data_error("channels have unequal sample counts");
  }
  const double dur = duration_s();
  for (std::size_t i = 0; i < seizures.size(); ++i) {
    const auto& s = seizures[i];
    if (!(s.start_s >= 0.0 && s.start_s < s.end_s && s.end_s <= dur)) {
      throw data_error("seizure interval outside recording or empty");
    }
    if (i > 0 && seizures[i - 1].end_s > s.start_s) throw data_error("seizure intervals overlap or are unsorted");
  }
}

std::vector<Interval> validate_intervals(std::vector<Interval> events) {
  for (const auto& e : events) {
    if (!std::isfinite(e.start_s) || !std::isfinite(e.end_s)) throw data_error("non-finite interval bound");
    if (e.start_s < 0.0 || e.end_s < 0.0) throw data_error("negative time in interval");
    if (e.start_s >= e.end_s) {
      throw data_error("invalid interval: start " + format_double(e.start_s) + " >= end " + format_double(e.end_s));
    }
  }
  std::sort(events.begin(), events.end(), [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i - 1].end_s > events[i].start_s) throw data_error("overlapping intervals");
  }
  return events;
}

// --- EDF ---------------------------------------------------------------

namespace {

std::string read_field(std::istream& in, std::size_t width, const char* what) {
  std::string buf(width, '\0');
  if (!in.read(buf.data(), static_cast<std::streamsize>(width))) {
    throw data_error(std::string("malformed EDF header: truncated at ") + what);
  }
  return std::string(trim(buf));
}

double header_number(const std::string& field, const char* what) {
  try {
    return parse_double(field);
  } catch (const Error&) {
    throw data_error(std::string("malformed EDF header: bad ") + what + " '" + field + "'");
  }
}

struct EdfSignal {
  std::string label;
  double phys_min{0}, phys_max{0}, dig_min{0}, dig_max{0};
  long samples_per_record{0};
};

}  // namespace

Recording read_edf(const std::filesystem::path& path, const std::vector<std::string>& select) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_input("cannot open EDF file " + path.string());

  read_field(in, 8, "version");
  read_field(in, 80, "patient");
  read_field(in, 80, "recording");
  read_field(in, 8, "start date");
  read_field(in, 8, "start time");
  const long header_bytes = static_cast<long>(header_number(read_field(in, 8, "header size"), "header size"));
  read_field(in, 44, "reserved");
  const long n_records = static_cast<long>(header_number(read_field(in, 8, "record count"), "record count"));
  const double record_s = header_number(read_field(in, 8, "record duration"), "record duration");
  const long ns = static_cast<long>(header_number(read_field(in, 4, "signal count"), "signal count"));
  if (ns <= 0 || record_s <= 0.0) throw data_error("malformed EDF header: no signals or non-positive record duration");
  if (header_bytes != 256 + 256 * ns) throw data_error("malformed EDF header: header size does not match signal count");

  std::vector<EdfSignal> sig(static_cast<std::size_t>(ns));
  for (auto& s : sig) s.label = read_field(in, 16, "label");
  for (long i = 0; i < ns; ++i) read_field(in, 80, "transducer");
  for (long i = 0; i < ns; ++i) read_field(in, 8, "physical dimension");
  for (auto& s : sig) s.phys_min = header_number(read_field(in, 8, "physical minimum"), "physical minimum");
  for (auto& s : sig) s.phys_max = header_number(read_field(in, 8, "physical maximum"), "physical maximum");
  for (auto& s : sig) s.dig_min = header_number(read_field(in, 8, "digital minimum"), "digital minimum");
  for (auto& s : sig) s.dig_max = header_number(read_field(in, 8, "digital maximum"), "digital maximum");
  for (long i = 0; i < ns; ++i) read_field(in, 80, "prefiltering");
  for (auto& s : sig) {
    s.samples_per_record = static_cast<long>(header_number(read_field(in, 8, "samples per record"), "samples per record"));
    if (s.samples_per_record <= 0) throw data_error("malformed EDF header: non-positive samples per record");
    if (s.dig_max <= s.dig_min) throw data_error("malformed EDF header: digital maximum <= minimum for " + s.label);
  }
  for (long i = 0; i < ns; ++i) read_field(in, 32, "signal reserved");

  std::vector<std::size_t> chosen;
  if (select.empty()) {
    for (std::size_t i = 0; i < sig.size(); ++i) chosen.push_back(i);
  } else {
    for (const auto& want : select) {
      const auto it = std::find_if(sig.begin(), sig.end(), [&](const EdfSignal& s) { return s.label == want; });
      if (it == sig.end()) throw data_error("EDF has no channel '" + want + "'");
      chosen.push_back(static_cast<std::size_t>(it - sig.begin()));
    }
  }
  const long spr = sig[chosen.front()].samples_per_record;
  for (auto c : chosen) {
    if (sig[c].samples_per_record != spr) throw data_error("mixed sampling rates among selected EDF channels");
  }
  const double fs_exact = spr / record_s;
  const int fs = static_cast<int>(std::lround(fs_exact));
  if (std::abs(fs_exact - fs) > 1e-9) throw data_error("EDF sampling rate is not an integer number of Hz");

  long record_values = 0;
  for (const auto& s : sig) record_values += s.samples_per_record;
  const auto record_bytes = static_cast<std::streamoff>(record_values) * 2;

  in.seekg(0, std::ios::end);
  const std::streamoff data_bytes = static_cast<std::streamoff>(in.tellg()) - header_bytes;
  long records = n_records;
  if (records < 0) records = static_cast<long>(data_bytes / record_bytes);
  if (data_bytes < records * record_bytes) {
    throw data_error("truncated EDF data: header declares " + std::to_string(records) + " records");
  }
  in.seekg(header_bytes);

  Recording rec;
  rec.fs = fs;
  for (auto c : chosen) rec.channels.push_back(sig[c].label);
  rec.samples.assign(chosen.size(), std::vector<double>(static_cast<std::size_t>(records * spr)));

  std::vector<unsigned char> buf(static_cast<std::size_t>(record_bytes));
  for (long r = 0; r < records; ++r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), record_bytes)) throw data_error("truncated EDF data record");
    std::size_t offset = 0;
    std::vector<std::size_t> start(sig.size());
    for (std::size_t s = 0; s < sig.size(); ++s) {
      start[s] = offset;
      offset += static_cast<std::size_t>(sig[s].samples_per_record) * 2;
    }
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const auto& s = sig[chosen[k]];
      const double gain = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
      const unsigned char* p = buf.data() + start[chosen[k]];
      for (long i = 0; i < spr; ++i) {
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[2 * i] | (p[2 * i + 1] << 8)));
        rec.samples[k][static_cast<std::size_t>(r * spr + i)] = (raw - s.dig_min) * gain + s.phys_min;
      }
    }
  }
  return rec;
}

// --- CSV ---------------------------------------------------------------

Recording read_csv_recording(const std::filesystem::path& path, int fs) {
  if (fs <= 0) throw config_error("sampling rate must be positive");
  std::ifstream in(path);
  if (!in) throw missing_input("cannot open recording CSV " + path.string());

  Recording rec;
  rec.fs = fs;
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (is_skippable(line)) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      rec.channels = std::move(cells);
      rec.samples.assign(rec.channels.size(), {});
      have_header = true;
      continue;
    }
    ++row;
    if (cells.size() != rec.channels.size()) {
      throw data_error("ragged row " + std::to_string(row) + ": expected " + std::to_string(rec.channels.size()) +
                       " values, got " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) rec.samples[c].push_back(parse_double(cells[c]));
  }
  if (row == 0) throw data_error("empty recording: no sample rows in " + path.string());
  return rec;
}

void write_csv_recording(const std::filesystem::path& path, const Recording& rec, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw missing_input("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (std::size_t c = 0; c < rec.channels.size(); ++c) out << (c ? "," : "") << rec.channels[c];
  out << '\n';
  for (std::size_t i = 0; i < rec.n_samples(); ++i) {
    for (std::size_t c = 0; c < rec.n_channels(); ++c) out << (c ? "," : "") << format_double(rec.samples[c][i]);
    out << '\n';
  }
}

std::vector<Interval> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw missing_input("cannot open annotation file " + path.string());
  std::vector<Interval> events;
  std::string line;
  while (std::getline(in, line)) {
    if (is_skippable(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() == 2 && cells[0] == "start_s") continue;
    if (cells.size() != 2) throw data_error("annotation row must be 'start_s,end_s': " + line);
    events.push_back({parse_double(cells[0]), parse_double(cells[1])});
  }
  return validate_intervals(std::move(events));
}

void write_annotations(const std::filesystem::path& path, const std::vector<Interval>& events,
                       const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw missing_input("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (const auto& e : events) out << format_double(e.start_s) << ',' << format_double(e.end_s) << '\n';
}

// --- synthetic generator -----------------------------------------------

void SynthConfig::validate() const {
  if (n_channels <= 0) throw config_error("synth: n_channels must be positive");
  if (fs <= 0) throw config_error("synth: fs must be positive");
  if (!(duration_s > 0.0)) throw config_error("synth: duration must be positive");
  if (noise_scale < 0.0) throw config_error("synth: noise scale must be non-negative");
  if (line_length_boost < 0.0) throw config_error("synth: line-length boost must be non-negative");
  for (const auto& b : band_effects) {
    if (b.amplitude < 0.0) throw config_error("synth: band effect amplitude must be non-negative");
    if (!(b.low_hz >= 0.0 && b.low_hz < b.high_hz)) throw config_error("synth: invalid band effect range");
  }
  try {
    const auto sorted = validate_intervals(seizures);
    for (const auto& s : sorted) {
      if (s.end_s > duration_s) throw config_error("synth: seizure extends past the recording");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw config_error(std::string("synth: ") + e.what());
  }
}

std::vector<BandEffect> SynthConfig::strong_effects() {
  return {{4.0, 8.0, 40.0}, {13.0, 30.0, 20.0}, {30.0, 50.0, 8.0}};
}

Recording synth_recording(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n = static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.fs));
  Recording rec;
  rec.fs = cfg.fs;
  rec.seizures = validate_intervals(cfg.seizures);
  for (int c = 0; c < cfg.n_channels; ++c) rec.channels.push_back("ch_" + std::to_string(c));
  rec.samples.assign(static_cast<std::size_t>(cfg.n_channels), std::vector<double>(n));

  // Background: first-order autoregressive (low-pass filtered) noise with
  // stationary standard deviation noise_scale.
  constexpr double pole = 0.9;
  const double drive = cfg.noise_scale * std::sqrt(1.0 - pole * pole);
  for (auto& ch : rec.samples) {
    double state = cfg.noise_scale * gauss(rng);
    for (auto& x : ch) {
      state = pole * state + drive * gauss(rng);
      x = state;
    }
  }

  const double gain = 1.0 + cfg.line_length_boost;
  for (const auto& sz : rec.seizures) {
    const auto first = static_cast<std::size_t>(std::ceil(sz.start_s * cfg.fs));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil(sz.end_s * cfg.fs)));
    for (auto& ch : rec.samples) {
      // Each channel expresses the seizure with its own strength and tones.
      const double involvement = 0.6 + 0.4 * unit(rng);
      std::vector<std::pair<double, double>> tones;  // (frequency, phase)
      for (const auto& b : cfg.band_effects) {
        tones.emplace_back(b.low_hz + (b.high_hz - b.low_hz) * unit(rng), 2.0 * std::numbers::pi * unit(rng));
      }
      for (std::size_t i = first; i < last; ++i) {
        const double t = double(i) / cfg.fs;
        double ictal = 0.0;
        for (std::size_t k = 0; k < tones.size(); ++k) {
          ictal += cfg.band_effects[k].amplitude * std::sin(2.0 * std::numbers::pi * tones[k].first * t + tones[k].second);
        }
        ch[i] = (1.0 + (gain - 1.0) * involvement) * ch[i] + involvement * ictal;
      }
    }
  }
  return rec;
}

}  // namespace mtnam
