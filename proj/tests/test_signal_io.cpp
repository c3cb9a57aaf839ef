#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtnam/features.hpp"
#include "mtnam/signal_io.hpp"
#include "test_util.hpp"

#include <cstdint>
#include <cstdio>
#include <numeric>

using namespace mtnam;

namespace {

std::string field(const std::string& s, std::size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

struct EdfChannel {
  std::string label;
  double phys_min, phys_max;
  int dig_min, dig_max;
  std::vector<std::int16_t> digital;  // all records concatenated
};

/// Writes an EDF file byte by byte; `declared_records` may differ from
/// what is actually written to fake truncation.
std::filesystem::path write_edf(const std::filesystem::path& path, const std::vector<EdfChannel>& ch, int spr,
                                int records_written, int declared_records, double record_s = 1.0) {
  const auto ns = ch.size();
  std::string h;
  h += field("0", 8);
  h += field("X X X X", 80);
  h += field("Startdate X X X X", 80);
  h += field("01.01.01", 8);
  h += field("00.00.00", 8);
  h += field(std::to_string(256 + 256 * ns), 8);
  h += field("", 44);
  h += field(std::to_string(declared_records), 8);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", record_s);
  h += field(buf, 8);
  h += field(std::to_string(ns), 4);
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%g", v);
    return std::string(b);
  };
  for (const auto& c : ch) h += field(c.label, 16);
  for (std::size_t i = 0; i < ns; ++i) h += field("", 80);
  for (std::size_t i = 0; i < ns; ++i) h += field("uV", 8);
  for (const auto& c : ch) h += field(num(c.phys_min), 8);
  for (const auto& c : ch) h += field(num(c.phys_max), 8);
  for (const auto& c : ch) h += field(std::to_string(c.dig_min), 8);
  for (const auto& c : ch) h += field(std::to_string(c.dig_max), 8);
  for (std::size_t i = 0; i < ns; ++i) h += field("", 80);
  for (std::size_t i = 0; i < ns; ++i) h += field(std::to_string(spr), 8);
  for (std::size_t i = 0; i < ns; ++i) h += field("", 32);
  REQUIRE(h.size() == 256 + 256 * ns);

  for (int r = 0; r < records_written; ++r) {
    for (const auto& c : ch) {
      for (int i = 0; i < spr; ++i) {
        const auto v = static_cast<std::uint16_t>(c.digital[std::size_t(r * spr + i)]);
        h.push_back(static_cast<char>(v & 0xff));
        h.push_back(static_cast<char>(v >> 8));
      }
    }
  }
  return testutil::write_text(path, h);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

}  // namespace

TEST_CASE("EDF with identical digital and physical ranges round-trips bit-exactly") {
  const auto dir = testutil::scratch("edf_roundtrip");
  const std::vector<std::int16_t> d{-32768, -1, 0, 32767};
  write_edf(dir / "a.edf", {{"C3", -32768, 32767, -32768, 32767, d}}, 4, 1, 1, 1.0);
  const auto rec = read_edf(dir / "a.edf");
  REQUIRE(rec.n_channels() == 1);
  CHECK(rec.fs == 4);
  CHECK(rec.channels[0] == "C3");
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(rec.samples[0][i] == double(d[i]));
}

TEST_CASE("EDF digital zero maps to the midpoint offset of the linear map") {
  const auto dir = testutil::scratch("edf_offset");
  write_edf(dir / "a.edf", {{"F7", -100, 100, -32768, 32767, {0, 0, 0, 0}}}, 4, 1, 1);
  const auto rec = read_edf(dir / "a.edf");
  const double expected = (0.0 + 32768.0) * 200.0 / 65535.0 - 100.0;
  CHECK(rec.samples[0][0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(rec.samples[0][0] == doctest::Approx(0.0015).epsilon(0.02));
}

TEST_CASE("EDF channel selection, multiple records and unknown record count") {
  const auto dir = testutil::scratch("edf_select");
  std::vector<std::int16_t> a{1, 2, 3, 4, 5, 6}, b{10, 20, 30, 40, 50, 60};
  write_edf(dir / "a.edf", {{"A", -32768, 32767, -32768, 32767, a}, {"B", -32768, 32767, -32768, 32767, b}}, 2, 3,
            -1, 0.5);
  const auto rec = read_edf(dir / "a.edf", {"B"});
  REQUIRE(rec.n_channels() == 1);
  CHECK(rec.fs == 4);
  CHECK(rec.samples[0] == std::vector<double>{10, 20, 30, 40, 50, 60});
  CHECK_THROWS_AS(read_edf(dir / "a.edf", {"Z"}), Error);
}

TEST_CASE("EDF shorter than the declared record count is a truncation error") {
  const auto dir = testutil::scratch("edf_trunc");
  write_edf(dir / "a.edf", {{"C3", -100, 100, -32768, 32767, {1, 2, 3, 4}}}, 4, 1, 2);
  try {
    read_edf(dir / "a.edf");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  CHECK_THROWS_AS(read_edf(dir / "missing.edf"), Error);
}

TEST_CASE("CSV recordings") {
  const auto dir = testutil::scratch("csv_rec");
  SUBCASE("two channels by three rows") {
    const auto rec = read_csv_recording(testutil::write_text(dir / "a.csv", "c1,c2\n1,2\n3,4\n5,6\n"), 256);
    REQUIRE(rec.n_channels() == 2);
    CHECK(rec.samples[0].size() == 3);
    CHECK(rec.samples[1].size() == 3);
    CHECK(rec.samples[1][2] == 6.0);
    CHECK(rec.channels == std::vector<std::string>{"c1", "c2"});
  }
  SUBCASE("header only") {
    CHECK_THROWS_AS(read_csv_recording(testutil::write_text(dir / "b.csv", "c1,c2\n"), 256), Error);
  }
  SUBCASE("ragged row") {
    CHECK_THROWS_AS(read_csv_recording(testutil::write_text(dir / "c.csv", "c1,c2\n1,2\n3\n"), 256), Error);
  }
  SUBCASE("write then read") {
    Recording rec;
    rec.fs = 128;
    rec.channels = {"x", "y"};
    rec.samples = {{0.1, -2.5, 1e-300}, {3.0, 1.0 / 3.0, -0.0}};
    write_csv_recording(dir / "d.csv", rec, "stage=test");
    const auto back = read_csv_recording(dir / "d.csv", 128);
    CHECK(back.samples == rec.samples);
    CHECK(back.channels == rec.channels);
  }
}

TEST_CASE("annotations") {
  const auto dir = testutil::scratch("annotations");
  CHECK(load_annotations(testutil::write_text(dir / "a.csv", "10,20\n30,31")) ==
        std::vector<Interval>{{10, 20}, {30, 31}});
  CHECK(load_annotations(testutil::write_text(dir / "h.csv", "# note\nstart_s,end_s\n30,31\n10,20\n")) ==
        std::vector<Interval>{{10, 20}, {30, 31}});
  CHECK_THROWS_AS(load_annotations(testutil::write_text(dir / "b.csv", "20,10")), Error);
  CHECK_THROWS_AS(load_annotations(testutil::write_text(dir / "c.csv", "10,20\n15,25")), Error);
  CHECK_THROWS_AS(load_annotations(testutil::write_text(dir / "d.csv", "-1,2")), Error);
  CHECK_NOTHROW(validate_intervals({{0, 1}, {1, 2}}));

  write_annotations(dir / "e.csv", {{1.5, 2.25}, {7, 9}}, "x=1");
  CHECK(load_annotations(dir / "e.csv") == std::vector<Interval>{{1.5, 2.25}, {7, 9}});
}

TEST_CASE("synthetic recordings are seeded") {
  SynthConfig cfg;
  cfg.duration_s = 20;
  cfg.seizures = {{5, 10}};
  cfg.band_effects = SynthConfig::strong_effects();
  cfg.seed = 7;
  const auto a = synth_recording(cfg);
  const auto b = synth_recording(cfg);
  CHECK(a.samples == b.samples);
  CHECK(a.seizures == cfg.seizures);
  cfg.seed = 8;
  CHECK(synth_recording(cfg).samples != a.samples);
}

TEST_CASE("with zero effect sizes ictal and background variances agree") {
  SynthConfig cfg;
  cfg.n_channels = 4;
  cfg.duration_s = 300;
  cfg.seizures = {{60, 120}, {200, 260}};
  cfg.seed = 11;
  const auto rec = synth_recording(cfg);
  std::vector<double> ictal, background;
  for (const auto& ch : rec.samples) {
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double t = double(i) / rec.fs;
      const bool in = (t >= 60 && t < 120) || (t >= 200 && t < 260);
      (in ? ictal : background).push_back(ch[i]);
    }
  }
  const double ratio = variance(ictal) / variance(background);
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
}

TEST_CASE("large effect sizes at least double ictal line length") {
  SynthConfig cfg;
  cfg.n_channels = 2;
  cfg.duration_s = 120;
  cfg.seizures = {{30, 60}};
  cfg.band_effects = SynthConfig::strong_effects();
  cfg.line_length_boost = 1.0;
  cfg.seed = 3;
  const auto fm = extract_features(synth_recording(cfg));
  std::vector<double> ictal, background;
  for (Eigen::Index r = 0; r < fm.n_windows(); ++r) {
    const double ll = fm.rows(r, feature_index(0, 7));
    (fm.labels[std::size_t(r)] ? ictal : background).push_back(ll);
  }
  CHECK(ictal.size() == 30);
  CHECK(mean_of(ictal) > 2.0 * mean_of(background));
}

TEST_CASE("number formatting is lossless") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) CHECK(parse_double(format_double(v)) == v);
  CHECK_THROWS_AS(parse_double("1.0x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
}
