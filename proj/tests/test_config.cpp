#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mtnam/config.hpp"
#include "mtnam/model_io.hpp"
#include "mtnam/mtnam.hpp"
#include "mtnam/rng.hpp"
#include "test_util.hpp"

using namespace mtnam;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Data;
}

}  // namespace

TEST_CASE("default configuration") {
  const auto c = parse_config("");
  CHECK(c.seed == 42);
  CHECK(c.source == DataSource::Synth);
  CHECK(c.synth.n_channels == 4);
  CHECK(c.synth.duration_s == 1800);
  CHECK(c.synth.seizures.size() == 4);
  CHECK(c.nam_hidden == std::vector<int>{10, 50, 100, 200});
  CHECK(c.nam_activations.size() == 2);
  CHECK(c.distill_depths == std::vector<int>{1, 2, 4});
  CHECK(c.h0_grid.size() == 20);
  CHECK(c.train.seed == 42);
  CHECK(c.synth.seed == sub_seed(42, "data"));
  CHECK(parse_config(default_config_text()).hash() == c.hash());
}

TEST_CASE("overrides and hashing") {
  const auto base = parse_config("");
  const auto c = parse_config("nam.hidden = 10, 20  # narrow\ndistill.depths = 4\noutput.dir = elsewhere\n");
  CHECK(c.nam_hidden == std::vector<int>{10, 20});
  CHECK(c.distill_depths == std::vector<int>{4});
  CHECK(c.out_dir == "elsewhere");
  CHECK(c.hash() != base.hash());
  CHECK(parse_config("output.dir = a").hash() == parse_config("output.dir = b").hash());

  auto s = parse_config("");
  s.set_seed(7);
  CHECK(s.seed == 7);
  CHECK(s.train.seed == 7);
  CHECK(s.synth.seed == sub_seed(7, "data"));
  CHECK(s.hash() == parse_config("run.seed = 7").hash());
  CHECK(sub_seed(7, "data") != sub_seed(7, "init"));
}

TEST_CASE("configuration errors") {
  CHECK(kind_of([] { parse_config("no.such = 1"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("nam.hidden"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("nam.hidden = ten"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("nam.hidden = -5"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("split.train = 0.9"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("data.source = edf"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("data.source = tape"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("bench.repetitions = 10"); }) == ErrorKind::Config);
  CHECK(kind_of([] { parse_config("synth.seizures = 1:2:3"); }) == ErrorKind::Config);
  CHECK(kind_of([] { load_config("/nonexistent/config.txt"); }) == ErrorKind::MissingInput);
}

TEST_CASE("model files round trip") {
  const auto dir = testutil::scratch("model_io");
  const auto data = testutil::gaussian_classes(30, 3, 2.0, 51);
  auto rng = make_rng(5, "init");

  NamModel nam;
  nam.net = init_nam(3, {6, Activation::ExU}, rng);
  nam.arch = {6, Activation::ExU};
  nam.scaler = Scaler::fit(data);
  save_nam(dir / "n.model", nam, "config_hash=abc stage=train");
  const auto nam2 = load_nam(dir / "n.model");
  CHECK(flatten(nam2.net) == flatten(nam.net));
  CHECK(nam2.scaler.mean == nam.scaler.mean);
  CHECK(nam2.scaler.stddev == nam.scaler.stddev);
  CHECK(nam2.arch.activation == Activation::ExU);
  CHECK(model_fingerprint(nam2) == model_fingerprint(nam));
  CHECK(read_header_value(dir / "n.model", "config_hash") == "abc");
  CHECK(read_header_value(dir / "n.model", "missing").empty());

  const auto mt = distill(nam, data, 3);
  save_mtnam(dir / "m.model", mt);
  const auto mt2 = load_mtnam(dir / "m.model");
  CHECK(mtnam_to_string(mt2) == mtnam_to_string(mt));
  CHECK(mt2.teacher_hash == mt.teacher_hash);
  CHECK(mtnam_predict(mt2, data.rows) == mtnam_predict(mt, data.rows));

  LrModel lr;
  lr.w = VectorXd::Random(3);
  lr.b = 0.25;
  lr.l2 = 0.1;
  lr.scaler = Scaler::identity(3);
  save_lr(dir / "l.model", lr);
  const auto lr2 = load_lr(dir / "l.model");
  CHECK(lr2.w == lr.w);
  CHECK(lr2.b == lr.b);

  DnnModel dnn;
  dnn.W1 = MatrixXd::Random(4, 3);
  dnn.b1 = VectorXd::Random(4);
  dnn.w2 = VectorXd::Random(4);
  dnn.b2 = 1.0 / 3.0;
  dnn.activation = DnnActivation::LeakyReLU;
  dnn.scaler = Scaler::identity(3);
  save_dnn(dir / "d.model", dnn);
  const auto dnn2 = load_dnn(dir / "d.model");
  CHECK(flatten(dnn2) == flatten(dnn));
  CHECK(dnn2.activation == DnnActivation::LeakyReLU);

  CHECK(kind_of([&] { load_nam(dir / "m.model"); }) == ErrorKind::Data);
  CHECK(kind_of([&] { load_nam(dir / "absent.model"); }) == ErrorKind::MissingInput);
  testutil::write_text(dir / "bad.model", "mtnam-model 1\nkind nam\ndim 3\nhidden 6\n");
  CHECK(kind_of([&] { load_nam(dir / "bad.model"); }) == ErrorKind::Data);
}
