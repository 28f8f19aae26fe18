#include <cstdio>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "rcdetect/classifiers.hpp"
#include "rcdetect/model_io.hpp"
#include "rcdetect/rng.hpp"

using namespace rcdetect;

namespace {

LabeledDataset blob_pair(uint64_t seed, std::size_t n_per, std::size_t d, double sep) {
  Rng rng(seed);
  LabeledDataset ds;
  for (std::size_t i = 0; i < 2 * n_per; ++i) {
    double center = i < n_per ? -sep : sep;
    FeatureRow r(d);
    for (auto& v : r) v = rng.normal(center, 1.0);
    ds.x.push_back(r);
    ds.y.push_back(i < n_per ? Label::NORMAL : Label::ATTACKED);
  }
  return ds;
}

std::vector<FeatureRow> probes(uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  std::vector<FeatureRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow r(d);
    for (auto& v : r) v = rng.next_double() * 8.0 - 4.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("every model family survives a text round-trip") {
  LabeledDataset ds = blob_pair(101, 40, 3, 2.0);
  auto xs = probes(102, 50, 3);
  for (ModelKind kind :
       {ModelKind::DT, ModelKind::RF, ModelKind::SVM, ModelKind::KNN, ModelKind::NB}) {
    ModelSpec spec;
    spec.kind = kind;
    spec.n_trees = 7;
    spec.epochs = 15;
    TrainedModel original = train_model(ds, spec, ModelProtocol::UDP, 5);

    std::string text = serialize_models({original});
    auto loaded = parse_models(text);
    REQUIRE(loaded.size() == 1);
    const TrainedModel& copy = loaded[0];
    REQUIRE(copy.kind == kind);
    REQUIRE(copy.protocol == ModelProtocol::UDP);
    REQUIRE(copy.standardization == original.standardization);
    INFO("kind " << to_string(kind));
    for (const auto& x : xs) {
      REQUIRE(copy.predict(x) == original.predict(x));
      REQUIRE(copy.score(x) == original.score(x));
    }
    // Deterministic text: reserializing the parsed bundle is byte-identical.
    REQUIRE(serialize_models(loaded) == text);
  }
}

TEST_CASE("a bundle preserves model order and protocols") {
  LabeledDataset ds = blob_pair(103, 25, 2, 2.0);
  ModelSpec rf_spec;
  rf_spec.n_trees = 3;
  ModelSpec svm_spec;
  svm_spec.kind = ModelKind::SVM;
  svm_spec.epochs = 10;
  std::vector<TrainedModel> bundle;
  bundle.push_back(train_model(ds, rf_spec, ModelProtocol::TCP, 1));
  bundle.push_back(train_model(ds, svm_spec, ModelProtocol::UDP, 2));
  bundle.push_back(train_model(ds, rf_spec, ModelProtocol::GENERAL, 3));

  auto loaded = parse_models(serialize_models(bundle));
  REQUIRE(loaded.size() == 3);
  REQUIRE(loaded[0].kind == ModelKind::RF);
  REQUIRE(loaded[0].protocol == ModelProtocol::TCP);
  REQUIRE(loaded[1].kind == ModelKind::SVM);
  REQUIRE(loaded[1].protocol == ModelProtocol::UDP);
  REQUIRE(loaded[2].kind == ModelKind::RF);
  REQUIRE(loaded[2].protocol == ModelProtocol::GENERAL);
}

TEST_CASE("margin model text keeps solver provenance") {
  LabeledDataset ds = blob_pair(104, 30, 2, 2.0);
  ModelSpec spec;
  spec.kind = ModelKind::SVM;
  spec.C = 2.5;
  spec.epochs = 12;
  TrainedModel m = train_model(ds, spec, ModelProtocol::TCP, 9);
  auto loaded = parse_models(serialize_models({m}));
  const auto& svm = std::get<LinearSVM>(loaded[0].model);
  const auto& orig = std::get<LinearSVM>(m.model);
  REQUIRE(svm.C == orig.C);
  REQUIRE(svm.epochs == orig.epochs);
  REQUIRE(svm.epoch_objectives == orig.epoch_objectives);
}

TEST_CASE("a density model with an absent class round-trips its infinities") {
  LabeledDataset ds;
  ds.x = {{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.0}};
  ds.y = {Label::NORMAL, Label::NORMAL, Label::NORMAL};
  ModelSpec spec;
  spec.kind = ModelKind::NB;
  TrainedModel m = train_model(ds, spec, ModelProtocol::GENERAL, 1);
  auto loaded = parse_models(serialize_models({m}));
  const auto& nb = std::get<NbModel>(loaded[0].model);
  REQUIRE(std::isinf(nb.log_prior[1]));
  REQUIRE(nb.log_prior[1] < 0);
  for (const auto& x : probes(105, 20, 2))
    REQUIRE(loaded[0].predict(x) == Label::NORMAL);
}

TEST_CASE("an empty bundle is representable") {
  auto loaded = parse_models(serialize_models({}));
  REQUIRE(loaded.empty());
}

TEST_CASE("the parser rejects structural damage") {
  LabeledDataset ds = blob_pair(106, 10, 2, 2.0);
  ModelSpec spec;
  spec.n_trees = 2;
  std::string good = serialize_models({train_model(ds, spec, ModelProtocol::TCP, 4)});

  SECTION("wrong signature") {
    REQUIRE_THROWS_AS(parse_models("pcap v1\nmodels 0\n"), FormatError);
  }
  SECTION("unsupported version") {
    REQUIRE_THROWS_AS(parse_models("rcdetect-model v2\nmodels 0\n"), FormatError);
  }
  SECTION("empty text") { REQUIRE_THROWS_AS(parse_models(""), FormatError); }
  SECTION("truncation") {
    REQUIRE_THROWS_AS(parse_models(good.substr(0, good.size() / 2)), FormatError);
  }
  SECTION("unknown model kind") {
    std::string bad = good;
    auto pos = bad.find("model rf");
    bad.replace(pos, 8, "model xx");
    REQUIRE_THROWS_AS(parse_models(bad), SchemaError);
  }
  SECTION("corrupt numeric token") {
    std::string bad = good;
    auto pos = bad.find("mean ");
    bad.insert(pos + 5, "zz");
    REQUIRE_THROWS_AS(parse_models(bad), FormatError);
  }
  SECTION("child index out of range") {
    std::string bad = good;
    // Tree node rows reference children by index; point one past the end.
    auto pos = bad.find("node ");
    auto eol = bad.find('\n', pos);
    bad.replace(pos, eol - pos, "node 0 0.5 99999 99999 0 1 1");
    REQUIRE_THROWS_AS(parse_models(bad), FormatError);
  }
}

TEST_CASE("model files round-trip through the filesystem") {
  LabeledDataset ds = blob_pair(107, 20, 2, 2.0);
  ModelSpec spec;
  spec.n_trees = 3;
  std::vector<TrainedModel> bundle{train_model(ds, spec, ModelProtocol::GENERAL, 8)};
  std::string path = "test_model_io_roundtrip.model";
  save_models_file(bundle, path);
  auto loaded = load_models_file(path);
  REQUIRE(serialize_models(loaded) == serialize_models(bundle));
  std::remove(path.c_str());
  REQUIRE_THROWS_AS(load_models_file(path), IoError);
  REQUIRE_THROWS_AS(save_models_file(bundle, "no_such_dir/x.model"), IoError);
}
