#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "fedsim/config.hpp"

using namespace fedsim;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.issues().begin(), e.issues().end(), [&](const std::string& issue) {
    return issue.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("a minimal config gets the documented defaults") {
  const ExperimentConfig cfg = parse_config_text(
      R"({"dataset": {"type": "synthetic"}, "strategy": {"kind": "acsp_fl"}})");
  CHECK(cfg.rounds == 100);
  CHECK(cfg.strategy.decay == 0.005);
  CHECK(cfg.efficiency.alpha == 0.5);
  CHECK(cfg.efficiency.beta == 0.5);
  CHECK(cfg.cost.bytes_per_param == 8);
  CHECK(cfg.partition.num_clients == 30);
  CHECK(cfg.partition.test_fraction == 0.2);
  CHECK(cfg.train.epochs == 1);
  CHECK(cfg.share_mode == ShareMode::dynamic);  // acsp_fl default
  CHECK(cfg.personalization == Personalization::layers);
  CHECK(cfg.model_dims.empty());  // resolved against the dataset at run time
}

TEST_CASE("non-acsp strategies default to full sharing") {
  const ExperimentConfig cfg = parse_config_text(R"({"strategy": {"kind": "poc"}})");
  CHECK(cfg.share_mode == ShareMode::full);
}

TEST_CASE("out-of-range decay names the key") {
  try {
    parse_config_text(R"({"strategy": {"kind": "acsp_fl", "decay": 1.5}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "strategy.decay"));
  }
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  try {
    parse_config_text(R"({"stratagy": {"kind": "poc"}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "stratagy"));
    CHECK(mentions(e, "did you mean 'strategy'"));
  }
}

TEST_CASE("all violations are reported at once") {
  try {
    parse_config_text(
        R"({"rounds": 0, "strategy": {"kind": "poc", "k_fraction": 2.0},
            "efficiency": {"alpha": 0.9, "beta": 0.9}})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.issues().size() >= 3);
    CHECK(mentions(e, "rounds"));
    CHECK(mentions(e, "strategy.k_fraction"));
    CHECK(mentions(e, "alpha + beta"));
  }
}

TEST_CASE("overrides apply after the file parse and are validated") {
  const ExperimentConfig cfg = parse_config_text(
      R"({"strategy": {"kind": "poc"}, "rounds": 10})",
      {"strategy.kind=acsp_fl", "rounds=50", "train.learning_rate=0.25"});
  CHECK(cfg.strategy.kind == StrategyKind::acsp_fl);
  CHECK(cfg.rounds == 50);
  CHECK(cfg.train.learning_rate == 0.25);

  CHECK_THROWS_AS(parse_config_text(R"({})", {"strategy.decay=2.0"}), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({})", {"nonsense"}), ConfigError);
}

TEST_CASE("config serialization round trips") {
  const std::string source = R"({
    "dataset": {"type": "synthetic", "classes": 6, "dim": 16, "samples_per_class": 150,
                "spread": 0.4},
    "partition": {"scheme": "dirichlet", "num_clients": 12, "alpha": 0.3},
    "model_dims": [16, 32, 32, 32, 6],
    "train": {"epochs": 2, "learning_rate": 0.1, "batch_size": 16},
    "strategy": {"kind": "acsp_fl", "decay": 0.005},
    "share_mode": "dynamic",
    "rounds": 25,
    "seed": 99,
    "out_dir": "results"
  })";
  const ExperimentConfig a = parse_config_text(source);
  const std::string serialized = config_to_json_string(a);
  const ExperimentConfig b = parse_config_text(serialized);
  CHECK(config_to_json_string(b) == serialized);
  CHECK(b.partition.dirichlet_alpha == 0.3);
  CHECK(b.model_dims == std::vector<int>{16, 32, 32, 32, 6});
}

TEST_CASE("model_dims must frame the synthetic dataset") {
  try {
    parse_config_text(
        R"({"dataset": {"type": "synthetic", "dim": 8, "classes": 3},
            "model_dims": [16, 32, 3]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "model_dims"));
  }
}

TEST_CASE("fine-tune personalization requires full sharing") {
  CHECK_THROWS_AS(
      parse_config_text(R"({"personalization": "ft", "share_mode": "dynamic"})"),
      ConfigError);
  const ExperimentConfig ok = parse_config_text(R"({"personalization": "ft"})");
  CHECK(ok.personalization == Personalization::fine_tune);
}

TEST_CASE("csv dataset config requires a path") {
  CHECK_THROWS_AS(parse_config_text(R"({"dataset": {"type": "csv"}})"), ConfigError);
  const ExperimentConfig cfg =
      parse_config_text(R"({"dataset": {"type": "csv", "path": "clients.csv"}})");
  CHECK(cfg.dataset.type == DatasetConfig::Type::csv);
  CHECK(cfg.dataset.csv_path == "clients.csv");
}

TEST_CASE("wrong value types name the key") {
  try {
    parse_config_text(R"({"rounds": "many"})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "rounds"));
    CHECK(mentions(e, "wrong type"));
  }
}

TEST_CASE("strategy kinds map to names and back") {
  for (const char* name : {"full", "random_k", "poc", "oort_lite", "deev", "acsp_fl"})
    CHECK(strategy_kind_name(strategy_kind_from_name(name)) == std::string(name));
  CHECK_THROWS_AS(strategy_kind_from_name("fedavg2"), std::invalid_argument);
}
