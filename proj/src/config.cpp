#include "fedsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace fedsim {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream os;
  os << "invalid configuration (" << issues.size() << " problem"
     << (issues.size() == 1 ? "" : "s") << "):";
  for (const auto& issue : issues) os << "\n  - " << issue;
  return os.str();
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Accumulates problems and reads typed values out of a JSON object tree.
struct Reader {
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& what) { issues.push_back(path + ": " + what); }

  void check_keys(const json& obj, const std::string& prefix,
                  const std::vector<std::string>& known) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find(known.begin(), known.end(), key) != known.end()) continue;
      std::string best;
      std::size_t best_d = 3;  // suggest only close misses
      for (const auto& k : known) {
        const std::size_t d = edit_distance(key, k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      std::string msg = "unknown key '" + (prefix.empty() ? key : prefix + "." + key) + "'";
      if (!best.empty()) msg += " (did you mean '" + best + "'?)";
      issues.push_back(msg);
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& prefix, const char* key, T& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string path = prefix.empty() ? key : prefix + "." + std::string(key);
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw json::type_error::create(302, "expected string", &v);
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw json::type_error::create(302, "expected boolean", &v);
        out = v.get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() && !v.is_number_unsigned())
          throw json::type_error::create(302, "expected integer", &v);
        out = v.get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw json::type_error::create(302, "expected number", &v);
        out = v.get<T>();
      } else {
        out = v.get<T>();
      }
    } catch (const json::exception&) {
      fail(path, "wrong type (got " + std::string(v.type_name()) + ")");
    }
  }
};

struct EnumEntry {
  const char* name;
  int value;
};

template <typename E>
void read_enum(Reader& r, const json& obj, const std::string& prefix, const char* key,
               const std::vector<std::pair<std::string, E>>& table, E& out) {
  if (!obj.contains(key)) return;
  const std::string path = prefix.empty() ? key : prefix + "." + std::string(key);
  std::string name;
  r.read(obj, prefix, key, name);
  if (name.empty()) return;
  for (const auto& [n, v] : table)
    if (n == name) {
      out = v;
      return;
    }
  std::string options;
  for (const auto& [n, _] : table) options += (options.empty() ? "" : ", ") + n;
  r.fail(path, "unknown value '" + name + "' (options: " + options + ")");
}

const std::vector<std::pair<std::string, StrategyKind>>& strategy_table() {
  static const std::vector<std::pair<std::string, StrategyKind>> table = {
      {"full", StrategyKind::full},      {"random_k", StrategyKind::random_k},
      {"poc", StrategyKind::poc},        {"oort_lite", StrategyKind::oort_lite},
      {"deev", StrategyKind::deev},      {"acsp_fl", StrategyKind::acsp_fl},
  };
  return table;
}

json parse_override_value(const std::string& text) {
  const json parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  return json(text);  // bare words become strings
}

void apply_override(json& doc, const std::string& spec, std::vector<std::string>& issues) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    issues.push_back("override '" + spec + "': expected key.path=value");
    return;
  }
  const std::string path = spec.substr(0, eq);
  const json value = parse_override_value(spec.substr(eq + 1));

  json* node = &doc;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t dot = path.find('.', begin);
    const std::string key = path.substr(begin, dot - begin);
    if (key.empty()) {
      issues.push_back("override '" + spec + "': empty key segment");
      return;
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    begin = dot + 1;
  }
}

ExperimentConfig extract(const json& doc) {
  Reader r;
  ExperimentConfig cfg;
  if (!doc.is_object()) throw ConfigError({"top level: expected a JSON object"});

  r.check_keys(doc, "", {"dataset", "partition", "model_dims", "train", "strategy", "share_mode",
                         "shared_layers", "share_from", "personalization", "rounds", "cost",
                         "efficiency", "seed", "out_dir"});

  bool share_mode_given = false;
  if (doc.contains("dataset")) {
    const json& d = doc.at("dataset");
    if (!d.is_object()) {
      r.fail("dataset", "expected an object");
    } else {
      r.check_keys(d, "dataset",
                   {"type", "classes", "dim", "samples_per_class", "spread", "path",
                    "test_fraction"});
      std::string type = "synthetic";
      r.read(d, "dataset", "type", type);
      if (type == "synthetic") {
        cfg.dataset.type = DatasetConfig::Type::synthetic;
        r.read(d, "dataset", "classes", cfg.dataset.synthetic.num_classes);
        r.read(d, "dataset", "dim", cfg.dataset.synthetic.dim);
        r.read(d, "dataset", "samples_per_class", cfg.dataset.synthetic.samples_per_class);
        r.read(d, "dataset", "spread", cfg.dataset.synthetic.spread);
      } else if (type == "csv") {
        cfg.dataset.type = DatasetConfig::Type::csv;
        r.read(d, "dataset", "path", cfg.dataset.csv_path);
        r.read(d, "dataset", "test_fraction", cfg.dataset.csv_test_fraction);
        if (cfg.dataset.csv_path.empty()) r.fail("dataset.path", "required for csv datasets");
      } else {
        r.fail("dataset.type", "unknown value '" + type + "' (options: synthetic, csv)");
      }
    }
  }

  if (doc.contains("partition")) {
    const json& p = doc.at("partition");
    if (!p.is_object()) {
      r.fail("partition", "expected an object");
    } else {
      r.check_keys(p, "partition",
                   {"scheme", "num_clients", "alpha", "shards_per_client", "test_fraction"});
      read_enum<PartitionScheme>(r, p, "partition", "scheme",
                                 {{"iid", PartitionScheme::iid},
                                  {"dirichlet", PartitionScheme::dirichlet},
                                  {"label_shard", PartitionScheme::label_shard}},
                                 cfg.partition.scheme);
      r.read(p, "partition", "num_clients", cfg.partition.num_clients);
      r.read(p, "partition", "alpha", cfg.partition.dirichlet_alpha);
      r.read(p, "partition", "shards_per_client", cfg.partition.shards_per_client);
      r.read(p, "partition", "test_fraction", cfg.partition.test_fraction);
    }
  } else {
    cfg.partition.num_clients = 30;
  }

  if (doc.contains("model_dims")) {
    const json& m = doc.at("model_dims");
    if (!m.is_array()) {
      r.fail("model_dims", "expected an array of integers");
    } else {
      for (const auto& v : m) {
        if (!v.is_number_integer()) {
          r.fail("model_dims", "entries must be integers");
          break;
        }
        cfg.model_dims.push_back(v.get<int>());
      }
    }
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    if (!t.is_object()) {
      r.fail("train", "expected an object");
    } else {
      r.check_keys(t, "train", {"epochs", "learning_rate", "batch_size"});
      r.read(t, "train", "epochs", cfg.train.epochs);
      r.read(t, "train", "learning_rate", cfg.train.learning_rate);
      r.read(t, "train", "batch_size", cfg.train.batch_size);
    }
  }

  if (doc.contains("strategy")) {
    const json& s = doc.at("strategy");
    if (!s.is_object()) {
      r.fail("strategy", "expected an object");
    } else {
      r.check_keys(s, "strategy",
                   {"kind", "k_fraction", "decay", "oort_delay_target", "oort_delay_exponent"});
      read_enum<StrategyKind>(r, s, "strategy", "kind", strategy_table(), cfg.strategy.kind);
      r.read(s, "strategy", "k_fraction", cfg.strategy.k_fraction);
      r.read(s, "strategy", "decay", cfg.strategy.decay);
      r.read(s, "strategy", "oort_delay_target", cfg.strategy.oort_delay_target);
      r.read(s, "strategy", "oort_delay_exponent", cfg.strategy.oort_delay_exponent);
    }
  }

  if (doc.contains("share_mode")) {
    share_mode_given = true;
    read_enum<ShareMode>(r, doc, "", "share_mode",
                         {{"full", ShareMode::full},
                          {"fixed", ShareMode::fixed},
                          {"dynamic", ShareMode::dynamic}},
                         cfg.share_mode);
  }
  r.read(doc, "", "shared_layers", cfg.shared_layers);
  read_enum<bool>(r, doc, "", "share_from", {{"head", false}, {"tail", true}},
                  cfg.share_from_tail);
  read_enum<Personalization>(r, doc, "", "personalization",
                             {{"layers", Personalization::layers},
                              {"ft", Personalization::fine_tune}},
                             cfg.personalization);
  r.read(doc, "", "rounds", cfg.rounds);

  if (doc.contains("cost")) {
    const json& c = doc.at("cost");
    if (!c.is_object()) {
      r.fail("cost", "expected an object");
    } else {
      r.check_keys(c, "cost",
                   {"bytes_per_param", "bandwidth_bytes_per_sec", "client_samples_per_sec"});
      r.read(c, "cost", "bytes_per_param", cfg.cost.bytes_per_param);
      r.read(c, "cost", "bandwidth_bytes_per_sec", cfg.cost.bandwidth_bytes_per_sec);
      r.read(c, "cost", "client_samples_per_sec", cfg.cost.client_samples_per_sec);
    }
  }

  if (doc.contains("efficiency")) {
    const json& e = doc.at("efficiency");
    if (!e.is_object()) {
      r.fail("efficiency", "expected an object");
    } else {
      r.check_keys(e, "efficiency", {"alpha", "beta"});
      r.read(e, "efficiency", "alpha", cfg.efficiency.alpha);
      r.read(e, "efficiency", "beta", cfg.efficiency.beta);
    }
  }

  r.read(doc, "", "seed", cfg.seed);
  r.read(doc, "", "out_dir", cfg.out_dir);

  // ACSP-FL defaults to its dynamic partial sharing unless the file pins a mode.
  if (!share_mode_given && cfg.strategy.kind == StrategyKind::acsp_fl)
    cfg.share_mode = ShareMode::dynamic;

  // range checks
  if (cfg.dataset.type == DatasetConfig::Type::synthetic) {
    if (cfg.dataset.synthetic.num_classes < 1) r.fail("dataset.classes", "must be >= 1");
    if (cfg.dataset.synthetic.dim < 1) r.fail("dataset.dim", "must be >= 1");
    if (cfg.dataset.synthetic.samples_per_class < 1)
      r.fail("dataset.samples_per_class", "must be >= 1");
    if (cfg.dataset.synthetic.spread < 0.0) r.fail("dataset.spread", "must be >= 0");
  } else if (!(cfg.dataset.csv_test_fraction > 0.0 && cfg.dataset.csv_test_fraction < 1.0)) {
    r.fail("dataset.test_fraction", "must be in (0, 1)");
  }
  if (cfg.partition.num_clients < 1) r.fail("partition.num_clients", "must be >= 1");
  if (cfg.partition.scheme == PartitionScheme::dirichlet && !(cfg.partition.dirichlet_alpha > 0.0))
    r.fail("partition.alpha", "must be > 0 for the dirichlet scheme");
  if (cfg.partition.scheme == PartitionScheme::label_shard && cfg.partition.shards_per_client < 1)
    r.fail("partition.shards_per_client", "must be >= 1 for the label_shard scheme");
  if (!(cfg.partition.test_fraction > 0.0 && cfg.partition.test_fraction < 1.0))
    r.fail("partition.test_fraction", "must be in (0, 1)");
  if (!cfg.model_dims.empty()) {
    if (cfg.model_dims.size() < 2) r.fail("model_dims", "need at least [input_dim, output_dim]");
    for (int d : cfg.model_dims)
      if (d < 1) {
        r.fail("model_dims", "entries must be positive");
        break;
      }
  }
  if (cfg.train.epochs < 1) r.fail("train.epochs", "must be >= 1");
  if (!(cfg.train.learning_rate >= 0.0)) r.fail("train.learning_rate", "must be >= 0");
  if (cfg.train.batch_size < 1) r.fail("train.batch_size", "must be >= 1");
  if (!(cfg.strategy.k_fraction > 0.0 && cfg.strategy.k_fraction <= 1.0))
    r.fail("strategy.k_fraction", "must be in (0, 1]");
  if (!(cfg.strategy.decay >= 0.0 && cfg.strategy.decay < 1.0))
    r.fail("strategy.decay", "must be in [0, 1)");
  if (!(cfg.strategy.oort_delay_target > 0.0)) r.fail("strategy.oort_delay_target", "must be > 0");
  if (cfg.strategy.oort_delay_exponent < 0.0)
    r.fail("strategy.oort_delay_exponent", "must be >= 0");
  if (cfg.shared_layers < 1) r.fail("shared_layers", "must be >= 1");
  if (cfg.rounds < 1) r.fail("rounds", "must be >= 1");
  if (cfg.cost.bytes_per_param < 1) r.fail("cost.bytes_per_param", "must be >= 1");
  if (!(cfg.cost.bandwidth_bytes_per_sec > 0.0))
    r.fail("cost.bandwidth_bytes_per_sec", "must be > 0");
  if (!(cfg.cost.client_samples_per_sec > 0.0))
    r.fail("cost.client_samples_per_sec", "must be > 0");
  if (!(cfg.efficiency.alpha >= 0.0 && cfg.efficiency.alpha <= 1.0))
    r.fail("efficiency.alpha", "must be in [0, 1]");
  if (!(cfg.efficiency.beta >= 0.0 && cfg.efficiency.beta <= 1.0))
    r.fail("efficiency.beta", "must be in [0, 1]");
  if (std::abs(cfg.efficiency.alpha + cfg.efficiency.beta - 1.0) > 1e-9)
    r.fail("efficiency", "alpha + beta must equal 1");
  if (cfg.personalization == Personalization::fine_tune && cfg.share_mode != ShareMode::full)
    r.fail("personalization", "'ft' keeps whole local models and requires share_mode 'full'");
  if (cfg.out_dir.empty()) r.fail("out_dir", "must not be empty");

  // cross-field: synthetic dims are known at parse time
  if (cfg.dataset.type == DatasetConfig::Type::synthetic && !cfg.model_dims.empty()) {
    if (cfg.model_dims.front() != cfg.dataset.synthetic.dim)
      r.fail("model_dims", "first entry must equal dataset.dim (" +
                               std::to_string(cfg.dataset.synthetic.dim) + ")");
    if (cfg.model_dims.back() != cfg.dataset.synthetic.num_classes)
      r.fail("model_dims", "last entry must equal dataset.classes (" +
                               std::to_string(cfg.dataset.synthetic.num_classes) + ")");
  }
  if (!cfg.model_dims.empty() && cfg.share_mode == ShareMode::fixed &&
      cfg.shared_layers > static_cast<int>(cfg.model_dims.size()) - 1)
    r.fail("shared_layers", "exceeds the model's layer count");

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return cfg;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config_text(const std::string& json_text,
                                   const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError({"config is not valid JSON"});

  std::vector<std::string> issues;
  for (const auto& o : overrides) apply_override(doc, o, issues);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return extract(doc);
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file: " + path});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), overrides);
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
  json doc;
  if (cfg.dataset.type == DatasetConfig::Type::synthetic) {
    doc["dataset"] = {{"type", "synthetic"},
                      {"classes", cfg.dataset.synthetic.num_classes},
                      {"dim", cfg.dataset.synthetic.dim},
                      {"samples_per_class", cfg.dataset.synthetic.samples_per_class},
                      {"spread", cfg.dataset.synthetic.spread}};
  } else {
    doc["dataset"] = {{"type", "csv"},
                      {"path", cfg.dataset.csv_path},
                      {"test_fraction", cfg.dataset.csv_test_fraction}};
  }
  const char* scheme = cfg.partition.scheme == PartitionScheme::iid        ? "iid"
                       : cfg.partition.scheme == PartitionScheme::dirichlet ? "dirichlet"
                                                                            : "label_shard";
  doc["partition"] = {{"scheme", scheme},
                      {"num_clients", cfg.partition.num_clients},
                      {"alpha", cfg.partition.dirichlet_alpha},
                      {"shards_per_client", cfg.partition.shards_per_client},
                      {"test_fraction", cfg.partition.test_fraction}};
  doc["model_dims"] = cfg.model_dims;
  doc["train"] = {{"epochs", cfg.train.epochs},
                  {"learning_rate", cfg.train.learning_rate},
                  {"batch_size", cfg.train.batch_size}};
  doc["strategy"] = {{"kind", strategy_kind_name(cfg.strategy.kind)},
                     {"k_fraction", cfg.strategy.k_fraction},
                     {"decay", cfg.strategy.decay},
                     {"oort_delay_target", cfg.strategy.oort_delay_target},
                     {"oort_delay_exponent", cfg.strategy.oort_delay_exponent}};
  doc["share_mode"] = cfg.share_mode == ShareMode::full    ? "full"
                      : cfg.share_mode == ShareMode::fixed ? "fixed"
                                                           : "dynamic";
  doc["shared_layers"] = cfg.shared_layers;
  doc["share_from"] = cfg.share_from_tail ? "tail" : "head";
  doc["personalization"] = cfg.personalization == Personalization::layers ? "layers" : "ft";
  doc["rounds"] = cfg.rounds;
  doc["cost"] = {{"bytes_per_param", cfg.cost.bytes_per_param},
                 {"bandwidth_bytes_per_sec", cfg.cost.bandwidth_bytes_per_sec},
                 {"client_samples_per_sec", cfg.cost.client_samples_per_sec}};
  doc["efficiency"] = {{"alpha", cfg.efficiency.alpha}, {"beta", cfg.efficiency.beta}};
  doc["seed"] = cfg.seed;
  doc["out_dir"] = cfg.out_dir;
  return doc.dump(2) + "\n";
}

const char* strategy_kind_name(StrategyKind kind) {
  for (const auto& [name, value] : strategy_table())
    if (value == kind) return name.c_str();
  return "full";
}

StrategyKind strategy_kind_from_name(const std::string& name) {
  for (const auto& [n, value] : strategy_table())
    if (n == name) return value;
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

}  // namespace fedsim
