#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "fedsim/config.hpp"
#include "fedsim/data.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/nnet.hpp"
#include "fedsim/runner.hpp"
#include "fedsim/selection.hpp"

namespace py = pybind11;
using namespace fedsim;

namespace {

Matrix matrix_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D float array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data.begin());
  return m;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
  py::array_t<double> a({m.rows, m.cols});
  std::copy(m.data.begin(), m.data.end(), a.mutable_data());
  return a;
}

Dataset dataset_from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
                           const std::vector<int>& y, int num_classes) {
  Dataset d;
  d.features = matrix_from_numpy(x);
  d.labels = y;
  d.num_classes = num_classes;
  if (d.labels.size() != d.features.rows)
    throw std::invalid_argument("labels length must match the feature row count");
  return d;
}

py::dict round_log_to_dict(const RoundLog& log) {
  py::dict d;
  d["round"] = log.round;
  d["selected"] = log.selected;
  d["shared_layers"] = log.shared_layers;
  d["fragment_params"] = log.fragment_params;
  d["accuracies"] = log.accuracies;
  d["mean_acc"] = log.mean_acc;
  d["min_acc"] = log.min_acc;
  d["max_acc"] = log.max_acc;
  d["uplink_bytes"] = log.cost.uplink_bytes;
  d["downlink_bytes"] = log.cost.downlink_bytes;
  d["sim_seconds"] = log.cost.simulated_round_seconds;
  return d;
}

py::dict summary_to_dict(const RunSummary& s) {
  py::dict d;
  d["mean_accuracy"] = s.mean_accuracy;
  d["min_accuracy"] = s.min_accuracy;
  d["max_accuracy"] = s.max_accuracy;
  d["accuracy_per_client"] = s.accuracy_per_client;
  d["total_uplink_bytes"] = s.total_uplink_bytes;
  d["total_downlink_bytes"] = s.total_downlink_bytes;
  d["uplink_bytes_per_client"] = s.uplink_bytes_per_client;
  d["convergence_time_seconds"] = s.convergence_time_seconds;
  d["selection_counts"] = s.selection_counts;
  if (s.efficiency) d["efficiency"] = *s.efficiency;
  return d;
}

std::string config_text_from_object(const py::object& config) {
  if (py::isinstance<py::str>(config)) return config.cast<std::string>();
  const py::object dumps = py::module_::import("json").attr("dumps");
  return dumps(config).cast<std::string>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "federated learning simulator core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);

  py::class_<ParamSet>(m, "ParamSet")
      .def(py::init<>())
      .def_property_readonly("layer_count", &ParamSet::layer_count)
      .def_property_readonly("param_count", &ParamSet::param_count)
      .def("weights",
           [](const ParamSet& p, std::size_t layer) {
             if (layer >= p.layer_count()) throw std::invalid_argument("layer out of range");
             return matrix_to_numpy(p.layers[layer].weights);
           })
      .def("biases",
           [](const ParamSet& p, std::size_t layer) {
             if (layer >= p.layer_count()) throw std::invalid_argument("layer out of range");
             return p.layers[layer].biases;
           })
      .def("__eq__", [](const ParamSet& a, const ParamSet& b) { return a == b; })
      .def("__repr__", [](const ParamSet& p) {
        return "<ParamSet layers=" + std::to_string(p.layer_count()) +
               " params=" + std::to_string(p.param_count()) + ">";
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from_numpy), py::arg("features"), py::arg("labels"),
           py::arg("num_classes"))
      .def_property_readonly("features", [](const Dataset& d) { return matrix_to_numpy(d.features); })
      .def_property_readonly("labels", [](const Dataset& d) { return d.labels; })
      .def_readonly("num_classes", &Dataset::num_classes)
      .def("__len__", &Dataset::size);

  py::class_<ClientSplit>(m, "ClientSplit")
      .def_readonly("client_id", &ClientSplit::client_id)
      .def_readonly("train", &ClientSplit::train)
      .def_readonly("test", &ClientSplit::test);

  py::class_<ShareSpec>(m, "ShareSpec")
      .def(py::init([](std::vector<int> indices, int total) {
             ShareSpec s{std::move(indices), total};
             s.validate();
             return s;
           }),
           py::arg("layer_indices"), py::arg("total_layers"))
      .def_readonly("layer_indices", &ShareSpec::layer_indices)
      .def_readonly("total_layers", &ShareSpec::total_layers)
      .def("complement", &ShareSpec::complement);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](int epochs, double learning_rate, int batch_size, std::uint64_t seed) {
             return TrainConfig{epochs, learning_rate, batch_size, seed};
           }),
           py::arg("epochs") = 1, py::arg("learning_rate") = 0.05, py::arg("batch_size") = 32,
           py::arg("seed") = 0)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<ClientPerf>(m, "ClientPerf")
      .def(py::init([](int client_id, double accuracy, double mean_loss, double duration) {
             return ClientPerf{client_id, accuracy, mean_loss, duration};
           }),
           py::arg("client_id"), py::arg("accuracy"), py::arg("mean_loss") = 0.0,
           py::arg("last_round_duration") = 0.0)
      .def_readwrite("client_id", &ClientPerf::client_id)
      .def_readwrite("accuracy", &ClientPerf::accuracy)
      .def_readwrite("mean_loss", &ClientPerf::mean_loss)
      .def_readwrite("last_round_duration", &ClientPerf::last_round_duration);

  // nnet
  m.def("init_params", &init_params, py::arg("layer_dims"), py::arg("seed"));
  m.def(
      "forward",
      [](const ParamSet& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        return matrix_to_numpy(forward(p, matrix_from_numpy(x)));
      },
      py::arg("params"), py::arg("inputs"));
  m.def(
      "loss_and_grad",
      [](const ParamSet& p, const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
         const std::vector<int>& y) { return loss_and_grad(p, matrix_from_numpy(x), y); },
      py::arg("params"), py::arg("x"), py::arg("y"));
  m.def(
      "sgd_fit",
      [](const ParamSet& p, const Dataset& train, const TrainConfig& cfg) {
        const FitResult fit = sgd_fit(p, train, cfg);
        return py::make_tuple(fit.params, fit.final_loss);
      },
      py::arg("params"), py::arg("train"), py::arg("config"));
  m.def(
      "evaluate",
      [](const ParamSet& p, const Dataset& test) {
        const EvalResult r = evaluate(p, test);
        return py::make_tuple(r.accuracy, r.loss);
      },
      py::arg("params"), py::arg("test"));
  m.def("slice_layers", &slice_layers, py::arg("params"), py::arg("spec"));
  m.def("merge_layers", &merge_layers, py::arg("global_fragment"), py::arg("local_fragment"),
        py::arg("spec"));

  // data
  m.def("generate_blobs", &generate_blobs, py::arg("num_classes"), py::arg("dim"),
        py::arg("samples_per_class"), py::arg("spread"), py::arg("seed"));
  m.def(
      "partition",
      [](const Dataset& data, const std::string& scheme, int num_clients, double alpha,
         int shards_per_client, double test_fraction, std::uint64_t seed) {
        PartitionSpec spec;
        if (scheme == "iid") spec.scheme = PartitionScheme::iid;
        else if (scheme == "dirichlet") spec.scheme = PartitionScheme::dirichlet;
        else if (scheme == "label_shard") spec.scheme = PartitionScheme::label_shard;
        else throw std::invalid_argument("unknown scheme '" + scheme + "'");
        spec.num_clients = num_clients;
        spec.dirichlet_alpha = alpha;
        spec.shards_per_client = shards_per_client;
        spec.test_fraction = test_fraction;
        spec.seed = seed;
        return partition(data, spec);
      },
      py::arg("data"), py::arg("scheme"), py::arg("num_clients"), py::arg("alpha") = 1.0,
      py::arg("shards_per_client") = 1, py::arg("test_fraction") = 0.2, py::arg("seed") = 0);
  m.def(
      "load_csv",
      [](const std::string& path, double test_fraction, std::uint64_t seed) {
        const CsvData data = load_csv(path, CsvSchema{test_fraction, seed});
        py::dict d;
        d["clients"] = data.clients;
        d["original_labels"] = data.original_labels;
        d["feature_dim"] = data.feature_dim;
        d["num_classes"] = data.num_classes;
        return d;
      },
      py::arg("path"), py::arg("test_fraction") = 0.2, py::arg("seed") = 0);
  m.def("write_csv", &write_csv, py::arg("path"), py::arg("clients"));

  // selection
  m.def("filter_clients", &filter_clients, py::arg("perfs"));
  m.def("decay_count", &decay_count, py::arg("selected_size"), py::arg("round"), py::arg("decay"));
  m.def(
      "select_acsp",
      [](const std::vector<ClientPerf>& perfs, int round, double decay) {
        StrategyConfig cfg;
        cfg.kind = StrategyKind::acsp_fl;
        cfg.decay = decay;
        return select_acsp(perfs, round, cfg);
      },
      py::arg("perfs"), py::arg("round"), py::arg("decay") = 0.005);
  m.def("select_random_k", &select_random_k, py::arg("client_ids"), py::arg("k_fraction"),
        py::arg("round"), py::arg("seed"));
  m.def("select_poc", &select_poc, py::arg("perfs"), py::arg("k_fraction"));
  m.def(
      "select_oort_lite",
      [](const std::vector<ClientPerf>& perfs, double k_fraction, double delay_target,
         double delay_exponent) {
        StrategyConfig cfg;
        cfg.oort_delay_target = delay_target;
        cfg.oort_delay_exponent = delay_exponent;
        return select_oort_lite(perfs, k_fraction, cfg);
      },
      py::arg("perfs"), py::arg("k_fraction"), py::arg("delay_target") = 1.0,
      py::arg("delay_exponent") = 1.0);
  m.def("dynamic_layer_count", &dynamic_layer_count, py::arg("accuracy"), py::arg("total_layers"));
  m.def("make_share_spec", &make_share_spec, py::arg("layer_count"), py::arg("total_layers"),
        py::arg("from_tail") = false);

  // federation / metrics
  m.def(
      "aggregate",
      [](const std::vector<std::pair<ParamSet, long long>>& fragments) {
        return aggregate(fragments);
      },
      py::arg("fragments"));
  m.def("overhead_reduction", &overhead_reduction, py::arg("solution_time"),
        py::arg("baseline_time"));
  m.def(
      "efficiency",
      [](double mean_accuracy, double overhead_red, double alpha, double beta) {
        return efficiency(mean_accuracy, overhead_red, EfficiencyConfig{alpha, beta});
      },
      py::arg("mean_accuracy"), py::arg("overhead_red"), py::arg("alpha") = 0.5,
      py::arg("beta") = 0.5);

  // experiment drivers
  m.def(
      "run_experiment",
      [](const py::object& config) {
        const ExperimentConfig cfg = parse_config_text(config_text_from_object(config));
        const RunOutput out = execute_run(cfg);
        py::list logs;
        for (const auto& log : out.result.logs) logs.append(round_log_to_dict(log));
        py::dict result;
        result["logs"] = logs;
        result["summary"] = summary_to_dict(out.summary);
        result["model_dims"] = out.result.resolved_model_dims;
        return result;
      },
      py::arg("config"), "config is a JSON string or a dict in the config-file schema");
  m.def(
      "run_to_dir",
      [](const py::object& config, const std::string& out_dir) {
        ExperimentConfig cfg = parse_config_text(config_text_from_object(config));
        cfg.out_dir = out_dir;
        const RunOutput out = execute_run(cfg);
        write_run_outputs(out, out_dir);
        return summary_to_dict(out.summary);
      },
      py::arg("config"), py::arg("out_dir"));
  m.def(
      "compare",
      [](const py::object& config, const std::vector<std::string>& strategies,
         const std::string& out_dir) {
        const ExperimentConfig cfg = parse_config_text(config_text_from_object(config));
        py::list rows;
        for (const auto& row : compare_strategies(cfg, strategies, out_dir)) {
          py::dict d;
          d["strategy"] = row.strategy;
          d["mean_acc"] = row.mean_acc;
          d["total_uplink_bytes"] = row.total_uplink_bytes;
          d["sim_seconds"] = row.sim_seconds;
          d["overhead_reduction"] = row.overhead_red;
          d["efficiency"] = row.efficiency_value;
          rows.append(d);
        }
        return rows;
      },
      py::arg("config"), py::arg("strategies"), py::arg("out_dir"));

  m.attr("__version__") = "0.1.0";
}
