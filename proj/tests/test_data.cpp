#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fedsim/data.hpp"
#include "test_support.hpp"

using namespace fedsim;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fedsim_data_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<double> class_histogram(const Dataset& d) {
  std::vector<double> h(d.num_classes, 0.0);
  for (int label : d.labels) h[label] += 1.0;
  for (double& v : h) v /= static_cast<double>(d.size());
  return h;
}

std::vector<double> client_histogram(const ClientSplit& c) {
  std::vector<double> h(c.train.num_classes, 0.0);
  double total = 0.0;
  for (int label : c.train.labels) h[label] += 1.0, total += 1.0;
  for (int label : c.test.labels) h[label] += 1.0, total += 1.0;
  for (double& v : h) v /= total;
  return h;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::fabs(p[i] - q[i]);
  return 0.5 * tv;
}

double mean_client_tv(const Dataset& data, double alpha, std::uint64_t seed) {
  PartitionSpec spec;
  spec.scheme = PartitionScheme::dirichlet;
  spec.num_clients = 12;
  spec.dirichlet_alpha = alpha;
  spec.test_fraction = 0.2;
  spec.seed = seed;
  const auto splits = partition(data, spec);
  const auto global_hist = class_histogram(data);
  double sum = 0.0;
  for (const auto& c : splits) sum += total_variation(client_histogram(c), global_hist);
  return sum / static_cast<double>(splits.size());
}

}  // namespace

TEST_CASE("generate_blobs with zero spread collapses to the centers") {
  const Dataset d = generate_blobs(3, 2, 5, 0.0, 42);
  for (int c = 0; c < 3; ++c)
    for (int s = 1; s < 5; ++s)
      for (int j = 0; j < 2; ++j)
        CHECK(d.features(c * 5 + s, j) == d.features(c * 5, j));
}

TEST_CASE("generate_blobs is balanced and deterministic") {
  const Dataset a = generate_blobs(6, 4, 100, 0.5, 7);
  CHECK(a.size() == 600);
  std::vector<int> counts(6, 0);
  for (int label : a.labels) ++counts[label];
  for (int c : counts) CHECK(c == 100);

  const Dataset b = generate_blobs(6, 4, 100, 0.5, 7);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
}

TEST_CASE("generate_blobs rejects bad arguments") {
  CHECK_THROWS_AS(generate_blobs(0, 2, 5, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_blobs(2, 0, 5, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_blobs(2, 2, 0, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_blobs(2, 2, 5, -0.1, 1), std::invalid_argument);
}

TEST_CASE("iid partition deals near-equal shares with an 80/20 cut") {
  const Dataset d = generate_blobs(6, 3, 100, 0.4, 11);
  PartitionSpec spec;
  spec.scheme = PartitionScheme::iid;
  spec.num_clients = 6;
  spec.test_fraction = 0.2;
  spec.seed = 3;
  const auto splits = partition(d, spec);
  REQUIRE(splits.size() == 6);
  for (const auto& c : splits) {
    CHECK(c.train.size() + c.test.size() == 100);
    CHECK(c.train.size() == 80);
    CHECK(c.test.size() == 20);
  }
}

TEST_CASE("partition results are disjoint and cover distinct samples") {
  // tag every sample with a unique feature value so overlap is detectable
  Dataset d;
  d.num_classes = 4;
  d.features = Matrix(120, 1);
  d.labels.resize(120);
  for (std::size_t i = 0; i < 120; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.labels[i] = static_cast<int>(i % 4);
  }
  for (auto scheme : {PartitionScheme::iid, PartitionScheme::dirichlet,
                      PartitionScheme::label_shard}) {
    PartitionSpec spec;
    spec.scheme = scheme;
    spec.num_clients = 5;
    spec.dirichlet_alpha = 0.5;
    spec.shards_per_client = 2;
    spec.test_fraction = 0.25;
    spec.seed = 17;
    const auto splits = partition(d, spec);
    std::set<double> seen;
    std::size_t total = 0;
    for (const auto& c : splits) {
      for (std::size_t i = 0; i < c.train.size(); ++i) seen.insert(c.train.features(i, 0));
      for (std::size_t i = 0; i < c.test.size(); ++i) seen.insert(c.test.features(i, 0));
      total += c.train.size() + c.test.size();
    }
    CHECK(seen.size() == total);  // no sample appears twice
    CHECK(total <= d.size());
  }
}

TEST_CASE("partition is deterministic") {
  const Dataset d = generate_blobs(4, 3, 50, 0.3, 23);
  PartitionSpec spec;
  spec.scheme = PartitionScheme::dirichlet;
  spec.num_clients = 8;
  spec.dirichlet_alpha = 0.7;
  spec.test_fraction = 0.2;
  spec.seed = 5;
  const auto a = partition(d, spec);
  const auto b = partition(d, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train.features == b[i].train.features);
    CHECK(a[i].test.labels == b[i].test.labels);
  }
}

TEST_CASE("dirichlet with huge alpha approaches the global distribution") {
  const Dataset d = generate_blobs(6, 2, 200, 0.3, 31);
  PartitionSpec spec;
  spec.scheme = PartitionScheme::dirichlet;
  spec.num_clients = 6;
  spec.dirichlet_alpha = 1e6;
  spec.test_fraction = 0.2;
  spec.seed = 9;
  const auto splits = partition(d, spec);
  const auto global_hist = class_histogram(d);
  for (const auto& c : splits) {
    const auto h = client_histogram(c);
    for (std::size_t k = 0; k < h.size(); ++k)
      CHECK(std::fabs(h[k] - global_hist[k]) <= 0.05);
  }
}

TEST_CASE("dirichlet heterogeneity decreases as alpha grows") {
  const Dataset d = generate_blobs(6, 2, 200, 0.3, 37);
  const std::vector<double> alphas = {0.1, 1.0, 10.0, 1e6};
  std::vector<double> tv(alphas.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
    for (std::size_t i = 0; i < alphas.size(); ++i) tv[i] += mean_client_tv(d, alphas[i], seed);
  for (std::size_t i = 0; i + 1 < tv.size(); ++i) CHECK(tv[i] >= tv[i + 1]);
}

TEST_CASE("label shard with one shard per client isolates classes") {
  const Dataset d = generate_blobs(6, 2, 30, 0.3, 41);
  PartitionSpec spec;
  spec.scheme = PartitionScheme::label_shard;
  spec.num_clients = 6;
  spec.shards_per_client = 1;
  spec.test_fraction = 0.2;
  spec.seed = 13;
  const auto splits = partition(d, spec);
  for (const auto& c : splits) {
    std::set<int> classes(c.train.labels.begin(), c.train.labels.end());
    classes.insert(c.test.labels.begin(), c.test.labels.end());
    CHECK(classes.size() == 1);
  }
}

TEST_CASE("partition rejects too-small datasets") {
  const Dataset d = generate_blobs(2, 2, 3, 0.2, 43);  // 6 samples
  PartitionSpec spec;
  spec.num_clients = 4;
  CHECK_THROWS_AS(partition(d, spec), std::invalid_argument);
}

TEST_CASE("every emitted split keeps labels in range") {
  const Dataset d = generate_blobs(5, 3, 40, 0.4, 47);
  PartitionSpec spec;
  spec.scheme = PartitionScheme::dirichlet;
  spec.num_clients = 7;
  spec.dirichlet_alpha = 0.2;
  spec.test_fraction = 0.3;
  spec.seed = 19;
  for (const auto& c : partition(d, spec)) {
    CHECK(c.train.size() >= 1);
    CHECK(c.test.size() >= 1);
    for (int label : c.train.labels) CHECK((label >= 0 && label < 5));
    for (int label : c.test.labels) CHECK((label >= 0 && label < 5));
  }
}

TEST_CASE("load_csv honors an explicit split column") {
  const auto path = temp_file("explicit_split.csv");
  {
    std::ofstream out(path);
    out << "client_id,split,label,f0,f1\n";
    out << "0,train,1,0.5,1.5\n";
    out << "0,test,1,0.25,0.75\n";
    out << "1,train,0,-1,2\n";
    out << "1,test,0,-0.5,1\n";
  }
  const CsvData data = load_csv(path.string(), CsvSchema{});
  REQUIRE(data.clients.size() == 2);
  for (const auto& c : data.clients) {
    CHECK(c.train.size() == 1);
    CHECK(c.test.size() == 1);
  }
  CHECK(data.feature_dim == 2);
  CHECK(data.num_classes == 2);
  CHECK(data.clients[0].train.features(0, 1) == 1.5);
}

TEST_CASE("load_csv re-indexes sparse labels and records the mapping") {
  const auto path = temp_file("sparse_labels.csv");
  {
    std::ofstream out(path);
    out << "client_id,label,f0\n";
    out << "0,2,0.1\n0,5,0.2\n0,9,0.3\n0,2,0.4\n";
  }
  const CsvData data = load_csv(path.string(), CsvSchema{});
  CHECK(data.num_classes == 3);
  CHECK(data.original_labels == std::vector<long long>{2, 5, 9});
  for (const auto& c : data.clients)
    for (int label : c.train.labels) CHECK((label >= 0 && label < 3));
}

TEST_CASE("load_csv names the offending cell") {
  const auto path = temp_file("bad_cell.csv");
  {
    std::ofstream out(path);
    out << "client_id,label,f0,f1\n";
    out << "0,1,0.5,1.0\n";
    out << "0,0,NaN,2.0\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(path.string(), CsvSchema{}),
                       doctest::Contains("row 3, column f0"), CsvError);
}

TEST_CASE("load_csv rejects malformed headers and split tokens") {
  const auto bad_header = temp_file("bad_header.csv");
  {
    std::ofstream out(bad_header);
    out << "client_id,label,x0\n0,1,0.5\n";
  }
  CHECK_THROWS_AS(load_csv(bad_header.string(), CsvSchema{}), CsvError);

  const auto bad_split = temp_file("bad_split.csv");
  {
    std::ofstream out(bad_split);
    out << "client_id,split,label,f0\n0,validate,1,0.5\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(bad_split.string(), CsvSchema{}),
                       doctest::Contains("column split"), CsvError);

  CHECK_THROWS_AS(load_csv(temp_file("missing.csv").string(), CsvSchema{}), CsvError);
}

TEST_CASE("write_csv then load_csv round trips the clients") {
  const Dataset d = generate_blobs(3, 4, 30, 0.3, 53);
  PartitionSpec spec;
  spec.num_clients = 3;
  spec.test_fraction = 0.2;
  spec.seed = 29;
  const auto original = partition(d, spec);

  const auto path = temp_file("round_trip.csv");
  write_csv(path.string(), original);
  const CsvData loaded = load_csv(path.string(), CsvSchema{});
  REQUIRE(loaded.clients.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(loaded.clients[i].train.features == original[i].train.features);
    CHECK(loaded.clients[i].train.labels == original[i].train.labels);
    CHECK(loaded.clients[i].test.features == original[i].test.features);
    CHECK(loaded.clients[i].test.labels == original[i].test.labels);
  }
}
