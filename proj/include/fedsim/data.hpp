#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/matrix.hpp"

namespace fedsim {

struct Dataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // class ids in [0, num_classes)
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dim() const { return features.cols; }
};

struct ClientSplit {
  int client_id = 0;
  Dataset train;
  Dataset test;
};

enum class PartitionScheme { iid, dirichlet, label_shard };

struct PartitionSpec {
  PartitionScheme scheme = PartitionScheme::iid;
  int num_clients = 1;
  double dirichlet_alpha = 1.0;  // dirichlet only
  int shards_per_client = 1;     // label_shard only
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

// Gaussian class clusters around deterministic centers (uniform in [-1,1]^dim),
// samples_per_class points per class, noise sigma = spread.
Dataset generate_blobs(int num_classes, int dim, int samples_per_class, double spread,
                       std::uint64_t seed);

// Split a dataset across spec.num_clients disjoint clients and cut each
// client's share into train/test. Every client ends up with at least one
// train and one test sample.
std::vector<ClientSplit> partition(const Dataset& data, const PartitionSpec& spec);

struct CsvSchema {
  double test_fraction = 0.2;  // used when the file has no split column
  std::uint64_t seed = 0;
};

struct CsvData {
  std::vector<ClientSplit> clients;
  std::vector<long long> original_labels;  // original_labels[new_id] = label in the file
  int feature_dim = 0;
  int num_classes = 0;
};

// Reads the tabular client format: header `client_id[,split],label,f0..f{d-1}`,
// UTF-8, comma separated, '.' decimal point. Rows are grouped by client_id;
// an explicit split column wins, otherwise schema.test_fraction applies per
// client. Labels are re-indexed to contiguous [0, num_classes) with the
// mapping recorded in the result. Malformed input raises CsvError naming the
// row and column.
CsvData load_csv(const std::string& path, const CsvSchema& schema);

// Writes client splits in the same format, with the split column filled in.
void write_csv(const std::string& path, const std::vector<ClientSplit>& clients);

class CsvError : public std::runtime_error {
 public:
  explicit CsvError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fedsim
