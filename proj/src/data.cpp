#include "fedsim/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

// indices -> per-client train/test datasets, with the minimum-one-test rule.
ClientSplit build_split(const Dataset& data, int client_id, std::vector<std::size_t> idx,
                        double test_fraction, std::uint64_t seed) {
  if (idx.size() < 2)
    throw std::invalid_argument("partition: client " + std::to_string(client_id) +
                                " received fewer than 2 samples");
  Rng rng(mix_seed({seed, 0x7e57ull, static_cast<std::uint64_t>(client_id)}));
  rng.shuffle(idx);

  auto test_count = static_cast<std::size_t>(
      std::ceil(test_fraction * static_cast<double>(idx.size())));
  test_count = std::clamp<std::size_t>(test_count, 1, idx.size() - 1);

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset d;
    d.num_classes = data.num_classes;
    d.features = Matrix(end - begin, data.feature_dim());
    d.labels.resize(end - begin);
    for (std::size_t r = begin; r < end; ++r) {
      std::copy_n(data.features.row_ptr(idx[r]), data.feature_dim(),
                  d.features.row_ptr(r - begin));
      d.labels[r - begin] = data.labels[idx[r]];
    }
    return d;
  };

  ClientSplit split;
  split.client_id = client_id;
  split.test = take(0, test_count);
  split.train = take(test_count, idx.size());
  return split;
}

std::vector<std::vector<std::size_t>> assign_iid(const Dataset& data, const PartitionSpec& spec) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed({spec.seed, 0x11dull}));
  rng.shuffle(order);

  const std::size_t n = order.size();
  const auto clients = static_cast<std::size_t>(spec.num_clients);
  std::vector<std::vector<std::size_t>> assigned(clients);
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < clients; ++c) {
    // near-equal contiguous chunks of the shuffled order
    const std::size_t count = n / clients + (c < n % clients ? 1 : 0);
    assigned[c].assign(order.begin() + cursor, order.begin() + cursor + count);
    cursor += count;
  }
  return assigned;
}

std::vector<std::vector<std::size_t>> assign_dirichlet(const Dataset& data,
                                                       const PartitionSpec& spec) {
  if (!(spec.dirichlet_alpha > 0.0))
    throw std::invalid_argument("partition: dirichlet_alpha must be > 0");
  const auto clients = static_cast<std::size_t>(spec.num_clients);
  const auto classes = static_cast<std::size_t>(data.num_classes);

  // Per-client class proportions p_i ~ Dirichlet(alpha * 1_K).
  std::vector<std::vector<double>> props(clients, std::vector<double>(classes));
  Rng rng(mix_seed({spec.seed, 0xd112ull}));
  for (auto& p : props) {
    double sum = 0.0;
    for (double& v : p) {
      v = rng.gamma(spec.dirichlet_alpha);
      sum += v;
    }
    for (double& v : p) v /= sum;
  }

  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  for (auto& pool : by_class) rng.shuffle(pool);

  // Split each class pool across clients proportionally to their weight on
  // that class (largest-remainder rounding keeps counts exact).
  std::vector<std::vector<std::size_t>> assigned(clients);
  for (std::size_t c = 0; c < classes; ++c) {
    const auto& pool = by_class[c];
    if (pool.empty()) continue;
    double total_w = 0.0;
    for (std::size_t i = 0; i < clients; ++i) total_w += props[i][c];
    std::vector<std::size_t> counts(clients, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t allocated = 0;
    for (std::size_t i = 0; i < clients; ++i) {
      const double share = static_cast<double>(pool.size()) * props[i][c] / total_w;
      counts[i] = static_cast<std::size_t>(std::floor(share));
      allocated += counts[i];
      remainders.emplace_back(-(share - std::floor(share)), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t r = 0; allocated < pool.size(); ++r, ++allocated)
      ++counts[remainders[r % clients].second];

    std::size_t cursor = 0;
    for (std::size_t i = 0; i < clients; ++i) {
      assigned[i].insert(assigned[i].end(), pool.begin() + cursor,
                         pool.begin() + cursor + counts[i]);
      cursor += counts[i];
    }
  }

  // Dirichlet draws can starve a client; top it up from the richest ones so
  // every client can still form a train/test split.
  for (std::size_t i = 0; i < clients; ++i) {
    while (assigned[i].size() < 2) {
      std::size_t richest = 0;
      for (std::size_t j = 1; j < clients; ++j)
        if (assigned[j].size() > assigned[richest].size()) richest = j;
      if (assigned[richest].size() <= 2)
        throw std::invalid_argument("partition: not enough samples to give every client 2");
      assigned[i].push_back(assigned[richest].back());
      assigned[richest].pop_back();
    }
  }
  return assigned;
}

std::vector<std::vector<std::size_t>> assign_label_shard(const Dataset& data,
                                                         const PartitionSpec& spec) {
  if (spec.shards_per_client < 1)
    throw std::invalid_argument("partition: shards_per_client must be >= 1");
  const auto clients = static_cast<std::size_t>(spec.num_clients);
  const std::size_t shard_count = clients * static_cast<std::size_t>(spec.shards_per_client);
  if (data.size() < shard_count * 2)
    throw std::invalid_argument("partition: too few samples for the requested shards");

  // sort by label, stable in original index order
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.labels[a] < data.labels[b]; });

  std::vector<std::size_t> shard_ids(shard_count);
  std::iota(shard_ids.begin(), shard_ids.end(), std::size_t{0});
  Rng rng(mix_seed({spec.seed, 0x54a2dull}));
  rng.shuffle(shard_ids);

  std::vector<std::vector<std::size_t>> assigned(clients);
  const std::size_t n = order.size();
  for (std::size_t s = 0; s < shard_count; ++s) {
    const std::size_t shard = shard_ids[s];
    const std::size_t begin = shard * n / shard_count;
    const std::size_t end = (shard + 1) * n / shard_count;
    auto& target = assigned[s / static_cast<std::size_t>(spec.shards_per_client)];
    target.insert(target.end(), order.begin() + begin, order.begin() + end);
  }
  return assigned;
}

}  // namespace

Dataset generate_blobs(int num_classes, int dim, int samples_per_class, double spread,
                       std::uint64_t seed) {
  if (num_classes < 1 || dim < 1 || samples_per_class < 1)
    throw std::invalid_argument("generate_blobs: counts must be positive");
  if (spread < 0.0) throw std::invalid_argument("generate_blobs: spread must be >= 0");

  Matrix centers(num_classes, dim);
  Rng center_rng(mix_seed({seed, 0xce27e25ull}));
  for (double& v : centers.data) v = center_rng.uniform(-1.0, 1.0);

  Dataset data;
  data.num_classes = num_classes;
  data.features = Matrix(static_cast<std::size_t>(num_classes) * samples_per_class, dim);
  data.labels.resize(data.features.rows);

  Rng noise_rng(mix_seed({seed, 0x4015eull}));
  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int s = 0; s < samples_per_class; ++s, ++row) {
      double* x = data.features.row_ptr(row);
      const double* center = centers.row_ptr(c);
      for (int j = 0; j < dim; ++j) x[j] = center[j] + spread * noise_rng.normal();
      data.labels[row] = c;
    }
  }
  return data;
}

std::vector<ClientSplit> partition(const Dataset& data, const PartitionSpec& spec) {
  if (spec.num_clients < 1) throw std::invalid_argument("partition: num_clients must be >= 1");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw std::invalid_argument("partition: test_fraction must be in (0, 1)");
  if (data.size() < static_cast<std::size_t>(spec.num_clients) * 2)
    throw std::invalid_argument("partition: need at least 2 samples per client");

  std::vector<std::vector<std::size_t>> assigned;
  switch (spec.scheme) {
    case PartitionScheme::iid: assigned = assign_iid(data, spec); break;
    case PartitionScheme::dirichlet: assigned = assign_dirichlet(data, spec); break;
    case PartitionScheme::label_shard: assigned = assign_label_shard(data, spec); break;
  }

  std::vector<ClientSplit> splits;
  splits.reserve(assigned.size());
  for (std::size_t c = 0; c < assigned.size(); ++c)
    splits.push_back(build_split(data, static_cast<int>(c), std::move(assigned[c]),
                                 spec.test_fraction, spec.seed));
  return splits;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double_cell(const std::string& cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw CsvError("csv row " + std::to_string(row) + ", column " + column +
                   ": not a finite number: '" + cell + "'");
  return value;
}

long long parse_int_cell(const std::string& cell, std::size_t row, const std::string& column) {
  long long value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw CsvError("csv row " + std::to_string(row) + ", column " + column +
                   ": not an integer: '" + cell + "'");
  return value;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct RawRow {
  long long client_id;
  int split;  // 0 train, 1 test, -1 unspecified
  long long label;
  std::vector<double> features;
};

}  // namespace

CsvData load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw CsvError("csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw CsvError("csv: " + path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  if (header.empty() || header[0] != "client_id")
    throw CsvError("csv header: first column must be client_id");
  std::size_t col = 1;
  bool has_split = col < header.size() && header[col] == "split";
  if (has_split) ++col;
  if (col >= header.size() || header[col] != "label")
    throw CsvError("csv header: expected label column after client_id" +
                   std::string(has_split ? "/split" : ""));
  ++col;
  const std::size_t feature_start = col;
  for (std::size_t f = 0; col < header.size(); ++col, ++f)
    if (header[col] != "f" + std::to_string(f))
      throw CsvError("csv header: expected feature column f" + std::to_string(f) + ", got '" +
                     header[col] + "'");
  const std::size_t dim = header.size() - feature_start;
  if (dim == 0) throw CsvError("csv header: no feature columns");

  std::vector<RawRow> rows;
  std::size_t row_no = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw CsvError("csv row " + std::to_string(row_no) + ": expected " +
                     std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    RawRow raw;
    raw.client_id = parse_int_cell(cells[0], row_no, "client_id");
    std::size_t c = 1;
    raw.split = -1;
    if (has_split) {
      if (cells[c] == "train") raw.split = 0;
      else if (cells[c] == "test") raw.split = 1;
      else
        throw CsvError("csv row " + std::to_string(row_no) +
                       ", column split: expected 'train' or 'test', got '" + cells[c] + "'");
      ++c;
    }
    raw.label = parse_int_cell(cells[c], row_no, "label");
    ++c;
    raw.features.resize(dim);
    for (std::size_t f = 0; f < dim; ++f, ++c)
      raw.features[f] = parse_double_cell(cells[c], row_no, "f" + std::to_string(f));
    rows.push_back(std::move(raw));
  }
  if (rows.empty()) throw CsvError("csv: " + path + " has no data rows");

  // contiguous label re-indexing, ascending original labels
  std::map<long long, int> label_map;
  for (const auto& r : rows) label_map.emplace(r.label, 0);
  CsvData result;
  for (auto& [orig, idx] : label_map) {
    idx = static_cast<int>(result.original_labels.size());
    result.original_labels.push_back(orig);
  }
  result.num_classes = static_cast<int>(result.original_labels.size());
  result.feature_dim = static_cast<int>(dim);

  std::map<long long, std::vector<std::size_t>> by_client;
  for (std::size_t i = 0; i < rows.size(); ++i) by_client[rows[i].client_id].push_back(i);

  for (const auto& [cid, idx] : by_client) {
    auto make_dataset = [&](const std::vector<std::size_t>& members) {
      Dataset d;
      d.num_classes = result.num_classes;
      d.features = Matrix(members.size(), dim);
      d.labels.resize(members.size());
      for (std::size_t r = 0; r < members.size(); ++r) {
        const RawRow& raw = rows[members[r]];
        std::copy(raw.features.begin(), raw.features.end(), d.features.row_ptr(r));
        d.labels[r] = label_map.at(raw.label);
      }
      return d;
    };

    ClientSplit split;
    split.client_id = static_cast<int>(cid);
    if (has_split) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i : idx) (rows[i].split == 1 ? test_rows : train_rows).push_back(i);
      if (train_rows.empty() || test_rows.empty())
        throw CsvError("csv: client " + std::to_string(cid) +
                       " needs at least one train and one test row");
      split.train = make_dataset(train_rows);
      split.test = make_dataset(test_rows);
    } else {
      if (idx.size() < 2)
        throw CsvError("csv: client " + std::to_string(cid) + " has fewer than 2 rows");
      std::vector<std::size_t> shuffled = idx;
      Rng rng(mix_seed({schema.seed, 0xc57ull, static_cast<std::uint64_t>(cid)}));
      rng.shuffle(shuffled);
      auto test_count = static_cast<std::size_t>(
          std::ceil(schema.test_fraction * static_cast<double>(shuffled.size())));
      test_count = std::clamp<std::size_t>(test_count, 1, shuffled.size() - 1);
      split.test = make_dataset({shuffled.begin(), shuffled.begin() + test_count});
      split.train = make_dataset({shuffled.begin() + test_count, shuffled.end()});
    }
    result.clients.push_back(std::move(split));
  }
  return result;
}

void write_csv(const std::string& path, const std::vector<ClientSplit>& clients) {
  if (clients.empty()) throw std::invalid_argument("write_csv: no clients");
  std::ofstream out(path);
  if (!out) throw CsvError("csv: cannot write " + path);

  const std::size_t dim = clients.front().train.feature_dim();
  out << "client_id,split,label";
  for (std::size_t f = 0; f < dim; ++f) out << ",f" << f;
  out << "\n";
  for (const auto& client : clients) {
    auto dump = [&](const Dataset& d, const char* tag) {
      for (std::size_t r = 0; r < d.size(); ++r) {
        out << client.client_id << ',' << tag << ',' << d.labels[r];
        for (std::size_t f = 0; f < dim; ++f) out << ',' << format_double(d.features(r, f));
        out << "\n";
      }
    };
    dump(client.train, "train");
    dump(client.test, "test");
  }
  if (!out) throw CsvError("csv: write failed for " + path);
}

}  // namespace fedsim
