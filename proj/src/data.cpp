#include "davrg/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "davrg/errors.hpp"
#include "davrg/rng.hpp"

namespace davrg {

int PartitionedDataset::total_size() const {
  return std::accumulate(sizes.begin(), sizes.end(), 0);
}

bool PartitionedDataset::balanced() const {
  return std::all_of(sizes.begin(), sizes.end(),
                     [&](int s) { return s == sizes[0]; });
}

int PartitionedDataset::max_shard_size() const {
  return *std::max_element(sizes.begin(), sizes.end());
}

Dataset generate_least_squares(int n, int m, double condition,
                               double noise_std, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("need n >= 1 and m >= 1");
  if (condition < 1.0) throw std::invalid_argument("condition must be >= 1");
  if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");

  Eigen::VectorXd lambda_sqrt(m);
  for (int j = 0; j < m; ++j) {
    double t = (m == 1) ? 0.0 : static_cast<double>(j) / (m - 1);
    lambda_sqrt(j) = std::sqrt(std::pow(condition, -t));  // Lambda_max = 1
  }

  Dataset d;
  d.features.resize(n, m);
  d.labels.resize(n);
  d.w_true.resize(m);
  d.has_planted_model = true;
  d.condition = condition;
  d.noise_std = noise_std;
  d.seed = seed;

  RngStream model_rng = make_stream(seed, 0, 0, /*tag=*/0x77747275ULL);
  for (int j = 0; j < m; ++j) d.w_true(j) = model_rng.next_gaussian();

  RngStream rng = make_stream(seed, 0, 0, /*tag=*/0x64617461ULL);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j)
      d.features(i, j) = lambda_sqrt(j) * rng.next_gaussian();
    double noise = (noise_std > 0.0) ? noise_std * rng.next_gaussian() : 0.0;
    d.labels(i) = d.features.row(i).dot(d.w_true) + noise;
  }
  return d;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  struct Row {
    double label;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Row> rows;
  int max_index = 0;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    Row row;
    if (!(ls >> row.label))
      throw parse_error(lineno, "missing label in " + path);
    std::string tok;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw parse_error(lineno, "expected idx:val, got \"" + tok + "\"");
      int idx;
      double val;
      try {
        idx = std::stoi(tok.substr(0, colon));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw parse_error(lineno, "bad idx:val token \"" + tok + "\"");
      }
      if (idx < 1) throw parse_error(lineno, "feature index must be >= 1");
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx, val);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty dataset: " + path);

  Dataset d;
  d.features = FeatureMatrix::Zero(static_cast<int>(rows.size()), max_index);
  d.labels.resize(static_cast<int>(rows.size()));
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    d.labels(i) = rows[i].label;
    for (auto [idx, val] : rows[i].entries) d.features(i, idx - 1) = val;
  }

  std::set<double> distinct(d.labels.begin(), d.labels.end());
  bool already_pm1 = distinct == std::set<double>{-1.0, 1.0} ||
                     distinct == std::set<double>{-1.0} ||
                     distinct == std::set<double>{1.0};
  if (!already_pm1) {
    if (distinct.size() != 2)
      throw std::invalid_argument(path + ": labels are not binary");
    double lo = *distinct.begin();
    for (int i = 0; i < d.labels.size(); ++i)
      d.labels(i) = (d.labels(i) == lo) ? -1.0 : 1.0;
  }
  return d;
}

Dataset normalize_unit(const Dataset& d, int* zero_count) {
  Dataset out = d;
  int zeros = 0;
  for (int i = 0; i < out.size(); ++i) {
    double norm = out.features.row(i).norm();
    if (norm == 0.0)
      ++zeros;
    else
      out.features.row(i) /= norm;
  }
  if (zero_count) *zero_count = zeros;
  return out;
}

PartitionedDataset partition(const Dataset& d, int node_count,
                             PartitionMode mode, std::uint64_t seed,
                             const std::vector<int>& sizes) {
  if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
  const int n = d.size();
  if (node_count > n)
    throw std::invalid_argument("more nodes than samples");

  std::vector<int> shard_sizes;
  switch (mode) {
    case PartitionMode::balanced:
      if (n % node_count != 0)
        throw std::invalid_argument("balanced partition needs K | N");
      shard_sizes.assign(node_count, n / node_count);
      break;
    case PartitionMode::unbalanced: {
      // Proportional random split: exponential weights, floor allocation
      // with the remainder given to the largest shares, minimum size 1.
      RngStream rng = make_stream(seed, 0, 0, /*tag=*/0x756E62ULL);
      std::vector<double> w(node_count);
      double total = 0.0;
      for (auto& x : w) {
        x = -std::log(1.0 - rng.next_double());
        total += x;
      }
      shard_sizes.assign(node_count, 1);
      int assigned = node_count;
      std::vector<std::pair<double, int>> frac(node_count);
      for (int k = 0; k < node_count; ++k) {
        double share = (n - node_count) * w[k] / total;
        int whole = static_cast<int>(std::floor(share));
        shard_sizes[k] += whole;
        assigned += whole;
        frac[k] = {share - whole, k};
      }
      std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
      });
      for (int r = 0; r < n - assigned; ++r) ++shard_sizes[frac[r].second];
      break;
    }
    case PartitionMode::explicit_sizes: {
      if (static_cast<int>(sizes.size()) != node_count)
        throw std::invalid_argument("explicit sizes: wrong count");
      if (std::accumulate(sizes.begin(), sizes.end(), 0) != n)
        throw std::invalid_argument("explicit sizes must sum to N");
      for (int s : sizes)
        if (s < 1) throw std::invalid_argument("every shard needs >= 1 sample");
      shard_sizes = sizes;
      break;
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng = make_stream(seed, 0, 0, /*tag=*/0x70617274ULL);
  shuffle(order, rng);

  PartitionedDataset p;
  p.base = &d;
  p.sizes = shard_sizes;
  p.shard_indices.resize(node_count);
  p.weights.resize(node_count);
  int pos = 0;
  for (int k = 0; k < node_count; ++k) {
    p.shard_indices[k].assign(order.begin() + pos,
                              order.begin() + pos + shard_sizes[k]);
    pos += shard_sizes[k];
    p.weights[k] = static_cast<double>(shard_sizes[k]) / n;
  }
  return p;
}

std::string metadata_json(const Dataset& d, const PartitionedDataset* p) {
  nlohmann::json j;
  j["n"] = d.size();
  j["m"] = d.dimension();
  if (d.has_planted_model) {
    j["seed"] = d.seed;
    j["condition"] = d.condition;
    j["noise_std"] = d.noise_std;
    j["w_true"] = std::vector<double>(d.w_true.begin(), d.w_true.end());
  }
  if (p) {
    j["shard_sizes"] = p->sizes;
    j["weights"] = p->weights;
  }
  return j.dump(2);
}

}  // namespace davrg
