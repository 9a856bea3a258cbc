#ifndef DAVRG_DATA_HPP
#define DAVRG_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace davrg {

using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix features;  // one sample per row
  Eigen::VectorXd labels;
  bool has_planted_model = false;
  Eigen::VectorXd w_true;  // planted model for synthetic data
  double condition = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(features.rows()); }
  int dimension() const { return static_cast<int>(features.cols()); }
};

// Read-only view of one node's samples (indices into a shared dataset).
class ShardView {
 public:
  ShardView() = default;
  ShardView(const Dataset* data, const std::vector<int>* indices)
      : data_(data), indices_(indices) {}

  int size() const { return static_cast<int>(indices_->size()); }
  Eigen::Ref<const Eigen::VectorXd> feature(int n) const {
    return data_->features.row((*indices_)[n]).transpose();
  }
  double label(int n) const { return data_->labels((*indices_)[n]); }

 private:
  const Dataset* data_ = nullptr;
  const std::vector<int>* indices_ = nullptr;
};

struct PartitionedDataset {
  const Dataset* base = nullptr;
  std::vector<std::vector<int>> shard_indices;
  std::vector<int> sizes;        // N_k
  std::vector<double> weights;   // q_k = N_k / N

  int node_count() const { return static_cast<int>(shard_indices.size()); }
  int total_size() const;
  ShardView shard(int k) const {
    return ShardView(base, &shard_indices[k]);
  }
  bool balanced() const;
  int max_shard_size() const;
};

// Features ~ N(0, Lambda) with log-spaced diagonal, Lambda_max = 1 and
// Lambda_max/Lambda_min = condition; labels are h'w_true + N(0, noise_std^2)
// for a planted w_true recorded on the dataset.
Dataset generate_least_squares(int n, int m, double condition,
                               double noise_std, std::uint64_t seed);

// Sparse text format "label idx:val ...", 1-based indices, densified.
// Binary labels are remapped to {-1,+1} (smaller value -> -1).
Dataset load_libsvm(const std::string& path);

// Scales every feature row to unit Euclidean norm; zero rows pass through
// unchanged and are counted in zero_count when given.
Dataset normalize_unit(const Dataset& d, int* zero_count = nullptr);

enum class PartitionMode { balanced, unbalanced, explicit_sizes };

PartitionedDataset partition(const Dataset& d, int node_count,
                             PartitionMode mode, std::uint64_t seed,
                             const std::vector<int>& sizes = {});

std::string metadata_json(const Dataset& d, const PartitionedDataset* p = nullptr);

}  // namespace davrg

#endif
