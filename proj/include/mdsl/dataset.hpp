#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mdsl {

struct Sample {
  std::vector<double> features;
  int label = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  int dim() const { return samples.empty() ? 0 : static_cast<int>(samples.front().features.size()); }
};

// Per-class sample counts; the input to every heterogeneity metric.
struct LabelHistogram {
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
  int support() const;  // number of classes with a nonzero count
  std::vector<double> proportions() const;
};

// One homogeneous block of workers sharing a Dirichlet concentration.
struct WorkerGroup {
  double alpha = 1.0;
  int count = 1;
};

struct PartitionSpec {
  std::vector<WorkerGroup> groups;
  int shard_size = 0;
  std::uint64_t seed = 0;
  // When true, workers consume disjoint slices of the source. Default is
  // per-worker sampling from the full source, so shards may overlap.
  bool disjoint = false;

  int num_workers() const;
  // Alpha for worker i, walking the groups in order.
  double alpha_for(int worker) const;
};

LabelHistogram label_histogram(const Dataset& d);

// Label-skewed shards: each worker draws `shard_size` samples without
// replacement following class proportions from Dirichlet(alpha * 1_L).
std::vector<Dataset> partition_dirichlet(const Dataset& source, const PartitionSpec& spec);

// Stratified evaluation set: per-class counts differ by at most one.
Dataset build_global_eval_set(const Dataset& source, int size, std::uint64_t seed);

// Isotropic Gaussian clusters with round-robin labels; the desk-scale
// stand-in for an image dataset.
Dataset make_synthetic_blobs(int num_classes, int dim, int n, double separation, std::uint64_t seed);

// IDX-format reader (big-endian; image magic 0x00000803, label magic
// 0x00000801). Pixels are scaled to [0, 1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Round nonnegative weights to integer counts summing to `total`
// (largest-remainder, ties to the lower index). Shared by partitioning and
// stratified sampling.
std::vector<int> largest_remainder_round(const std::vector<double>& weights, int total);

}  // namespace mdsl
