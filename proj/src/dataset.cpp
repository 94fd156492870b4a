#include "mdsl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "mdsl/errors.hpp"
#include "mdsl/rng.hpp"

namespace mdsl {

std::int64_t LabelHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

int LabelHistogram::support() const {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                        [](std::int64_t c) { return c > 0; }));
}

std::vector<double> LabelHistogram::proportions() const {
  const double n = static_cast<double>(total());
  std::vector<double> p(counts.size(), 0.0);
  if (n <= 0.0) return p;
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / n;
  return p;
}

int PartitionSpec::num_workers() const {
  int c = 0;
  for (const auto& g : groups) c += g.count;
  return c;
}

double PartitionSpec::alpha_for(int worker) const {
  int offset = 0;
  for (const auto& g : groups) {
    if (worker < offset + g.count) return g.alpha;
    offset += g.count;
  }
  throw DomainError("worker index " + std::to_string(worker) + " outside partition groups");
}

LabelHistogram label_histogram(const Dataset& d) {
  LabelHistogram h;
  h.counts.assign(static_cast<std::size_t>(std::max(d.num_classes, 0)), 0);
  for (const auto& s : d.samples) {
    if (s.label < 0 || s.label >= d.num_classes)
      throw DomainError("sample label " + std::to_string(s.label) + " outside [0, " +
                        std::to_string(d.num_classes) + ")");
    ++h.counts[static_cast<std::size_t>(s.label)];
  }
  return h;
}

std::vector<int> largest_remainder_round(const std::vector<double>& weights, int total) {
  const std::size_t n = weights.size();
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw DomainError("negative or non-finite rounding weight");
    wsum += w;
  }
  std::vector<int> counts(n, 0);
  if (total == 0) return counts;
  if (wsum <= 0.0) throw DomainError("rounding weights sum to zero");

  std::vector<double> frac(n);
  int assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = weights[i] / wsum * total;
    counts[i] = static_cast<int>(std::floor(exact));
    frac[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (int k = 0; k < total - assigned; ++k) ++counts[order[static_cast<std::size_t>(k) % n]];
  return counts;
}

namespace {

// Draw k distinct positions from `pool` (partial Fisher-Yates on a copy when
// overlapping; in place when the pool is shared across workers).
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t>& pool, int k,
                                                  std::mt19937_64& eng) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t at = pick(eng);
    out.push_back(pool[at]);
    pool[at] = pool.back();
    pool.pop_back();
  }
  return out;
}

// Cap per-class targets by availability, pushing any deficit onto classes
// with spare capacity in proportion to that capacity.
void cap_and_redistribute(std::vector<int>& targets, const std::vector<std::int64_t>& avail) {
  const std::size_t n = targets.size();
  for (int guard = 0; guard < static_cast<int>(n) + 1; ++guard) {
    int deficit = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (targets[c] > avail[c]) {
        deficit += targets[c] - static_cast<int>(avail[c]);
        targets[c] = static_cast<int>(avail[c]);
      }
    }
    if (deficit == 0) return;
    std::vector<double> spare(n, 0.0);
    double spare_sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      spare[c] = static_cast<double>(avail[c] - targets[c]);
      spare_sum += spare[c];
    }
    if (spare_sum < deficit)
      throw SizeError("source exhausted while redistributing class deficits");
    const std::vector<int> extra = largest_remainder_round(spare, deficit);
    for (std::size_t c = 0; c < n; ++c) targets[c] += extra[c];
  }
  throw SizeError("class deficit redistribution did not converge");
}

}  // namespace

std::vector<Dataset> partition_dirichlet(const Dataset& source, const PartitionSpec& spec) {
  if (spec.groups.empty()) throw DomainError("partition spec has no worker groups");
  for (const auto& g : spec.groups) {
    if (!(g.alpha > 0.0)) throw DomainError("dirichlet concentration must be positive");
    if (g.count < 1) throw DomainError("worker group count must be positive");
  }
  if (spec.shard_size <= 0) throw DomainError("shard_size must be positive");
  const int num_workers = spec.num_workers();
  if (source.samples.size() <
      static_cast<std::size_t>(num_workers) * static_cast<std::size_t>(spec.shard_size))
    throw SizeError("source has " + std::to_string(source.samples.size()) + " samples, need " +
                    std::to_string(static_cast<std::size_t>(num_workers) * spec.shard_size));
  if (source.num_classes < 1) throw DomainError("source has no classes");

  const int L = source.num_classes;
  std::vector<std::vector<std::size_t>> class_pool(static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < source.samples.size(); ++i)
    class_pool[static_cast<std::size_t>(source.samples[i].label)].push_back(i);

  std::vector<Dataset> shards;
  shards.reserve(static_cast<std::size_t>(num_workers));
  for (int w = 0; w < num_workers; ++w) {
    auto eng = make_engine(spec.seed, rng_tag::kDirichlet, static_cast<std::uint64_t>(w));
    const double alpha = spec.alpha_for(w);

    std::vector<double> proportions(static_cast<std::size_t>(L));
    std::gamma_distribution<double> gamma(alpha, 1.0);
    double sum = 0.0;
    for (auto& p : proportions) {
      p = gamma(eng);
      sum += p;
    }
    if (sum <= 0.0) {
      // Extremely small alpha can underflow every gamma draw; fall back to a
      // single uniformly chosen class, the distribution's limit behavior.
      std::uniform_int_distribution<int> pick(0, L - 1);
      proportions.assign(static_cast<std::size_t>(L), 0.0);
      proportions[static_cast<std::size_t>(pick(eng))] = 1.0;
    }

    std::vector<int> targets = largest_remainder_round(proportions, spec.shard_size);
    std::vector<std::int64_t> avail(static_cast<std::size_t>(L));
    for (int c = 0; c < L; ++c) avail[static_cast<std::size_t>(c)] =
        static_cast<std::int64_t>(class_pool[static_cast<std::size_t>(c)].size());
    cap_and_redistribute(targets, avail);

    Dataset shard;
    shard.num_classes = L;
    shard.samples.reserve(static_cast<std::size_t>(spec.shard_size));
    for (int c = 0; c < L; ++c) {
      if (targets[static_cast<std::size_t>(c)] == 0) continue;
      if (spec.disjoint) {
        auto chosen = draw_without_replacement(class_pool[static_cast<std::size_t>(c)],
                                               targets[static_cast<std::size_t>(c)], eng);
        for (std::size_t idx : chosen) shard.samples.push_back(source.samples[idx]);
      } else {
        std::vector<std::size_t> pool = class_pool[static_cast<std::size_t>(c)];
        auto chosen = draw_without_replacement(pool, targets[static_cast<std::size_t>(c)], eng);
        for (std::size_t idx : chosen) shard.samples.push_back(source.samples[idx]);
      }
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

Dataset build_global_eval_set(const Dataset& source, int size, std::uint64_t seed) {
  if (size <= 0) throw CoverageError("evaluation set size must be positive");
  if (source.num_classes < 1) throw CoverageError("source has no classes");
  const int L = source.num_classes;

  std::vector<std::vector<std::size_t>> class_pool(static_cast<std::size_t>(L));
  for (std::size_t i = 0; i < source.samples.size(); ++i)
    class_pool[static_cast<std::size_t>(source.samples[i].label)].push_back(i);
  for (int c = 0; c < L; ++c)
    if (class_pool[static_cast<std::size_t>(c)].empty())
      throw CoverageError("class " + std::to_string(c) + " absent from source");

  const std::vector<int> quota =
      largest_remainder_round(std::vector<double>(static_cast<std::size_t>(L), 1.0), size);
  Dataset eval;
  eval.num_classes = L;
  eval.samples.reserve(static_cast<std::size_t>(size));
  for (int c = 0; c < L; ++c) {
    auto& pool = class_pool[static_cast<std::size_t>(c)];
    if (quota[static_cast<std::size_t>(c)] > static_cast<int>(pool.size()))
      throw CoverageError("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                          " samples, stratification needs " +
                          std::to_string(quota[static_cast<std::size_t>(c)]));
    auto eng = make_engine(seed, rng_tag::kEvalSet, static_cast<std::uint64_t>(c));
    auto chosen = draw_without_replacement(pool, quota[static_cast<std::size_t>(c)], eng);
    for (std::size_t idx : chosen) eval.samples.push_back(source.samples[idx]);
  }
  return eval;
}

Dataset make_synthetic_blobs(int num_classes, int dim, int n, double separation,
                             std::uint64_t seed) {
  if (num_classes < 2) throw DomainError("blobs need at least two classes");
  if (dim <= 0) throw DomainError("feature dimension must be positive");
  if (n <= 0) throw DomainError("sample count must be positive");
  if (n < num_classes) throw DomainError("need at least one sample per class");
  if (separation < 0.0) throw DomainError("separation must be nonnegative");

  // Axis-aligned means separated pairwise by `separation` (sign-flipped when
  // classes outnumber dimensions).
  std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes),
                                         std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  const double scale = separation / std::sqrt(2.0);
  for (int c = 0; c < num_classes; ++c) {
    const int axis = c % dim;
    const double sign = (c / dim) % 2 == 0 ? 1.0 : -1.0;
    means[static_cast<std::size_t>(c)][static_cast<std::size_t>(axis)] = sign * scale;
  }

  auto eng = make_engine(seed, rng_tag::kBlobs);
  std::normal_distribution<double> unit(0.0, 1.0);
  Dataset d;
  d.num_classes = num_classes;
  d.samples.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int label = k % num_classes;
    auto& s = d.samples[static_cast<std::size_t>(k)];
    s.label = label;
    s.features.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j)
      s.features[static_cast<std::size_t>(j)] =
          means[static_cast<std::size_t>(label)][static_cast<std::size_t>(j)] + unit(eng);
  }
  return d;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated IDX file: " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
         std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path);
  std::ifstream lbl(labels_path, std::ios::binary);
  if (!lbl) throw IoError("cannot open " + labels_path);

  const std::uint32_t img_magic = read_be32(img, images_path);
  if (img_magic != 0x00000803u)
    throw FormatError("bad image magic in " + images_path + " (got " + std::to_string(img_magic) +
                      ", want 2051)");
  const std::uint32_t lbl_magic = read_be32(lbl, labels_path);
  if (lbl_magic != 0x00000801u)
    throw FormatError("bad label magic in " + labels_path + " (got " + std::to_string(lbl_magic) +
                      ", want 2049)");

  const std::uint32_t n_img = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);
  const std::uint32_t n_lbl = read_be32(lbl, labels_path);
  if (n_img != n_lbl)
    throw FormatError("image/label count mismatch: " + std::to_string(n_img) + " vs " +
                      std::to_string(n_lbl));

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  Dataset d;
  d.samples.resize(n_img);
  int max_label = -1;
  for (std::uint32_t i = 0; i < n_img; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
    if (!img) throw FormatError("truncated IDX file: " + images_path);
    unsigned char label;
    lbl.read(reinterpret_cast<char*>(&label), 1);
    if (!lbl) throw FormatError("truncated IDX file: " + labels_path);
    auto& s = d.samples[i];
    s.label = static_cast<int>(label);
    max_label = std::max(max_label, s.label);
    s.features.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p) s.features[p] = buf[p] / 255.0;
  }
  d.num_classes = max_label + 1;
  return d;
}

}  // namespace mdsl
