#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdsl/dataset.hpp"

namespace mdsl {

// Fully connected classifier: tanh hidden layers, softmax output. An empty
// hidden list gives a linear softmax model.
struct ModelArch {
  int input_dim = 0;
  std::vector<int> hidden;
  int num_classes = 0;

  std::size_t param_count() const;
  std::vector<int> layer_sizes() const;  // [input_dim, hidden..., num_classes]
  bool operator==(const ModelArch&) const = default;
};

// Flat parameter vector: per layer, a row-major (out x in) weight block
// followed by the bias block.
struct ParamVector {
  std::vector<double> values;
  ModelArch arch;

  std::size_t size() const { return values.size(); }
};

// Glorot-uniform weights, zero biases.
ParamVector init_params(const ModelArch& arch, std::uint64_t seed);

// Softmax class probabilities for one input.
std::vector<double> forward(const ParamVector& w, const std::vector<double>& x);

// Mean over samples of the Euclidean distance between the probability
// output and the one-hot label.
double rmse_loss(const ParamVector& w, const Dataset& d);

// Exact analytic gradient of rmse_loss over the batch.
std::vector<double> grad(const ParamVector& w, const Dataset& batch);

// Fraction of argmax-correct samples; argmax ties go to the lowest class.
double accuracy(const ParamVector& w, const Dataset& d);

// Flat little-endian float64 blob with an 8-byte element-count header.
std::vector<std::uint8_t> params_to_blob(const ParamVector& w);
ParamVector params_from_blob(const std::vector<std::uint8_t>& blob, const ModelArch& arch);
void save_params(const std::string& path, const ParamVector& w);
ParamVector load_params(const std::string& path, const ModelArch& arch);
std::string params_to_json(const ParamVector& w);

}  // namespace mdsl
