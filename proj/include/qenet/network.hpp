// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_NETWORK_HPP
#define QENET_NETWORK_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qenet/formula.hpp"
#include "qenet/rational.hpp"

namespace qenet {

/// Fully-connected ReLU network with exact rational weights. Hidden layers
/// are ReLU-activated; the output layer is affine only.
struct Network {
  std::string name;
  std::vector<int> layer_sizes;  // input, hidden..., output
  // weights[k] maps layer k activations to layer k+1 weighted sums:
  // weights[k][row][col], row indexes the target neuron.
  std::vector<std::vector<std::vector<Rational>>> weights;
  std::vector<std::vector<Rational>> biases;  // biases[k][row]
  std::vector<Rational> input_mins, input_maxes;
  std::vector<Rational> means, ranges;  // inputSize + 1 entries (last: output)

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  int hidden_layer_count() const {
    return static_cast<int>(layer_sizes.size()) - 2;
  }

  /// ACAS Xu advisory names for 5 outputs, generic names otherwise.
  std::vector<std::string> output_names() const;

  /// Valid input domain mapped into normalized coordinates.
  Box normalized_domain() const;
};

/// Addresses one hidden neuron (and thereby its z- and a-variables).
struct NeuronRef {
  int layer;  // 1-based over hidden layers
  int index;

  friend auto operator<=>(const NeuronRef&, const NeuronRef&) = default;
};

/// Parse the NNet format: line-oriented, comma-separated, "//" comments.
/// All decimal literals are converted exactly; errors name the line.
Network parse_nnet(std::istream& source, std::string name = "");
Network load_nnet(const std::filesystem::path& path);

enum class NormalizeDirection { RawToNormalized, NormalizedToRaw };
enum class OutOfRangePolicy { Clamp, Error };

/// Map a point between raw and normalized input coordinates. Raw inputs
/// are clamped to [input_mins, input_maxes] before normalizing (or rejected,
/// per policy).
std::vector<Rational> normalize_point(
    const Network& net, const std::vector<Rational>& point,
    NormalizeDirection direction,
    OutOfRangePolicy policy = OutOfRangePolicy::Clamp);

/// Exact forward pass on a normalized input; returns output z-values
/// (network space, no output denormalization).
std::vector<Rational> evaluate_exact(const Network& net,
                                     const std::vector<Rational>& input);

/// Indices of all outputs attaining the minimal z-value. A single entry is
/// a definite advisory; several entries are a tie.
std::vector<int> minimal_outputs(const std::vector<Rational>& outputs);
std::vector<int> maximal_outputs(const std::vector<Rational>& outputs);

}  // namespace qenet

#endif
