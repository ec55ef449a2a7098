// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_VAR_HPP
#define QENET_VAR_HPP

#include <compare>
#include <cstdint>
#include <string>

namespace qenet {

/// Role of a variable in the network encoding. Every variable has exactly
/// one role; ordering over (role, layer, index) is the canonical variable
/// order used by atom normalization and elimination heuristics.
enum class VarRole : std::uint8_t {
  Input,        // x_i
  WeightedSum,  // z-variable of neuron (layer, index)
  Activation,   // a-variable of neuron (layer, index)
  Output,       // y_i
  Perturbation  // the free delta in backward derivation
};

struct VarId {
  VarRole role = VarRole::Input;
  std::int32_t layer = 0;  // 1-based hidden layer; 0 where not applicable
  std::int32_t index = 0;

  static VarId input(int i) { return {VarRole::Input, 0, i}; }
  static VarId weighted_sum(int layer, int i) {
    return {VarRole::WeightedSum, layer, i};
  }
  static VarId activation(int layer, int i) {
    return {VarRole::Activation, layer, i};
  }
  static VarId output(int i) { return {VarRole::Output, 0, i}; }
  static VarId perturbation() { return {VarRole::Perturbation, 0, 0}; }

  friend auto operator<=>(const VarId&, const VarId&) = default;

  std::string name() const {
    switch (role) {
      case VarRole::Input: return "x" + std::to_string(index);
      case VarRole::WeightedSum:
        return "z" + std::to_string(layer) + "_" + std::to_string(index);
      case VarRole::Activation:
        return "a" + std::to_string(layer) + "_" + std::to_string(index);
      case VarRole::Output: return "y" + std::to_string(index);
      case VarRole::Perturbation: return "delta";
    }
    return "?";
  }
};

}  // namespace qenet

#endif
