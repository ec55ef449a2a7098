// SPDX-License-Identifier: Apache-2.0

#include "qenet/network.hpp"

#include <fstream>
#include <istream>
#include <sstream>

namespace qenet {

namespace {

struct LineReader {
  explicit LineReader(std::istream& in) : in(in) {}

  // Next non-comment, non-blank line.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      if (line.compare(start, 2, "//") == 0) continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, number);
  }

  std::istream& in;
  std::size_t number = 0;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos
                         ? std::string()
                         : field.substr(b, e - b + 1));
  }
  while (!fields.empty() && fields.back().empty()) fields.pop_back();
  return fields;
}

std::vector<Rational> parse_values(LineReader& reader, const std::string& line,
                                   std::size_t expected,
                                   const std::string& what) {
  auto fields = split_csv(line);
  if (expected && fields.size() != expected)
    reader.fail(what + ": expected " + std::to_string(expected) +
                " values, found " + std::to_string(fields.size()));
  std::vector<Rational> values;
  values.reserve(fields.size());
  for (const auto& f : fields) {
    try {
      values.push_back(rational_from_decimal(f));
    } catch (const ParseError& e) {
      reader.fail(what + ": " + e.what());
    }
  }
  return values;
}

std::vector<long> parse_ints(LineReader& reader, const std::string& line,
                             std::size_t expected, const std::string& what) {
  auto values = parse_values(reader, line, expected, what);
  std::vector<long> ints;
  ints.reserve(values.size());
  for (const auto& v : values) {
    if (!v.is_integer()) reader.fail(what + ": non-integer value");
    ints.push_back(std::stol(v.to_string()));
  }
  return ints;
}

}  // namespace

std::vector<std::string> Network::output_names() const {
  if (output_dim() == 5) return {"COC", "WL", "WR", "SL", "SR"};
  std::vector<std::string> names;
  for (int i = 0; i < output_dim(); ++i)
    names.push_back("y" + std::to_string(i));
  return names;
}

Box Network::normalized_domain() const {
  std::vector<Interval> dims;
  for (int i = 0; i < input_dim(); ++i) {
    Rational lo = (input_mins[i] - means[i]) / ranges[i];
    Rational hi = (input_maxes[i] - means[i]) / ranges[i];
    dims.push_back(Interval::closed(std::move(lo), std::move(hi)));
  }
  return Box(std::move(dims));
}

Network parse_nnet(std::istream& source, std::string name) {
  LineReader reader(source);
  std::string line;
  Network net;
  net.name = std::move(name);

  if (!reader.next(line)) reader.fail("missing header line");
  auto header = parse_ints(reader, line, 4, "header");
  const long num_layers = header[0];
  const long input_size = header[1];
  const long output_size = header[2];
  if (num_layers < 1 || input_size < 1 || output_size < 1)
    reader.fail("header: non-positive layer counts");

  if (!reader.next(line)) reader.fail("missing layer sizes line");
  auto sizes = parse_ints(reader, line, static_cast<std::size_t>(num_layers) + 1,
                          "layer sizes");
  for (long s : sizes)
    if (s < 1) reader.fail("layer sizes: non-positive size");
  if (sizes.front() != input_size || sizes.back() != output_size)
    reader.fail("layer sizes disagree with header input/output sizes");
  net.layer_sizes.assign(sizes.begin(), sizes.end());

  if (!reader.next(line)) reader.fail("missing legacy flag line");
  // line 3 is a legacy flag, ignored

  if (!reader.next(line)) reader.fail("missing input minimums line");
  net.input_mins = parse_values(reader, line, input_size, "input minimums");
  if (!reader.next(line)) reader.fail("missing input maximums line");
  net.input_maxes = parse_values(reader, line, input_size, "input maximums");
  for (long i = 0; i < input_size; ++i)
    if (net.input_mins[i] > net.input_maxes[i])
      reader.fail("input minimum exceeds maximum at dimension " +
                  std::to_string(i));

  if (!reader.next(line)) reader.fail("missing means line");
  net.means = parse_values(reader, line, input_size + 1, "means");
  if (!reader.next(line)) reader.fail("missing ranges line");
  net.ranges = parse_values(reader, line, input_size + 1, "ranges");
  for (const auto& r : net.ranges)
    if (r.sign() <= 0) reader.fail("ranges must be strictly positive");

  for (long layer = 0; layer < num_layers; ++layer) {
    const long rows = sizes[layer + 1];
    const long cols = sizes[layer];
    std::vector<std::vector<Rational>> matrix;
    matrix.reserve(rows);
    for (long r = 0; r < rows; ++r) {
      if (!reader.next(line))
        reader.fail("missing weight row " + std::to_string(r) + " of layer " +
                    std::to_string(layer + 1));
      matrix.push_back(parse_values(reader, line, cols,
                                    "weight row of layer " +
                                        std::to_string(layer + 1)));
    }
    std::vector<Rational> bias;
    bias.reserve(rows);
    for (long r = 0; r < rows; ++r) {
      if (!reader.next(line))
        reader.fail("missing bias " + std::to_string(r) + " of layer " +
                    std::to_string(layer + 1));
      auto values = parse_values(reader, line, 1,
                                 "bias of layer " + std::to_string(layer + 1));
      bias.push_back(values.front());
    }
    net.weights.push_back(std::move(matrix));
    net.biases.push_back(std::move(bias));
  }
  return net;
}

Network load_nnet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path.string());
  return parse_nnet(in, path.stem().string());
}

std::vector<Rational> normalize_point(const Network& net,
                                      const std::vector<Rational>& point,
                                      NormalizeDirection direction,
                                      OutOfRangePolicy policy) {
  if (point.size() != static_cast<std::size_t>(net.input_dim()))
    throw DimensionError("point dimension " + std::to_string(point.size()) +
                         " does not match input dimension " +
                         std::to_string(net.input_dim()));
  std::vector<Rational> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (direction == NormalizeDirection::RawToNormalized) {
      Rational v = point[i];
      if (v < net.input_mins[i] || v > net.input_maxes[i]) {
        if (policy == OutOfRangePolicy::Error)
          throw PreconditionError("raw input outside valid domain at dimension " +
                                  std::to_string(i));
        v = max(net.input_mins[i], min(v, net.input_maxes[i]));
      }
      out.push_back((v - net.means[i]) / net.ranges[i]);
    } else {
      out.push_back(point[i] * net.ranges[i] + net.means[i]);
    }
  }
  return out;
}

std::vector<Rational> evaluate_exact(const Network& net,
                                     const std::vector<Rational>& input) {
  if (input.size() != static_cast<std::size_t>(net.input_dim()))
    throw DimensionError("input dimension mismatch");
  std::vector<Rational> activations = input;
  const std::size_t layer_count = net.weights.size();
  for (std::size_t layer = 0; layer < layer_count; ++layer) {
    const auto& matrix = net.weights[layer];
    const auto& bias = net.biases[layer];
    std::vector<Rational> next;
    next.reserve(matrix.size());
    for (std::size_t row = 0; row < matrix.size(); ++row) {
      Rational z = bias[row];
      for (std::size_t col = 0; col < activations.size(); ++col)
        z += matrix[row][col] * activations[col];
      const bool is_output_layer = layer + 1 == layer_count;
      next.push_back(!is_output_layer && z.sign() < 0 ? Rational(0)
                                                      : std::move(z));
    }
    activations = std::move(next);
  }
  return activations;
}

std::vector<int> minimal_outputs(const std::vector<Rational>& outputs) {
  std::vector<int> best;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (best.empty() || outputs[i] < outputs[best.front()])
      best = {static_cast<int>(i)};
    else if (outputs[i] == outputs[best.front()])
      best.push_back(static_cast<int>(i));
  }
  return best;
}

std::vector<int> maximal_outputs(const std::vector<Rational>& outputs) {
  std::vector<int> best;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (best.empty() || outputs[i] > outputs[best.front()])
      best = {static_cast<int>(i)};
    else if (outputs[i] == outputs[best.front()])
      best.push_back(static_cast<int>(i));
  }
  return best;
}

}  // namespace qenet
