// SPDX-License-Identifier: Apache-2.0

#include "qenet/report.hpp"

#include <fstream>

namespace qenet {

void Report::kv(const std::string& key, const std::string& value) {
  text_ += key + ": " + value + "\n";
}

void Report::kv(const std::string& key, long value) {
  kv(key, std::to_string(value));
}

void Report::kv(const std::string& key, const Rational& value) {
  kv(key, value.to_string() + " (" + value.to_decimal(8) + ")");
}

void Report::kv_interval(const std::string& key, const Interval& iv,
                         int decimal_places) {
  kv(key + ".exact", iv.to_string());
  kv(key + ".dec", iv.to_decimal_string(decimal_places));
}

void Report::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report file: " + path);
  out << text_;
}

std::string format_events(const std::vector<BudgetEvent>& events) {
  if (events.empty()) return "none";
  std::string out;
  for (const auto& e : events) {
    if (!out.empty()) out += " ";
    out += (e.kind == BudgetEvent::Kind::Concretize ? "concretize("
                                                    : "fallback(") +
           std::to_string(e.layer) + "," + std::to_string(e.index) + ")";
  }
  return out;
}

void report_propagation(Report& report, const BehavioralStructure& structure,
                        const RangeResult& range,
                        const std::vector<std::string>& output_names) {
  auto census = structure.census();
  for (std::size_t l = 0; l < census.size(); ++l) {
    const auto& c = census[l];
    report.kv("census[" + std::to_string(l + 1) + "]",
              "active=" + std::to_string(c.active) +
                  " inactive=" + std::to_string(c.inactive) +
                  " branching=" + std::to_string(c.branching) +
                  " concretized=" + std::to_string(c.concretized));
  }
  std::string branching;
  for (std::size_t l = 0; l < range.branching_per_layer.size(); ++l) {
    if (l) branching += ",";
    branching += std::to_string(range.branching_per_layer[l]);
  }
  report.kv("branching-per-layer", branching);
  report.kv("budget-events", format_events(range.events));
  report_range_summary(report, range.outputs, output_names);
  report.kv("precise", range.precise ? "yes" : "no");
}

void report_range_summary(Report& report,
                          const std::vector<Interval>& outputs,
                          const std::vector<std::string>& output_names) {
  for (std::size_t o = 0; o < outputs.size(); ++o)
    report.kv_interval("range[" + output_names[o] + "]", outputs[o]);
}

}  // namespace qenet
