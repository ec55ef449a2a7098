// SPDX-License-Identifier: Apache-2.0

#ifndef QENET_REPORT_HPP
#define QENET_REPORT_HPP

#include <string>
#include <vector>

#include "qenet/propagation.hpp"

namespace qenet {

/// Key/value machine report, rendered in insertion order so identical
/// queries produce byte-identical documents.
class Report {
 public:
  void kv(const std::string& key, const std::string& value);
  void kv(const std::string& key, long value);
  void kv(const std::string& key, const Rational& value);
  void kv_interval(const std::string& key, const Interval& iv,
                   int decimal_places = 8);

  const std::string& text() const { return text_; }
  void write_file(const std::string& path) const;

 private:
  std::string text_ = "qenet-report 1\n";
};

/// Census and budget-event lines shared by every query report.
void report_propagation(Report& report, const BehavioralStructure& structure,
                        const RangeResult& range,
                        const std::vector<std::string>& output_names);
void report_range_summary(Report& report,
                          const std::vector<Interval>& outputs,
                          const std::vector<std::string>& output_names);
std::string format_events(const std::vector<BudgetEvent>& events);

}  // namespace qenet

#endif
