#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skewfit/bench.hpp"

namespace skewfit {

enum class ReportFormat { kMarkdown, kCsv };

/// "md" or "csv"; throws std::invalid_argument otherwise.
ReportFormat report_format_from_name(std::string_view name);

/// One (metric, dataset, method) cell of a report.
struct ReportEntry {
  std::string metric;  // auc, f_measure, accuracy
  std::string dataset;
  Method method = Method::kLogistic;
  double mean = 0.0;
  double sd = 0.0;
};

std::vector<ReportEntry> report_entries(const std::vector<SummaryRow>& summary);

/// One table per metric: a mean row and an s.d. row per dataset, one column
/// per method. Markdown marks the highest mean in each dataset with bold.
/// Throws std::invalid_argument on an empty summary.
std::string emit_report(const std::vector<SummaryRow>& summary, ReportFormat format);
std::string emit_report(const std::vector<TrialResult>& results, ReportFormat format);

/// Parses the CSV form back into entries.
std::vector<ReportEntry> read_report_csv(std::string_view text);

}  // namespace skewfit
