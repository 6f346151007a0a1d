#include "skewfit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace skewfit {

namespace {

constexpr const char* kMetrics[] = {"auc", "f_measure", "accuracy"};

const MetricSummary& metric_of(const SummaryRow& row, std::string_view metric) {
  if (metric == "auc") return row.auc;
  if (metric == "f_measure") return row.f_measure;
  return row.accuracy;
}

std::string heading(std::string_view metric) {
  if (metric == "auc") return "AUC";
  if (metric == "f_measure") return "F-measure";
  return "Accuracy";
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_number(const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("report csv: bad number '" + text + "'");
  }
  return v;
}

struct Layout {
  std::vector<std::string> datasets;
  std::vector<Method> methods;
  std::map<std::pair<std::string, Method>, const SummaryRow*> cells;
};

Layout layout(const std::vector<SummaryRow>& summary) {
  Layout out;
  for (const auto& row : summary) {
    if (std::find(out.datasets.begin(), out.datasets.end(), row.dataset) == out.datasets.end()) {
      out.datasets.push_back(row.dataset);
    }
    out.cells[{row.dataset, row.method}] = &row;
  }
  for (Method m : all_methods()) {
    for (const auto& row : summary) {
      if (row.method == m) {
        out.methods.push_back(m);
        break;
      }
    }
  }
  return out;
}

std::string markdown(const Layout& lay) {
  std::ostringstream out;
  for (const char* metric : kMetrics) {
    out << "## " << heading(metric) << "\n\n| dataset | statistic |";
    for (Method m : lay.methods) out << ' ' << method_name(m) << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < lay.methods.size(); ++i) out << "---|";
    out << '\n';
    for (const auto& ds : lay.datasets) {
      std::optional<double> best;
      for (Method m : lay.methods) {
        auto it = lay.cells.find({ds, m});
        if (it != lay.cells.end() && it->second->count > 0) {
          const double v = metric_of(*it->second, metric).mean;
          if (!best || v > *best) best = v;
        }
      }
      for (int stat = 0; stat < 2; ++stat) {
        out << "| " << ds << " | " << (stat == 0 ? "mean" : "sd") << " |";
        for (Method m : lay.methods) {
          auto it = lay.cells.find({ds, m});
          if (it == lay.cells.end() || it->second->count == 0) {
            out << " - |";
            continue;
          }
          const MetricSummary& s = metric_of(*it->second, metric);
          if (stat == 0) {
            const bool top = best && s.mean == *best;
            out << ' ' << (top ? "**" : "") << fixed(s.mean) << (top ? "**" : "") << " |";
          } else {
            out << ' ' << fixed(s.sd) << " |";
          }
        }
        out << '\n';
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string csv(const Layout& lay) {
  std::ostringstream out;
  out << "metric,dataset,statistic";
  for (Method m : lay.methods) out << ',' << method_name(m);
  out << '\n';
  for (const char* metric : kMetrics) {
    for (const auto& ds : lay.datasets) {
      for (int stat = 0; stat < 2; ++stat) {
        out << metric << ',' << ds << ',' << (stat == 0 ? "mean" : "sd");
        for (Method m : lay.methods) {
          out << ',';
          auto it = lay.cells.find({ds, m});
          if (it != lay.cells.end() && it->second->count > 0) {
            const MetricSummary& s = metric_of(*it->second, metric);
            out << exact(stat == 0 ? s.mean : s.sd);
          }
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "md") return ReportFormat::kMarkdown;
  if (name == "csv") return ReportFormat::kCsv;
  throw std::invalid_argument("report format must be md or csv");
}

std::vector<ReportEntry> report_entries(const std::vector<SummaryRow>& summary) {
  std::vector<ReportEntry> out;
  for (const char* metric : kMetrics) {
    for (const auto& row : summary) {
      if (row.count == 0) continue;
      const MetricSummary& s = metric_of(row, metric);
      out.push_back({metric, row.dataset, row.method, s.mean, s.sd});
    }
  }
  return out;
}

std::string emit_report(const std::vector<SummaryRow>& summary, ReportFormat format) {
  if (summary.empty()) {
    throw std::invalid_argument("report: no results to summarize");
  }
  const Layout lay = layout(summary);
  return format == ReportFormat::kMarkdown ? markdown(lay) : csv(lay);
}

std::string emit_report(const std::vector<TrialResult>& results, ReportFormat format) {
  return emit_report(summarize(results), format);
}

std::vector<ReportEntry> read_report_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("report csv: missing header");
  }
  const auto header = split_fields(line);
  if (header.size() < 3 || header[0] != "metric" || header[1] != "dataset" || header[2] != "statistic") {
    throw std::runtime_error("report csv: unexpected header");
  }
  std::vector<Method> methods;
  for (std::size_t i = 3; i < header.size(); ++i) methods.push_back(method_from_name(header[i]));

  std::vector<ReportEntry> out;
  std::map<std::tuple<std::string, std::string, Method>, std::size_t> index;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("report csv: row has wrong field count");
    }
    const bool is_mean = fields[2] == "mean";
    if (!is_mean && fields[2] != "sd") {
      throw std::runtime_error("report csv: statistic must be mean or sd");
    }
    for (std::size_t j = 0; j < methods.size(); ++j) {
      const std::string& cell = fields[3 + j];
      if (cell.empty()) continue;
      const auto key = std::make_tuple(fields[0], fields[1], methods[j]);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, out.size()).first;
        out.push_back({fields[0], fields[1], methods[j], 0.0, 0.0});
      }
      (is_mean ? out[it->second].mean : out[it->second].sd) = parse_number(cell);
    }
  }
  return out;
}

}  // namespace skewfit
