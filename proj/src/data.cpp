#include "skewfit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "skewfit/rng.hpp"

namespace skewfit {

namespace {

using Record = std::vector<std::string>;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// RFC-4180: comma separated, double-quote escaping, CRLF or LF line ends,
// quoted fields may span lines.
std::vector<Record> parse_csv(const std::string& text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    i = 3;
  }
  auto end_record = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = current.size() == 1 && trim(current.front()).empty();
    if (!blank) {
      records.push_back(std::move(current));
    }
    current.clear();
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        current.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') {
          ++i;
        }
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw std::runtime_error("csv: unterminated quoted field");
  }
  if (field_started || !field.empty() || !current.empty()) {
    end_record();
  }
  return records;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') {
    cell.remove_prefix(1);
  }
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) {
    return s;
  }
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') {
      quoted.push_back('"');
    }
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
}

Dataset Dataset::subset(std::span<const std::size_t> row_indices) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(row_indices.size()), cols());
  out.labels.resize(static_cast<Eigen::Index>(row_indices.size()));
  for (std::size_t r = 0; r < row_indices.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(row_indices[r]);
    if (src >= rows()) {
      throw std::out_of_range("Dataset::subset: row index out of range");
    }
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(src);
    out.labels(static_cast<Eigen::Index>(r)) = labels(src);
  }
  out.feature_names = feature_names;
  out.name = name;
  return out;
}

void validate(const Dataset& data) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw std::invalid_argument("dataset must have at least one row and one column");
  }
  if (data.labels.size() != data.rows()) {
    throw std::invalid_argument("label count does not match row count");
  }
  if (!data.feature_names.empty() &&
      data.feature_names.size() != static_cast<std::size_t>(data.cols())) {
    throw std::invalid_argument("feature name count does not match column count");
  }
  for (double y : data.labels) {
    if (y != 0.0 && y != 1.0) {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
  if (!data.features.allFinite()) {
    throw std::invalid_argument("features contain non-finite values");
  }
}

void require_two_classes(const Dataset& data, std::string_view context) {
  validate(data);
  if (!data.has_both_classes()) {
    throw std::invalid_argument(std::string(context) + ": training data must contain both classes");
  }
}

bool is_na_token(std::string_view cell) {
  cell = trim(cell);
  if (cell.empty() || cell == "NA" || cell == "?") {
    return true;
  }
  if (cell.size() == 3) {
    auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
    return lower(cell[0]) == 'n' && lower(cell[1]) == 'a' && lower(cell[2]) == 'n';
  }
  return false;
}

CsvLoad load_csv(const std::filesystem::path& path, std::string_view label_column,
                 std::string_view positive_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open csv file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto records = parse_csv(buffer.str());
  if (records.empty()) {
    throw std::runtime_error("csv file has no header: " + path.string());
  }

  const Record& header = records.front();
  std::size_t label_index = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (trim(header[c]) == label_column) {
      label_index = c;
      break;
    }
  }
  if (label_index == header.size()) {
    throw std::runtime_error("label column '" + std::string(label_column) + "' not found in " +
                             path.string());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_index) {
      names.emplace_back(trim(header[c]));
    }
  }
  if (names.empty()) {
    throw std::runtime_error("csv has no feature columns: " + path.string());
  }

  const std::string positive(trim(positive_label));
  std::vector<double> values;
  std::vector<double> labels;
  std::size_t dropped = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (rec.size() != header.size()) {
      throw std::runtime_error("csv row " + std::to_string(r + 1) + " has " +
                               std::to_string(rec.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    bool missing = false;
    std::vector<double> row;
    row.reserve(names.size());
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (is_na_token(rec[c])) {
        missing = true;
        continue;
      }
      if (c == label_index) {
        continue;
      }
      double v = 0.0;
      if (!parse_double(rec[c], v)) {
        throw std::runtime_error("csv row " + std::to_string(r + 1) + ", column '" +
                                 std::string(trim(header[c])) + "': non-numeric value '" + rec[c] +
                                 "'");
      }
      if (!std::isfinite(v)) {
        missing = true;
      }
      row.push_back(v);
    }
    if (missing) {
      ++dropped;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(trim(rec[label_index]) == positive ? 1.0 : 0.0);
  }
  if (labels.empty()) {
    throw std::runtime_error("csv has zero rows after removing missing values: " + path.string());
  }

  CsvLoad result;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto d = static_cast<Eigen::Index>(names.size());
  result.data.features =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          values.data(), n, d);
  result.data.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), n);
  result.data.feature_names = std::move(names);
  result.data.name = path.stem().string();
  result.dropped_rows = dropped;
  return result;
}

Dataset drop_incomplete_rows(const Dataset& data, std::size_t* dropped) {
  std::vector<std::size_t> keep;
  keep.reserve(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    if (data.features.row(r).allFinite()) {
      keep.push_back(static_cast<std::size_t>(r));
    }
  }
  if (dropped != nullptr) {
    *dropped = static_cast<std::size_t>(data.rows()) - keep.size();
  }
  return data.subset(keep);
}

void write_csv(const Dataset& data, const std::filesystem::path& path, std::string_view label_column) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write csv file: " + path.string());
  }
  out.precision(17);
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const std::string name = c < static_cast<Eigen::Index>(data.feature_names.size())
                                 ? data.feature_names[static_cast<std::size_t>(c)]
                                 : "x" + std::to_string(c + 1);
    out << quote_if_needed(name) << ',';
  }
  out << quote_if_needed(std::string(label_column)) << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      out << data.features(r, c) << ',';
    }
    out << static_cast<int>(data.labels(r)) << '\n';
  }
}

NormalizationStats fit_normalizer(const Dataset& train) {
  if (train.rows() < 2) {
    throw std::invalid_argument("fit_normalizer needs at least two rows");
  }
  const double n = static_cast<double>(train.rows());
  NormalizationStats stats;
  stats.means = train.features.colwise().mean().transpose();
  stats.stddevs.resize(train.cols());
  stats.constant.assign(static_cast<std::size_t>(train.cols()), false);
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const double ss = (train.features.col(c).array() - stats.means(c)).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    const double scale = std::max(1.0, std::abs(stats.means(c)));
    if (!(sd > 1e-12 * scale)) {
      stats.constant[static_cast<std::size_t>(c)] = true;
      stats.stddevs(c) = 1.0;
    } else {
      stats.stddevs(c) = sd;
    }
  }
  return stats;
}

Dataset apply_normalizer(const NormalizationStats& stats, const Dataset& data) {
  if (stats.means.size() != data.cols() || stats.stddevs.size() != data.cols()) {
    throw std::invalid_argument("normalizer dimension does not match dataset columns");
  }
  Dataset out = data;
  out.features = (data.features.rowwise() - stats.means.transpose()).array().rowwise() /
                 stats.stddevs.transpose().array();
  return out;
}

Dataset invert_normalizer(const NormalizationStats& stats, const Dataset& data) {
  if (stats.means.size() != data.cols() || stats.stddevs.size() != data.cols()) {
    throw std::invalid_argument("normalizer dimension does not match dataset columns");
  }
  Dataset out = data;
  out.features = (data.features.array().rowwise() * stats.stddevs.transpose().array()).matrix();
  out.features.rowwise() += stats.means.transpose();
  return out;
}

SplitPair split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
  }
  const auto n = static_cast<std::size_t>(data.rows());
  Rng rng(seed);
  const auto order = permutation(n, rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));

  SplitPair pair;
  pair.seed = seed;
  pair.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  pair.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  pair.train = data.subset(pair.train_rows);
  pair.test = data.subset(pair.test_rows);
  if (pair.train_rows.empty() || pair.test_rows.empty()) {
    pair.degenerate = true;
    pair.warning = "split produced an empty side";
  } else if (!pair.train.has_both_classes()) {
    pair.degenerate = true;
    pair.warning = "training side contains a single class";
  }
  return pair;
}

Folds kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw std::invalid_argument("kfold_indices requires 2 <= k <= n");
  }
  Rng rng(seed);
  const auto order = permutation(n, rng);
  Folds folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

Folds stratified_kfold_indices(const Eigen::VectorXd& labels, std::size_t k, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(labels.size());
  if (k < 2 || k > n) {
    throw std::invalid_argument("stratified_kfold_indices requires 2 <= k <= n");
  }
  Rng rng(seed);
  const auto order = permutation(n, rng);
  Folds folds(k);
  // Deal positives first, then continue the rotation with negatives so fold
  // sizes still differ by at most one.
  std::size_t slot = 0;
  for (double cls : {1.0, 0.0}) {
    for (std::size_t idx : order) {
      if (labels(static_cast<Eigen::Index>(idx)) == cls) {
        folds[slot % k].push_back(idx);
        ++slot;
      }
    }
  }
  return folds;
}

std::span<const SyntheticSetting> synthetic_settings() {
  static const std::array<SyntheticSetting, 6> kSettings{{
      {1, {-1, 1, 0, 0, 0, 0, 0, 0, 0, 0}, 0.29},
      {2, {-1, 0, -1, -1, 1, -2, 0, 0, 0, 0}, 0.37},
      {3, {1, 0, 0, 0, 0, 0, 0, -1, 2, 0}, 0.64},
      {4, {0, 0, 0, -1, 2, 0, 0, 0, 0, 0}, 0.50},
      {5, {-4, 0, 0, 0, 2, 0, 0, 0, 0, 0}, 0.06},
      {6, {4, 0, 0, 3, 0, 0, 0, 0, 0, 0}, 0.88},
  }};
  return kSettings;
}

const SyntheticSetting& synthetic_setting(int id) {
  const auto settings = synthetic_settings();
  if (id < 1 || id > static_cast<int>(settings.size())) {
    throw std::out_of_range("synthetic setting id must be in 1..6");
  }
  return settings[static_cast<std::size_t>(id - 1)];
}

Dataset generate_synthetic(const SyntheticSetting& setting, std::size_t n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("generate_synthetic requires n >= 1");
  }
  constexpr Eigen::Index kFeatures = 9;
  Rng rng(seed);
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(n), kFeatures);
  data.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    double eta = setting.beta_true[0];
    for (Eigen::Index j = 0; j < kFeatures; ++j) {
      const double x = rng.normal();
      data.features(i, j) = x;
      eta += setting.beta_true[static_cast<std::size_t>(j + 1)] * x;
    }
    const double p = 1.0 / (1.0 + std::exp(-eta));
    data.labels(i) = rng.uniform() < p ? 1.0 : 0.0;
  }
  for (Eigen::Index j = 0; j < kFeatures; ++j) {
    data.feature_names.push_back("x" + std::to_string(j + 2));
  }
  data.name = "setting" + std::to_string(setting.id);
  return data;
}

}  // namespace skewfit
