#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace skewfit {

/// Binary-labelled feature matrix.
///
/// `features` is n x d, `labels` holds 0.0 / 1.0. Values are treated as
/// immutable once built; every transform returns a new Dataset.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
  std::vector<std::string> feature_names;
  std::string name;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  std::size_t positives() const;
  std::size_t negatives() const { return static_cast<std::size_t>(rows()) - positives(); }
  bool has_both_classes() const { return positives() > 0 && negatives() > 0; }

  /// Rows in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> row_indices) const;
};

/// Throws std::invalid_argument when shapes disagree, labels are not 0/1,
/// a feature is non-finite, or the dataset is empty.
void validate(const Dataset& data);

/// Throws unless `data` is valid and contains both classes.
void require_two_classes(const Dataset& data, std::string_view context);

/// Empty cell, "NA", "?" and any casing of "nan".
bool is_na_token(std::string_view cell);

struct CsvLoad {
  Dataset data;
  std::size_t dropped_rows = 0;
};

/// Reads an RFC-4180 CSV with a header row. Rows with any NA cell are
/// dropped; the label column maps `positive_label` to 1 and every other
/// value to 0. Remaining columns must be numeric.
CsvLoad load_csv(const std::filesystem::path& path, std::string_view label_column,
                 std::string_view positive_label);

/// Removes rows holding a non-finite feature. `dropped` receives the count.
Dataset drop_incomplete_rows(const Dataset& data, std::size_t* dropped = nullptr);

/// Writes features plus a trailing label column (values 0/1).
void write_csv(const Dataset& data, const std::filesystem::path& path,
               std::string_view label_column = "y");

struct NormalizationStats {
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;     // sample standard deviation (divisor n-1)
  std::vector<bool> constant;  // constant columns are divided by 1
};

NormalizationStats fit_normalizer(const Dataset& train);
Dataset apply_normalizer(const NormalizationStats& stats, const Dataset& data);
Dataset invert_normalizer(const NormalizationStats& stats, const Dataset& data);

struct SplitPair {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  // Set when a side is empty or the training side has a single class.
  bool degenerate = false;
  std::string warning;
};

/// Random train/test partition with round(n * train_fraction) training rows.
SplitPair split(const Dataset& data, double train_fraction, std::uint64_t seed);

using Folds = std::vector<std::vector<std::size_t>>;

/// k disjoint index sets covering 0..n-1, sizes differing by at most one.
Folds kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Like kfold_indices, but each class is dealt across the folds separately
/// so every fold receives floor or ceil of its share of positives.
Folds stratified_kfold_indices(const Eigen::VectorXd& labels, std::size_t k, std::uint64_t seed);

/// Generating model for the synthetic benchmark. beta_true[0] multiplies a
/// constant 1, the remaining nine entries multiply iid N(0,1) features.
struct SyntheticSetting {
  int id = 0;
  std::array<double, 10> beta_true{};
  double expected_positive_ratio = 0.0;
};

std::span<const SyntheticSetting> synthetic_settings();
/// Throws std::out_of_range unless 1 <= id <= 6.
const SyntheticSetting& synthetic_setting(int id);

Dataset generate_synthetic(const SyntheticSetting& setting, std::size_t n, std::uint64_t seed);

}  // namespace skewfit
