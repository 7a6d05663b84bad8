#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recourse/glm.hpp"

namespace recourse {

/// Per-feature standardization statistics. Constant features keep stddev 0
/// and map to 0.
struct NormalizationStats {
  Vector mean;
  Vector stddev;
  std::vector<bool> constant;

  Vector apply(std::span<const double> raw) const;
  Vector invert(std::span<const double> normalized) const;
};

struct Dataset {
  std::vector<Vector> features;  // n rows of length d
  std::vector<int> labels;       // 0 or 1
  std::vector<std::string> feature_names;
  std::optional<NormalizationStats> normalization;

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return feature_names.size(); }
  /// Rows selected by index, normalization stats carried over.
  Dataset subset(const std::vector<std::size_t>& rows) const;
  /// Throws DataError on ragged rows, non-finite entries or labels outside {0,1}.
  void validate() const;
};

/// Two isotropic Gaussian blobs with a fair-coin label.
struct SyntheticSpec {
  std::size_t n_points = 1000;
  Vector mu0{-2.0, -2.0};
  Vector mu1{2.0, 2.0};
  double variance = 0.5;
  std::uint64_t seed = 0;
};

Dataset generate_synthetic(const SyntheticSpec& spec);
/// Same draws as generate_synthetic(spec) with the class-0 mean moved by
/// `shift` along the first feature.
Dataset shifted_synthetic(const SyntheticSpec& spec, double shift);

/// Reads a comma-separated file with a header row. Every column except
/// `label_column` is a numeric feature; a label equal to `positive_label`
/// maps to 1 and anything else to 0.
Dataset ingest_csv(const std::string& path, const std::string& label_column,
                   const std::string& positive_label);
void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column = "label");

NormalizationStats fit_normalization(const Dataset& ds);
Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats);
/// z-score every feature with statistics computed on `ds` itself.
Dataset normalize(const Dataset& ds);

struct FoldPlan {
  std::size_t k = 5;
  std::vector<std::size_t> assignment;  // fold index per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed);

/// Deterministic seed for a work item, mixed from a base seed and a stream id.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace recourse
