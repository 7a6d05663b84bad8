#include "recourse/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "recourse/errors.hpp"

namespace recourse {

Vector NormalizationStats::apply(std::span<const double> raw) const {
  if (raw.size() != mean.size()) throw DimensionError("normalization: feature count mismatch");
  Vector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = constant[i] ? 0.0 : (raw[i] - mean[i]) / stddev[i];
  }
  return out;
}

Vector NormalizationStats::invert(std::span<const double> normalized) const {
  if (normalized.size() != mean.size()) throw DimensionError("normalization: feature count mismatch");
  Vector out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out[i] = constant[i] ? mean[i] : normalized[i] * stddev[i] + mean[i];
  }
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.normalization = normalization;
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.features.push_back(features.at(r));
    out.labels.push_back(labels.at(r));
  }
  return out;
}

void Dataset::validate() const {
  if (features.size() != labels.size()) throw DataError("dataset: row and label counts differ");
  for (std::size_t r = 0; r < features.size(); ++r) {
    if (features[r].size() != dim()) {
      throw DataError("dataset: row " + std::to_string(r) + " has " +
                      std::to_string(features[r].size()) + " features, expected " +
                      std::to_string(dim()));
    }
    for (double v : features[r]) {
      if (!std::isfinite(v)) throw DataError("dataset: non-finite value in row " + std::to_string(r));
    }
    if (labels[r] != 0 && labels[r] != 1) {
      throw DataError("dataset: label outside {0,1} in row " + std::to_string(r));
    }
  }
}

namespace {

Dataset sample_blobs(const SyntheticSpec& spec, const Vector& mu0, const Vector& mu1) {
  if (spec.n_points < 2) throw InvalidInput("synthetic data needs at least 2 points");
  if (mu0.size() != mu1.size() || mu0.empty()) throw DimensionError("synthetic means differ in length");
  if (!(spec.variance > 0.0)) throw InvalidInput("synthetic variance must be positive");

  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, std::sqrt(spec.variance));

  Dataset ds;
  const std::size_t d = mu0.size();
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  ds.features.reserve(spec.n_points);
  ds.labels.reserve(spec.n_points);
  for (std::size_t n = 0; n < spec.n_points; ++n) {
    const int y = coin(rng) ? 1 : 0;
    const Vector& mu = y == 1 ? mu1 : mu0;
    Vector row(d);
    for (std::size_t j = 0; j < d; ++j) row[j] = mu[j] + noise(rng);
    ds.features.push_back(std::move(row));
    ds.labels.push_back(y);
  }
  return ds;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) { return sample_blobs(spec, spec.mu0, spec.mu1); }

Dataset shifted_synthetic(const SyntheticSpec& spec, double shift) {
  Vector mu0 = spec.mu0;
  mu0.at(0) += shift;
  return sample_blobs(spec, mu0, spec.mu1);
}

Dataset ingest_csv(const std::string& path, const std::string& label_column,
                   const std::string& positive_label) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError(path + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw DataError(path + ": missing label column '" + label_column + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) ds.feature_names.push_back(header[c]);
  }

  std::vector<std::size_t> bad_rows;
  bool saw_positive = false;
  std::size_t row_number = 1;  // header is row 1
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      bad_rows.push_back(row_number);
      continue;
    }
    Vector row;
    row.reserve(header.size() - 1);
    bool ok = true;
    for (std::size_t c = 0; c < cells.size() && ok; ++c) {
      if (c == label_idx) continue;
      double v = 0.0;
      ok = parse_double(cells[c], v);
      row.push_back(v);
    }
    if (!ok) {
      bad_rows.push_back(row_number);
      continue;
    }
    const bool positive = trim(cells[label_idx]) == positive_label;
    saw_positive = saw_positive || positive;
    ds.features.push_back(std::move(row));
    ds.labels.push_back(positive ? 1 : 0);
  }

  if (!bad_rows.empty()) {
    std::ostringstream msg;
    msg << path << ": unparsable rows";
    for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i) msg << (i ? ", " : " ") << bad_rows[i];
    if (bad_rows.size() > 20) msg << " (+" << bad_rows.size() - 20 << " more)";
    throw DataError(msg.str());
  }
  if (ds.features.empty()) throw DataError(path + ": no data rows");
  if (!saw_positive) {
    throw DataError(path + ": positive label '" + positive_label + "' not found in column '" +
                    label_column + "'");
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& name : ds.feature_names) out << name << ',';
  out << label_column << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features[r]) out << v << ',';
    out << ds.labels[r] << '\n';
  }
}

NormalizationStats fit_normalization(const Dataset& ds) {
  const std::size_t d = ds.dim();
  NormalizationStats st;
  st.mean.assign(d, 0.0);
  st.stddev.assign(d, 0.0);
  st.constant.assign(d, false);
  if (ds.size() == 0) throw DataError("cannot normalize an empty dataset");
  const double n = static_cast<double>(ds.size());
  for (const auto& row : ds.features) {
    for (std::size_t j = 0; j < d; ++j) st.mean[j] += row[j];
  }
  for (double& m : st.mean) m /= n;
  for (const auto& row : ds.features) {
    for (std::size_t j = 0; j < d; ++j) st.stddev[j] += (row[j] - st.mean[j]) * (row[j] - st.mean[j]);
  }
  for (std::size_t j = 0; j < d; ++j) {
    st.stddev[j] = std::sqrt(st.stddev[j] / n);
    st.constant[j] = !(st.stddev[j] > 1e-12 * std::max(1.0, std::abs(st.mean[j])));
  }
  return st;
}

Dataset apply_normalization(const Dataset& ds, const NormalizationStats& stats) {
  Dataset out = ds;
  for (auto& row : out.features) row = stats.apply(row);
  out.normalization = stats;
  return out;
}

Dataset normalize(const Dataset& ds) { return apply_normalization(ds, fit_normalization(ds)); }

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] == fold) rows.push_back(r);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < assignment.size(); ++r) {
    if (assignment[r] != fold) rows.push_back(r);
  }
  return rows;
}

FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InvalidInput("kfold: k must be positive");
  if (k > n) throw InvalidInput("kfold: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  FoldPlan plan{k, std::vector<std::size_t>(n), seed};
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[order[pos]] = pos % k;
  return plan;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace recourse
