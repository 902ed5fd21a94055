#pragma once

#include "proxsarah/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace proxsarah {

using FeatureIndex = std::uint32_t;

/// One sparse data row z_i, or (a_i, b_i) for classification. Borrowed from a Dataset.
struct SparseRow {
  std::span<const FeatureIndex> indices;  // 0-based, strictly increasing
  std::span<const double> values;
  double label = 0.0;

  double dot(const Vector& w) const;
  double squared_norm() const;
  /// out += scale * row
  void axpy(double scale, Vector& out) const;
};

/// Rows in compressed sparse row layout; memory is O(nnz).
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dimension) : dimension_(dimension) {}

  /// Appends a row; indices must be strictly increasing. Grows the dimension
  /// to cover the largest index.
  void add_row(std::span<const FeatureIndex> indices, std::span<const double> values, double label);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  std::size_t dimension() const { return dimension_; }
  std::size_t nnz() const { return indices_.size(); }
  SparseRow row(std::size_t i) const;
  std::span<const double> labels() const { return labels_; }

  /// Declares d explicitly; throws if a stored index is >= d.
  void set_dimension(std::size_t d);

  bool normalized() const { return normalized_; }
  void set_normalized(bool value) { normalized_ = value; }

  const std::string& source() const { return source_; }
  void set_source(std::string source) { source_ = std::move(source); }

  /// Every row has unit l2 norm within tol.
  bool rows_unit_norm(double tol = 1e-12) const;

 private:
  std::vector<std::size_t> row_start_{0};
  std::vector<FeatureIndex> indices_;
  std::vector<double> values_;
  std::vector<double> labels_;
  std::size_t dimension_ = 0;
  bool normalized_ = false;
  std::string source_;
};

struct ParseOptions {
  /// Declared feature count; a larger observed index is a parse error.
  std::optional<std::size_t> dimension;
};

/// Parses `<label> <idx>:<val> ...` lines with 1-based strictly increasing
/// indices. `#` starts a comment; blank lines, CRLF endings and trailing
/// whitespace are accepted. Throws ParseError with the 1-based line number.
Dataset parse_libsvm(std::istream& in, const ParseOptions& options = {});

/// Reads a file, transparently decompressing names ending in ".gz".
Dataset read_libsvm_file(const std::filesystem::path& path, const ParseOptions& options = {});

/// Writes 1-based indices with 17 significant digits.
void write_libsvm(std::ostream& out, const Dataset& ds);

/// Maps two label values to {-1, +1} (smaller -> -1). {-1, +1} is left as is.
/// Throws UnsupportedOperation for more than two distinct labels.
Dataset canonicalize_labels(const Dataset& ds);

struct NormalizeResult {
  Dataset dataset;
  std::size_t dropped_zero_rows = 0;
};

/// Scales each nonzero row to unit l2 norm and drops zero rows. Rows already
/// within 1e-15 of unit norm are left untouched, which makes it idempotent.
NormalizeResult normalize_rows(const Dataset& ds);

/// Deterministic shuffled split: floor(n * test_fraction) test rows, rest train.
/// Rows keep their original relative order inside each part.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Nonnegative sparse rows (density 0.1, at least one entry), unit norm, label 0.
Dataset synth_nnpca(std::size_t n, std::size_t d, std::uint64_t seed);

/// Sparse rows with entries in [-1, 1], unit norm, labelled by a planted
/// hyperplane; each label is flipped with probability 1 - separability.
Dataset synth_binclass(std::size_t n, std::size_t d, std::uint64_t seed, double separability);

/// The planted hyperplane used by synth_binclass for the same (d, seed).
Vector planted_hyperplane(std::size_t d, std::uint64_t seed);

}  // namespace proxsarah
