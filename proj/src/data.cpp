#include "proxsarah/data.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/rng.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace proxsarah {

double SparseRow::dot(const Vector& w) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) acc += values[k] * w[indices[k]];
  return acc;
}

double SparseRow::squared_norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return acc;
}

void SparseRow::axpy(double scale, Vector& out) const {
  for (std::size_t k = 0; k < indices.size(); ++k) out[indices[k]] += scale * values[k];
}

void Dataset::add_row(std::span<const FeatureIndex> indices, std::span<const double> values, double label) {
  if (indices.size() != values.size()) throw InvalidArgument("row indices and values differ in length");
  for (std::size_t k = 1; k < indices.size(); ++k) {
    if (indices[k] <= indices[k - 1]) throw InvalidArgument("row indices must be strictly increasing");
  }
  indices_.insert(indices_.end(), indices.begin(), indices.end());
  values_.insert(values_.end(), values.begin(), values.end());
  row_start_.push_back(indices_.size());
  labels_.push_back(label);
  if (!indices.empty()) dimension_ = std::max<std::size_t>(dimension_, std::size_t{indices.back()} + 1);
}

SparseRow Dataset::row(std::size_t i) const {
  const std::size_t lo = row_start_[i];
  const std::size_t hi = row_start_[i + 1];
  return SparseRow{std::span<const FeatureIndex>(indices_).subspan(lo, hi - lo),
                   std::span<const double>(values_).subspan(lo, hi - lo), labels_[i]};
}

void Dataset::set_dimension(std::size_t d) {
  for (FeatureIndex j : indices_) {
    if (j >= d) throw InvalidArgument("declared dimension " + std::to_string(d) + " is below observed index " +
                                      std::to_string(j + 1));
  }
  dimension_ = d;
}

bool Dataset::rows_unit_norm(double tol) const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(std::sqrt(row(i).squared_norm()) - 1.0) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// LIBSVM parsing

namespace {

using LineSource = std::function<bool(std::string&)>;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

Dataset parse_lines(const LineSource& next_line, const ParseOptions& options) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::vector<FeatureIndex> indices;
  std::vector<double> values;
  while (next_line(line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);

    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      while (pos < view.size() && is_space(view[pos])) ++pos;
      const std::size_t start = pos;
      while (pos < view.size() && !is_space(view[pos])) ++pos;
      if (pos > start) tokens.push_back(view.substr(start, pos - start));
    }
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_number(tokens[0], label) || !std::isfinite(label)) {
      throw ParseError(line_no, "malformed label '" + std::string(tokens[0]) + "'");
    }
    indices.clear();
    values.clear();
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const std::string_view tok = tokens[k];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "expected idx:val, got '" + std::string(tok) + "'");
      std::uint64_t index = 0;
      double value = 0.0;
      if (!parse_number(tok.substr(0, colon), index) || index == 0) {
        throw ParseError(line_no, "malformed feature index in '" + std::string(tok) + "'");
      }
      if (!parse_number(tok.substr(colon + 1), value) || !std::isfinite(value)) {
        throw ParseError(line_no, "non-numeric value in '" + std::string(tok) + "'");
      }
      if (index - 1 > std::numeric_limits<FeatureIndex>::max()) throw ParseError(line_no, "feature index too large");
      const auto zero_based = static_cast<FeatureIndex>(index - 1);
      if (!indices.empty() && zero_based <= indices.back()) {
        throw ParseError(line_no, "feature indices must be strictly increasing");
      }
      if (options.dimension && zero_based >= *options.dimension) {
        throw ParseError(line_no, "feature index " + std::to_string(index) + " exceeds declared dimension " +
                                      std::to_string(*options.dimension));
      }
      indices.push_back(zero_based);
      values.push_back(value);
    }
    ds.add_row(indices, values, label);
  }
  if (options.dimension) ds.set_dimension(*options.dimension);
  return ds;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const ParseOptions& options) {
  return parse_lines([&in](std::string& line) { return static_cast<bool>(std::getline(in, line)); }, options);
}

Dataset read_libsvm_file(const std::filesystem::path& path, const ParseOptions& options) {
  Dataset ds;
  if (path.extension() == ".gz") {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) throw InvalidArgument("cannot open " + path.string());
    std::unique_ptr<gzFile_s, int (*)(gzFile)> guard(file, gzclose);
    std::vector<char> buffer(1 << 16);
    const auto next = [&](std::string& line) {
      line.clear();
      while (true) {
        if (gzgets(file, buffer.data(), static_cast<int>(buffer.size())) == nullptr) {
          int err = 0;
          gzerror(file, &err);
          if (err != Z_OK && err != Z_STREAM_END) throw InvalidArgument("gzip read error in " + path.string());
          return !line.empty();
        }
        line.append(buffer.data());
        if (!line.empty() && line.back() == '\n') {
          line.pop_back();
          return true;
        }
      }
    };
    ds = parse_lines(next, options);
  } else {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    ds = parse_libsvm(in, options);
  }
  ds.set_source(path.string());
  return ds;
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const SparseRow r = ds.row(i);
    out << r.label;
    for (std::size_t k = 0; k < r.indices.size(); ++k) out << ' ' << (r.indices[k] + 1) << ':' << r.values[k];
    out << '\n';
  }
  out.precision(old_precision);
}

namespace {

template <typename Transform>
Dataset rebuild(const Dataset& ds, const Transform& transform) {
  Dataset out(ds.dimension());
  out.set_source(ds.source());
  out.set_normalized(ds.normalized());
  std::vector<double> values;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const SparseRow r = ds.row(i);
    values.assign(r.values.begin(), r.values.end());
    double label = r.label;
    if (transform(values, label)) out.add_row(r.indices, values, label);
  }
  return out;
}

}  // namespace

Dataset canonicalize_labels(const Dataset& ds) {
  std::set<double> distinct(ds.labels().begin(), ds.labels().end());
  if (distinct.size() > 2) {
    throw UnsupportedOperation("binary classification needs at most two label values, found " +
                               std::to_string(distinct.size()));
  }
  std::map<double, double> mapping;
  if (distinct == std::set<double>{-1.0, 1.0}) {
    mapping = {{-1.0, -1.0}, {1.0, 1.0}};
  } else if (distinct.size() == 2) {
    mapping = {{*distinct.begin(), -1.0}, {*distinct.rbegin(), 1.0}};
  } else if (distinct.size() == 1) {
    const double v = *distinct.begin();
    mapping = {{v, (v == 1.0 || v == -1.0) ? v : (v <= 0.0 ? -1.0 : 1.0)}};
  }
  return rebuild(ds, [&](std::vector<double>&, double& label) {
    label = mapping.at(label);
    return true;
  });
}

NormalizeResult normalize_rows(const Dataset& ds) {
  NormalizeResult result;
  result.dataset = rebuild(ds, [&](std::vector<double>& values, double&) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (sq == 0.0) {
      ++result.dropped_zero_rows;
      return false;
    }
    const double norm = std::sqrt(sq);
    if (std::abs(norm - 1.0) > 1e-15) {
      for (double& v : values) v /= norm;
    }
    return true;
  });
  result.dataset.set_normalized(true);
  if (result.dropped_zero_rows > 0) {
    log::warn("normalize_rows: dropped " + std::to_string(result.dropped_zero_rows) + " zero rows");
  }
  return result;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must lie in [0, 1)");
  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed, stream_id(0, StreamPurpose::kSplit));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_below(i)]);
  const auto test_count = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < test_count; ++k) in_test[order[k]] = true;

  Dataset train(ds.dimension());
  Dataset test(ds.dimension());
  for (Dataset* part : {&train, &test}) {
    part->set_source(ds.source());
    part->set_normalized(ds.normalized());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const SparseRow r = ds.row(i);
    (in_test[i] ? test : train).add_row(r.indices, r.values, r.label);
  }
  return {std::move(train), std::move(test)};
}

namespace {

std::size_t row_nnz(std::size_t d) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(d))), 1, d);
}

}  // namespace

Dataset synth_nnpca(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidArgument("synthetic data needs n, d >= 1");
  RngStream rng(seed, stream_id(1, StreamPurpose::kSynthetic));
  Dataset ds(d);
  const std::size_t k = row_nnz(d);
  std::vector<FeatureIndex> idx;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    const MiniBatch support = sample_minibatch(rng, d, k);
    idx.assign(support.ids.begin(), support.ids.end());
    vals.resize(k);
    double sq = 0.0;
    for (double& v : vals) {
      v = 0.05 + 0.95 * rng.uniform01();
      sq += v * v;
    }
    for (double& v : vals) v /= std::sqrt(sq);
    ds.add_row(idx, vals, 0.0);
  }
  ds.set_normalized(true);
  ds.set_source("synthetic-nnpca(n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                ",seed=" + std::to_string(seed) + ")");
  return ds;
}

Vector planted_hyperplane(std::size_t d, std::uint64_t seed) {
  RngStream rng(seed, stream_id(2, StreamPurpose::kSynthetic));
  Vector w(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = 2.0 * rng.uniform01() - 1.0;
  return w;
}

Dataset synth_binclass(std::size_t n, std::size_t d, std::uint64_t seed, double separability) {
  if (n < 1 || d < 1) throw InvalidArgument("synthetic data needs n, d >= 1");
  if (!(separability >= 0.0 && separability <= 1.0)) throw InvalidArgument("separability must lie in [0, 1]");
  const Vector planted = planted_hyperplane(d, seed);
  RngStream rng(seed, stream_id(3, StreamPurpose::kSynthetic));
  Dataset ds(d);
  const std::size_t k = row_nnz(d);
  std::vector<FeatureIndex> idx;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    const MiniBatch support = sample_minibatch(rng, d, k);
    idx.assign(support.ids.begin(), support.ids.end());
    vals.resize(k);
    double sq = 0.0;
    for (double& v : vals) {
      do {
        v = 2.0 * rng.uniform01() - 1.0;
      } while (v == 0.0);
      sq += v * v;
    }
    double score = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      vals[j] /= std::sqrt(sq);
      score += vals[j] * planted[idx[j]];
    }
    double label = score >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform01() >= separability) label = -label;
    ds.add_row(idx, vals, label);
  }
  ds.set_normalized(true);
  std::ostringstream src;
  src << "synthetic-binclass(n=" << n << ",d=" << d << ",seed=" << seed << ",separability=" << separability << ")";
  ds.set_source(src.str());
  return ds;
}

}  // namespace proxsarah
