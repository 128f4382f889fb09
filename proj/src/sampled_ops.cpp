#include "lrmc/sampled_ops.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace lrmc {

SampleSet::SampleSet(Index n_rows, Index n_cols, std::vector<Index> rows,
                     std::vector<Index> cols, std::vector<Scalar> values) {
  require(n_rows >= 0 && n_cols >= 0, "SampleSet: negative dimensions");
  require(rows.size() == cols.size() && rows.size() == values.size(),
          "SampleSet: rows, cols and values must have equal length");
  const std::size_t count = rows.size();
  for (std::size_t k = 0; k < count; ++k) {
    require(rows[k] >= 0 && rows[k] < n_rows && cols[k] >= 0 &&
                cols[k] < n_cols,
            "SampleSet: index (" + std::to_string(rows[k]) + ", " +
                std::to_string(cols[k]) + ") out of range");
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
  });

  auto index = std::make_shared<SampleIndex>();
  index->n_rows = n_rows;
  index->n_cols = n_cols;
  index->rows.reserve(count);
  index->cols.reserve(count);
  values_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t src = order[k];
    if (k > 0 && rows[src] == index->rows.back() &&
        cols[src] == index->cols.back()) {
      throw ArgumentError("SampleSet: duplicate index (" +
                          std::to_string(rows[src]) + ", " +
                          std::to_string(cols[src]) + ")");
    }
    index->rows.push_back(rows[src]);
    index->cols.push_back(cols[src]);
    values_.push_back(values[src]);
  }
  index_ = std::move(index);
}

SampleSet SampleSet::with_values(std::vector<Scalar> values) const {
  require(values.size() == size(), "SampleSet::with_values: length mismatch");
  return SampleSet(index_, std::move(values));
}

SparseResidual::SparseResidual(std::shared_ptr<const SampleIndex> index,
                               std::vector<Scalar> values)
    : index_(std::move(index)), values_(std::move(values)) {
  require(index_ != nullptr, "SparseResidual: null index");
  require(values_.size() == index_->size(),
          "SparseResidual: values length must equal |Omega|");
}

Matrix SparseResidual::to_dense() const {
  Matrix out = Matrix::Zero(n_rows(), n_cols());
  for (std::size_t k = 0; k < size(); ++k)
    out(index_->rows[k], index_->cols[k]) = values_[k];
  return out;
}

std::vector<Scalar> sampled_product(const Matrix &G, const Matrix &H,
                                    const SampleIndex &omega) {
  require(G.cols() == H.cols(), "sampled_product: factor ranks differ");
  require(G.rows() == omega.n_rows && H.rows() == omega.n_cols,
          "sampled_product: factor shapes do not match the sample set");
  const Index rank = G.cols();
  std::vector<Scalar> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const Index i = omega.rows[k];
    const Index j = omega.cols[k];
    Scalar acc = 0.0;
    for (Index c = 0; c < rank; ++c) acc += G(i, c) * H(j, c);
    out[k] = acc;
  }
  return out;
}

std::vector<Scalar> sampled_product(const Matrix &G, const Matrix &H,
                                    const SampleSet &omega) {
  return sampled_product(G, H, *omega.index());
}

SparseResidual residual(const Matrix &G, const Matrix &H,
                        const SampleSet &omega) {
  require(!omega.empty(), "residual: empty sample set");
  std::vector<Scalar> values = sampled_product(G, H, omega);
  const Scalar scale = 2.0 / static_cast<Scalar>(omega.size());
  const auto observed = omega.values();
  for (std::size_t k = 0; k < values.size(); ++k)
    values[k] = scale * (values[k] - observed[k]);
  return SparseResidual(omega.index(), std::move(values));
}

Matrix sp_times_dense(const SparseResidual &S, const Matrix &D) {
  require(S.n_cols() == D.rows(), "sp_times_dense: dimension mismatch");
  const Index width = D.cols();
  Matrix out = Matrix::Zero(S.n_rows(), width);
  const auto rows = S.rows();
  const auto cols = S.cols();
  const auto vals = S.values();
  for (std::size_t k = 0; k < S.size(); ++k) {
    const Scalar v = vals[k];
    const Index i = rows[k];
    const Index j = cols[k];
    for (Index c = 0; c < width; ++c) out(i, c) += v * D(j, c);
  }
  return out;
}

Matrix spT_times_dense(const SparseResidual &S, const Matrix &D) {
  require(S.n_rows() == D.rows(), "spT_times_dense: dimension mismatch");
  const Index width = D.cols();
  Matrix out = Matrix::Zero(S.n_cols(), width);
  const auto rows = S.rows();
  const auto cols = S.cols();
  const auto vals = S.values();
  for (std::size_t k = 0; k < S.size(); ++k) {
    const Scalar v = vals[k];
    const Index i = rows[k];
    const Index j = cols[k];
    for (Index c = 0; c < width; ++c) out(j, c) += v * D(i, c);
  }
  return out;
}

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SampleSet read_matrix_market(std::istream &in) {
  std::string line;
  if (!std::getline(in, line))
    throw ArgumentError("Matrix Market: empty input");
  std::istringstream banner(lowercase(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw ArgumentError("Matrix Market: expected a coordinate matrix banner");
  if (field != "real" && field != "double" && field != "integer")
    throw ArgumentError("Matrix Market: unsupported field '" + field + "'");
  if (symmetry != "general")
    throw ArgumentError("Matrix Market: only 'general' symmetry is supported");

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  Index n_rows = 0, n_cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> n_rows >> n_cols >> nnz) || n_rows < 0 || n_cols < 0 ||
        nnz < 0)
      throw ArgumentError("Matrix Market: malformed size line");
  }

  std::vector<Index> rows, cols;
  std::vector<Scalar> values;
  rows.reserve(nnz);
  cols.reserve(nnz);
  values.reserve(nnz);
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    Scalar v = 0.0;
    if (!(in >> i >> j >> v))
      throw ArgumentError("Matrix Market: expected " + std::to_string(nnz) +
                          " entries, got " + std::to_string(k));
    rows.push_back(i - 1);
    cols.push_back(j - 1);
    values.push_back(v);
  }
  return SampleSet(n_rows, n_cols, std::move(rows), std::move(cols),
                   std::move(values));
}

SampleSet read_matrix_market(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream &out, const SampleSet &samples) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << samples.n_rows() << ' ' << samples.n_cols() << ' ' << samples.size()
      << '\n';
  const auto rows = samples.rows();
  const auto cols = samples.cols();
  const auto vals = samples.values();
  out << std::setprecision(std::numeric_limits<Scalar>::max_digits10);
  for (std::size_t k = 0; k < samples.size(); ++k)
    out << rows[k] + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
}

void write_matrix_market(const std::string &path, const SampleSet &samples) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  write_matrix_market(out, samples);
}

}  // namespace lrmc
