#pragma once

#include "lrmc/types.hpp"

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lrmc {

/// Coordinates of an observation set, shared between a SampleSet and every
/// SparseResidual derived from it. Stored row-major by (row, col), no
/// duplicates.
struct SampleIndex {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> rows;
  std::vector<Index> cols;

  std::size_t size() const { return rows.size(); }
};

/// The observed entries of a partially known n x m matrix. Immutable.
class SampleSet {
 public:
  SampleSet() : index_(std::make_shared<SampleIndex>()) {}

  /// Validates bounds and uniqueness, then sorts into canonical row-major
  /// order. Throws ArgumentError on duplicates or out-of-range entries.
  SampleSet(Index n_rows, Index n_cols, std::vector<Index> rows,
            std::vector<Index> cols, std::vector<Scalar> values);

  Index n_rows() const { return index_->n_rows; }
  Index n_cols() const { return index_->n_cols; }
  std::size_t size() const { return index_->size(); }
  bool empty() const { return size() == 0; }

  std::span<const Index> rows() const { return index_->rows; }
  std::span<const Index> cols() const { return index_->cols; }
  std::span<const Scalar> values() const { return values_; }

  const std::shared_ptr<const SampleIndex> &index() const { return index_; }

  /// Same coordinates, different values.
  SampleSet with_values(std::vector<Scalar> values) const;

 private:
  SampleSet(std::shared_ptr<const SampleIndex> index,
            std::vector<Scalar> values)
      : index_(std::move(index)), values_(std::move(values)) {}

  std::shared_ptr<const SampleIndex> index_;
  std::vector<Scalar> values_;
};

/// An Omega-supported sparse matrix sharing its coordinates with a SampleSet.
class SparseResidual {
 public:
  SparseResidual(std::shared_ptr<const SampleIndex> index,
                 std::vector<Scalar> values);

  Index n_rows() const { return index_->n_rows; }
  Index n_cols() const { return index_->n_cols; }
  std::size_t size() const { return index_->size(); }
  std::span<const Index> rows() const { return index_->rows; }
  std::span<const Index> cols() const { return index_->cols; }
  std::span<const Scalar> values() const { return values_; }
  const std::shared_ptr<const SampleIndex> &index() const { return index_; }

  /// Densified copy; test and debugging use only.
  Matrix to_dense() const;

 private:
  std::shared_ptr<const SampleIndex> index_;
  std::vector<Scalar> values_;
};

/// out[k] = <G.row(rows[k]), H.row(cols[k])>, never forming G H^T.
std::vector<Scalar> sampled_product(const Matrix &G, const Matrix &H,
                                    const SampleIndex &omega);
std::vector<Scalar> sampled_product(const Matrix &G, const Matrix &H,
                                    const SampleSet &omega);

/// S = (2/|Omega|) (P(G H^T) - P(X)). Throws ArgumentError when Omega is
/// empty.
SparseResidual residual(const Matrix &G, const Matrix &H,
                        const SampleSet &omega);

/// S * D, accumulated in canonical Omega order.
Matrix sp_times_dense(const SparseResidual &S, const Matrix &D);
/// S^T * D, accumulated in canonical Omega order.
Matrix spT_times_dense(const SparseResidual &S, const Matrix &D);

/// Matrix Market coordinate I/O ("matrix coordinate real general",
/// 1-based indices).
SampleSet read_matrix_market(std::istream &in);
SampleSet read_matrix_market(const std::string &path);
void write_matrix_market(std::ostream &out, const SampleSet &samples);
void write_matrix_market(const std::string &path, const SampleSet &samples);

}  // namespace lrmc
