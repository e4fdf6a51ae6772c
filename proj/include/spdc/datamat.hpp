#ifndef SPDC_DATAMAT_HPP_
#define SPDC_DATAMAT_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace spdc {

using index_t = std::int32_t;

// Non-owning view of one sparse row or column.
struct sparse_vector_view {
  std::span<const index_t> index;
  std::span<const double> value;

  std::size_t nnz() const noexcept { return index.size(); }

  double dot(const Eigen::VectorXd& dense) const noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k)
      s += value[k] * dense[index[k]];
    return s;
  }

  // dense += scale * this
  void axpy_into(double scale, Eigen::VectorXd& dense) const noexcept {
    for (std::size_t k = 0; k < index.size(); ++k)
      dense[index[k]] += scale * value[k];
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (double v : value) s += v * v;
    return s;
  }
};

enum class label_mode { classification, regression };

struct triplet {
  index_t row;
  index_t col;
  double value;
};

// n x d design matrix stored twice (CSR for instances, CSC for features),
// with labels and per-row 2-norms. Immutable once built.
class sparse_dataset {
 public:
  sparse_dataset() = default;

  // Entries with value 0 are dropped. Duplicate (row, col) pairs and all-zero
  // rows are rejected. Labels must be +-1 in classification mode.
  static sparse_dataset from_triplets(std::size_t n, std::size_t d,
                                      std::vector<triplet> entries,
                                      std::vector<double> labels,
                                      label_mode mode = label_mode::classification);

  static sparse_dataset from_dense(const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& y,
                                   label_mode mode = label_mode::classification);

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::size_t nnz() const noexcept { return row_val_.size(); }
  label_mode mode() const noexcept { return mode_; }

  sparse_vector_view row(std::size_t i) const noexcept {
    const auto b = row_ptr_[i], e = row_ptr_[i + 1];
    return {std::span<const index_t>(row_idx_.data() + b, e - b),
            std::span<const double>(row_val_.data() + b, e - b)};
  }
  sparse_vector_view col(std::size_t j) const noexcept {
    const auto b = col_ptr_[j], e = col_ptr_[j + 1];
    return {std::span<const index_t>(col_idx_.data() + b, e - b),
            std::span<const double>(col_val_.data() + b, e - b)};
  }

  const Eigen::VectorXd& labels() const noexcept { return labels_; }
  double label(std::size_t i) const noexcept { return labels_[i]; }
  const Eigen::VectorXd& row_norms() const noexcept { return row_norms_; }
  double max_row_norm() const noexcept;

  // X w (length n)
  Eigen::VectorXd multiply(const Eigen::VectorXd& w) const;
  // X^T v (length d)
  Eigen::VectorXd multiply_transpose(const Eigen::VectorXd& v) const;

  // Value of X(i, j) read through the row store; 0 when absent.
  double at_row_major(std::size_t i, std::size_t j) const;
  // Same entry read through the column store.
  double at_col_major(std::size_t i, std::size_t j) const;

  // Copy with every row scaled to unit 2-norm.
  sparse_dataset normalized() const;

  friend bool operator==(const sparse_dataset& a, const sparse_dataset& b);

 private:
  void build_columns();
  void compute_norms();

  std::size_t n_ = 0;
  std::size_t d_ = 0;
  label_mode mode_ = label_mode::classification;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<index_t> row_idx_;
  std::vector<double> row_val_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<index_t> col_idx_;
  std::vector<double> col_val_;
  Eigen::VectorXd labels_;
  Eigen::VectorXd row_norms_;
};

struct load_options {
  bool normalize = false;
  label_mode mode = label_mode::classification;
  // Lower bound on d; larger feature indices in the file extend it.
  std::size_t min_features = 0;
};

// Reads LIBSVM text: `label idx:val idx:val ...`, 1-based strictly increasing
// indices, blank lines and lines starting with '#' skipped.
sparse_dataset parse_libsvm(std::istream& in, const load_options& opts = {});
sparse_dataset load_libsvm(const std::string& path, const load_options& opts = {});
sparse_dataset load_libsvm(const std::string& path, bool normalize);

// Writes with 17 significant digits so that parse_libsvm reproduces the
// dataset exactly.
void write_libsvm(std::ostream& out, const sparse_dataset& ds);
void save_libsvm(const std::string& path, const sparse_dataset& ds);

// max_j |sum_i y_i X_ij| / n
double lambda_max(const sparse_dataset& ds);

// nnz / (n d)
double density(const sparse_dataset& ds);

}  // namespace spdc

#endif  // SPDC_DATAMAT_HPP_
