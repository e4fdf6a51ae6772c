#include "spdc/datamat.hpp"

#include "spdc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

namespace spdc {

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_index(std::string_view tok, long long& out) {
  if (tok.empty()) return false;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

void check_label(double y, label_mode mode, std::size_t line) {
  if (mode == label_mode::classification && y != 1.0 && y != -1.0)
    throw validation_error("line " + std::to_string(line) +
                           ": classification label must be +1 or -1");
}

}  // namespace

sparse_dataset sparse_dataset::from_triplets(std::size_t n, std::size_t d,
                                             std::vector<triplet> entries,
                                             std::vector<double> labels,
                                             label_mode mode) {
  if (labels.size() != n)
    throw validation_error("label count does not match instance count");
  for (std::size_t i = 0; i < n; ++i) check_label(labels[i], mode, i + 1);

  std::erase_if(entries, [](const triplet& t) { return t.value == 0.0; });
  std::sort(entries.begin(), entries.end(), [](const triplet& a, const triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  sparse_dataset ds;
  ds.n_ = n;
  ds.d_ = d;
  ds.mode_ = mode;
  ds.row_ptr_.assign(n + 1, 0);
  ds.row_idx_.reserve(entries.size());
  ds.row_val_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& t = entries[k];
    if (t.row < 0 || static_cast<std::size_t>(t.row) >= n || t.col < 0 ||
        static_cast<std::size_t>(t.col) >= d)
      throw validation_error("entry (" + std::to_string(t.row) + ", " +
                             std::to_string(t.col) + ") out of range");
    if (!std::isfinite(t.value))
      throw validation_error("non-finite matrix entry");
    if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col)
      throw validation_error("duplicate entry (" + std::to_string(t.row) + ", " +
                             std::to_string(t.col) + ")");
    ds.row_idx_.push_back(t.col);
    ds.row_val_.push_back(t.value);
    ++ds.row_ptr_[t.row + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.row_ptr_[i + 1] == 0)
      throw validation_error("instance " + std::to_string(i + 1) +
                             " has an all-zero feature vector");
    ds.row_ptr_[i + 1] += ds.row_ptr_[i];
  }
  ds.labels_ = Eigen::Map<const Eigen::VectorXd>(labels.data(), n);
  ds.build_columns();
  ds.compute_norms();
  return ds;
}

sparse_dataset sparse_dataset::from_dense(const Eigen::MatrixXd& x,
                                          const Eigen::VectorXd& y,
                                          label_mode mode) {
  std::vector<triplet> entries;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (x(i, j) != 0.0)
        entries.push_back({static_cast<index_t>(i), static_cast<index_t>(j), x(i, j)});
  return from_triplets(x.rows(), x.cols(), std::move(entries),
                       std::vector<double>(y.data(), y.data() + y.size()), mode);
}

void sparse_dataset::build_columns() {
  col_ptr_.assign(d_ + 1, 0);
  for (index_t j : row_idx_) ++col_ptr_[j + 1];
  for (std::size_t j = 0; j < d_; ++j) col_ptr_[j + 1] += col_ptr_[j];
  col_idx_.resize(row_idx_.size());
  col_val_.resize(row_val_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto pos = fill[row_idx_[k]]++;
      col_idx_[pos] = static_cast<index_t>(i);
      col_val_[pos] = row_val_[k];
    }
  }
}

void sparse_dataset::compute_norms() {
  row_norms_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) row_norms_[i] = std::sqrt(row(i).squared_norm());
}

double sparse_dataset::max_row_norm() const noexcept {
  return n_ == 0 ? 0.0 : row_norms_.maxCoeff();
}

Eigen::VectorXd sparse_dataset::multiply(const Eigen::VectorXd& w) const {
  Eigen::VectorXd out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = row(i).dot(w);
  return out;
}

Eigen::VectorXd sparse_dataset::multiply_transpose(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(d_);
  for (std::size_t j = 0; j < d_; ++j) out[j] = col(j).dot(v);
  return out;
}

double sparse_dataset::at_row_major(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  auto it = std::lower_bound(r.index.begin(), r.index.end(), static_cast<index_t>(j));
  return (it != r.index.end() && *it == static_cast<index_t>(j))
             ? r.value[it - r.index.begin()]
             : 0.0;
}

double sparse_dataset::at_col_major(std::size_t i, std::size_t j) const {
  const auto c = col(j);
  auto it = std::lower_bound(c.index.begin(), c.index.end(), static_cast<index_t>(i));
  return (it != c.index.end() && *it == static_cast<index_t>(i))
             ? c.value[it - c.index.begin()]
             : 0.0;
}

sparse_dataset sparse_dataset::normalized() const {
  sparse_dataset out = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    const double nrm = row_norms_[i];
    // Rows already at unit norm (to a few ulps) are left untouched so that
    // normalizing twice is a no-op.
    if (std::abs(nrm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) continue;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.row_val_[k] /= nrm;
  }
  out.build_columns();
  out.compute_norms();
  return out;
}

bool operator==(const sparse_dataset& a, const sparse_dataset& b) {
  return a.n_ == b.n_ && a.d_ == b.d_ && a.mode_ == b.mode_ &&
         a.row_ptr_ == b.row_ptr_ && a.row_idx_ == b.row_idx_ &&
         a.row_val_ == b.row_val_ && a.labels_ == b.labels_;
}

sparse_dataset parse_libsvm(std::istream& in, const load_options& opts) {
  std::vector<triplet> entries;
  std::vector<double> labels;
  std::size_t d = opts.min_features;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    auto next_token = [&rest]() {
      while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
      std::size_t len = 0;
      while (len < rest.size() && !is_space(rest[len])) ++len;
      auto tok = rest.substr(0, len);
      rest.remove_prefix(len);
      return tok;
    };

    auto tok = next_token();
    if (tok.empty() || tok.front() == '#') continue;

    double y;
    if (!parse_double(tok, y)) throw parse_error("malformed label '" + std::string(tok) + "'", line_no);
    check_label(y, opts.mode, line_no);
    const auto row = static_cast<index_t>(labels.size());
    labels.push_back(y);

    long long prev = 0;
    bool any = false;
    for (tok = next_token(); !tok.empty(); tok = next_token()) {
      if (tok.front() == '#') break;  // trailing comment
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw parse_error("expected index:value, got '" + std::string(tok) + "'", line_no);
      long long idx;
      double val;
      if (!parse_index(tok.substr(0, colon), idx) || idx < 1)
        throw parse_error("bad feature index in '" + std::string(tok) + "'", line_no);
      if (!parse_double(tok.substr(colon + 1), val))
        throw parse_error("bad feature value in '" + std::string(tok) + "'", line_no);
      if (idx == prev)
        throw parse_error("duplicate feature index " + std::to_string(idx), line_no);
      if (idx < prev)
        throw parse_error("feature indices must be strictly increasing", line_no);
      prev = idx;
      d = std::max<std::size_t>(d, static_cast<std::size_t>(idx));
      if (val != 0.0) {
        entries.push_back({row, static_cast<index_t>(idx - 1), val});
        any = true;
      }
    }
    if (!any)
      throw validation_error("line " + std::to_string(line_no) +
                             ": instance has an all-zero feature vector");
  }

  const std::size_t n = labels.size();
  auto ds = sparse_dataset::from_triplets(n, d, std::move(entries), std::move(labels),
                                          opts.mode);
  return opts.normalize ? ds.normalized() : ds;
}

sparse_dataset load_libsvm(const std::string& path, const load_options& opts) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open dataset file '" + path + "'");
  return parse_libsvm(in, opts);
}

sparse_dataset load_libsvm(const std::string& path, bool normalize) {
  load_options opts;
  opts.normalize = normalize;
  return load_libsvm(path, opts);
}

void write_libsvm(std::ostream& out, const sparse_dataset& ds) {
  char buf[64];
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double y = ds.label(i);
    if (ds.mode() == label_mode::classification) {
      out << (y > 0 ? "+1" : "-1");
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", y);
      out << buf;
    }
    const auto r = ds.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) {
      std::snprintf(buf, sizeof buf, " %d:%.17g", r.index[k] + 1, r.value[k]);
      out << buf;
    }
    out << '\n';
  }
}

void save_libsvm(const std::string& path, const sparse_dataset& ds) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open '" + path + "' for writing");
  write_libsvm(out, ds);
}

double lambda_max(const sparse_dataset& ds) {
  if (ds.n() == 0) throw validation_error("lambda_max of an empty dataset");
  double best = 0.0;
  for (std::size_t j = 0; j < ds.d(); ++j)
    best = std::max(best, std::abs(ds.col(j).dot(ds.labels())));
  return best / static_cast<double>(ds.n());
}

double density(const sparse_dataset& ds) {
  if (ds.n() == 0 || ds.d() == 0) return 0.0;
  return static_cast<double>(ds.nnz()) /
         (static_cast<double>(ds.n()) * static_cast<double>(ds.d()));
}

}  // namespace spdc
