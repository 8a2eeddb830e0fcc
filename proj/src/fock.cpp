#include "cavsq/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cavsq/errors.hpp"

namespace cavsq {

namespace {

void require_same_layout(const ModeLayout& a, const ModeLayout& b) {
  if (!(a == b)) throw ArgumentError("operands act on different mode layouts");
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka) {
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia) {
      for (int kb = 0; kb < b.outerSize(); ++kb) {
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib) {
          triplets.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                ia.value() * ib.value());
        }
      }
    }
  }
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

ModeLayout::ModeLayout(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ArgumentError("mode layout needs at least one mode");
  for (int d : dims_) {
    if (d < 2) throw ArgumentError("every mode truncation dimension must be >= 2, got " + std::to_string(d));
  }
  strides_.assign(dims_.size(), 1);
  for (std::size_t m = dims_.size(); m-- > 0;) {
    strides_[m] = composite_;
    composite_ *= dims_[m];
  }
}

ModeLayout::ModeLayout(int cavity1, int cavity2, int spin)
    : ModeLayout(std::vector<int>{cavity1, cavity2, spin}) {}

int ModeLayout::dim(std::size_t mode) const {
  if (mode >= dims_.size()) throw ArgumentError("mode index out of range");
  return dims_[mode];
}

Eigen::Index ModeLayout::index(std::span<const int> occupation) const {
  if (occupation.size() != dims_.size()) throw ArgumentError("occupation list has wrong length");
  Eigen::Index idx = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] >= dims_[m]) throw ArgumentError("occupation outside truncation");
    idx += occupation[m] * strides_[m];
  }
  return idx;
}

int ModeLayout::occupation(Eigen::Index index, std::size_t mode) const {
  return static_cast<int>((index / strides_[mode]) % dims_[mode]);
}

std::vector<int> ModeLayout::occupations(Eigen::Index index) const {
  std::vector<int> occ(dims_.size());
  for (std::size_t m = 0; m < dims_.size(); ++m) occ[m] = occupation(index, m);
  return occ;
}

FockOperator::FockOperator(ModeLayout layout, SparseMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != layout_.composite_dim() || matrix_.cols() != layout_.composite_dim()) {
    throw ArgumentError("operator dimension does not match layout");
  }
  matrix_.makeCompressed();
}

FockOperator FockOperator::identity(const ModeLayout& layout) {
  return {layout, sparse_identity(layout.composite_dim())};
}

FockOperator FockOperator::zero(const ModeLayout& layout) {
  return {layout, SparseMatrix(layout.composite_dim(), layout.composite_dim())};
}

FockOperator FockOperator::adjoint() const { return {layout_, SparseMatrix(matrix_.adjoint())}; }

bool FockOperator::is_hermitian(double tol) const {
  SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

FockOperator operator+(const FockOperator& a, const FockOperator& b) {
  require_same_layout(a.layout_, b.layout_);
  return {a.layout_, a.matrix_ + b.matrix_};
}

FockOperator operator-(const FockOperator& a, const FockOperator& b) {
  require_same_layout(a.layout_, b.layout_);
  return {a.layout_, a.matrix_ - b.matrix_};
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  require_same_layout(a.layout_, b.layout_);
  return {a.layout_, SparseMatrix(a.matrix_ * b.matrix_)};
}

FockOperator operator*(cplx s, const FockOperator& a) { return {a.layout_, SparseMatrix(s * a.matrix_)}; }

FockState::FockState(ModeLayout layout, Eigen::VectorXcd amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != layout_.composite_dim()) throw ArgumentError("state dimension does not match layout");
}

FockState FockState::vacuum(const ModeLayout& layout) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(layout.composite_dim());
  v[0] = 1.0;
  return {layout, std::move(v)};
}

FockState FockState::basis(const ModeLayout& layout, std::span<const int> occupation) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(layout.composite_dim());
  v[layout.index(occupation)] = 1.0;
  return {layout, std::move(v)};
}

Eigen::MatrixXcd ladder_factor(int dim) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

FockOperator embed_product(const ModeLayout& layout, std::span<const ModeFactor> factors) {
  std::vector<const Eigen::MatrixXcd*> per_mode(layout.num_modes(), nullptr);
  for (const auto& f : factors) {
    if (f.mode >= layout.num_modes()) throw ArgumentError("mode index out of range");
    if (per_mode[f.mode] != nullptr) throw ArgumentError("duplicate mode in tensor product");
    const int d = layout.dim(f.mode);
    if (f.factor.rows() != d || f.factor.cols() != d) throw ArgumentError("factor dimension does not match mode");
    per_mode[f.mode] = &f.factor;
  }
  SparseMatrix out = sparse_identity(1);
  for (std::size_t m = 0; m < layout.num_modes(); ++m) {
    SparseMatrix factor = per_mode[m] ? SparseMatrix(per_mode[m]->sparseView(0.0, 0.0))
                                      : sparse_identity(layout.dim(m));
    out = kron(out, factor);
  }
  return {layout, std::move(out)};
}

FockOperator mode_annihilator(const ModeLayout& layout, std::size_t mode) {
  if (mode >= layout.num_modes()) throw ArgumentError("mode index out of range");
  const ModeFactor f{mode, ladder_factor(layout.dim(mode))};
  return embed_product(layout, std::span(&f, 1));
}

FockOperator mode_creator(const ModeLayout& layout, std::size_t mode) {
  return mode_annihilator(layout, mode).adjoint();
}

FockOperator mode_number(const ModeLayout& layout, std::size_t mode) {
  if (mode >= layout.num_modes()) throw ArgumentError("mode index out of range");
  const int d = layout.dim(mode);
  Eigen::MatrixXcd n = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  const ModeFactor f{mode, std::move(n)};
  return embed_product(layout, std::span(&f, 1));
}

cplx expectation(const FockState& state, const FockOperator& op) {
  require_same_layout(state.layout(), op.layout());
  return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

double mean_occupation(const FockState& state, std::size_t mode) {
  if (mode >= state.layout().num_modes()) throw ArgumentError("mode index out of range");
  return diagonal_expectation(state, [mode](const ModeLayout& l, Eigen::Index k) {
    return static_cast<double>(l.occupation(k, mode));
  });
}

double top_level_population(const FockState& state) {
  return diagonal_expectation(state, [](const ModeLayout& l, Eigen::Index k) {
    for (std::size_t m = 0; m < l.num_modes(); ++m) {
      if (l.occupation(k, m) == l.dim(m) - 1) return 1.0;
    }
    return 0.0;
  });
}

}  // namespace cavsq
