#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cavsq/types.hpp"

namespace cavsq {

/// Truncation dimensions of a set of bosonic modes.
///
/// The composite basis is row-major over the mode occupations with mode 0
/// varying slowest, i.e. for three modes index = (n0 * d1 + n1) * d2 + n2.
/// The three-mode layout used throughout is (cavity 1, cavity 2, spin).
class ModeLayout {
 public:
  explicit ModeLayout(std::vector<int> dims);
  ModeLayout(int cavity1, int cavity2, int spin);

  std::size_t num_modes() const noexcept { return dims_.size(); }
  int dim(std::size_t mode) const;
  std::span<const int> dims() const noexcept { return dims_; }
  Eigen::Index composite_dim() const noexcept { return composite_; }

  Eigen::Index index(std::span<const int> occupation) const;
  int occupation(Eigen::Index index, std::size_t mode) const;
  std::vector<int> occupations(Eigen::Index index) const;

  bool operator==(const ModeLayout&) const = default;

 private:
  std::vector<int> dims_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index composite_ = 1;
};

/// Operator on the composite space of a ModeLayout (sparse storage).
class FockOperator {
 public:
  FockOperator(ModeLayout layout, SparseMatrix matrix);

  static FockOperator identity(const ModeLayout& layout);
  static FockOperator zero(const ModeLayout& layout);

  const ModeLayout& layout() const noexcept { return layout_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }

  FockOperator adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;

  friend FockOperator operator+(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator-(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);
  friend FockOperator operator*(cplx s, const FockOperator& a);

 private:
  ModeLayout layout_;
  SparseMatrix matrix_;
};

/// Dense state vector over the composite space of a ModeLayout.
class FockState {
 public:
  FockState(ModeLayout layout, Eigen::VectorXcd amplitudes);

  static FockState vacuum(const ModeLayout& layout);
  static FockState basis(const ModeLayout& layout, std::span<const int> occupation);

  const ModeLayout& layout() const noexcept { return layout_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }
  Eigen::VectorXd populations() const { return amplitudes_.cwiseAbs2(); }

 private:
  ModeLayout layout_;
  Eigen::VectorXcd amplitudes_;
};

/// One single-mode factor of a tensor product.
struct ModeFactor {
  std::size_t mode;
  Eigen::MatrixXcd factor;
};

/// Single-mode ladder matrix of dimension d: sqrt(n) on the first superdiagonal.
Eigen::MatrixXcd ladder_factor(int dim);

FockOperator mode_annihilator(const ModeLayout& layout, std::size_t mode);
FockOperator mode_creator(const ModeLayout& layout, std::size_t mode);
FockOperator mode_number(const ModeLayout& layout, std::size_t mode);

/// Tensor product of the given factors with identity on the remaining modes.
FockOperator embed_product(const ModeLayout& layout, std::span<const ModeFactor> factors);

cplx expectation(const FockState& state, const FockOperator& op);

/// Expectation of a function of the occupation numbers (diagonal in the Fock basis).
template <typename F>
double diagonal_expectation(const FockState& state, F&& f) {
  const auto& amps = state.amplitudes();
  const auto& layout = state.layout();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < amps.size(); ++k) {
    const double p = std::norm(amps[k]);
    if (p != 0.0) acc += p * f(layout, k);
  }
  return acc;
}

double mean_occupation(const FockState& state, std::size_t mode);

/// Probability that at least one mode sits on its top truncation level.
double top_level_population(const FockState& state);

}  // namespace cavsq
