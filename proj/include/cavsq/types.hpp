#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace cavsq {

using cplx = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Matrix6 = Eigen::Matrix<cplx, 6, 6>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

}  // namespace cavsq
