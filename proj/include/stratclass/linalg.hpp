// Copyright 2026 The stratclass Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace stratclass {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VectorX<double>;
using Mat = MatrixX<double>;

/// Singular values below this fraction of the largest one are treated as zero
/// when deciding the rank of a least-squares design.
inline constexpr double kRankCutoff = 1e-10;

/// Symmetry tolerance, relative to the largest entry magnitude.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Gram-matrix eigenvalues below this fraction of the largest are treated as
/// zero. Forming X^T X rounds at about eps * top, so the squared design cutoff
/// (1e-20) would sit under the noise.
inline constexpr double kGramRankCutoff = 1e-12;

/// One regression sample: a context and the reward observed for it.
template <typename Scalar>
struct BasicSample {
  VectorX<Scalar> x;
  Scalar reward;
};
using Sample = BasicSample<double>;

/// Minimum-norm least-squares solution of `design * theta = targets`, one
/// sample per row of `design`.
template <typename DerivedA, typename DerivedB>
VectorX<typename DerivedA::Scalar> least_squares(
    const Eigen::MatrixBase<DerivedA>& design,
    const Eigen::MatrixBase<DerivedB>& targets) {
  using Scalar = typename DerivedA::Scalar;
  if (design.rows() == 0) throw std::invalid_argument("least_squares: empty design");
  if (design.rows() != targets.rows())
    throw std::invalid_argument("least_squares: row count mismatch");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(Scalar(kRankCutoff));
  return svd.solve(targets);
}

/// Ordinary least squares over (x, r) pairs. Rank-deficient designs yield the
/// minimum-norm solution.
template <typename Scalar>
VectorX<Scalar> ols_fit(const std::vector<BasicSample<Scalar>>& data) {
  if (data.empty()) throw std::invalid_argument("ols_fit: empty data");
  const auto d = data.front().x.size();
  MatrixX<Scalar> design(static_cast<Eigen::Index>(data.size()), d);
  VectorX<Scalar> targets(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].x.size() != d) throw std::invalid_argument("ols_fit: dimension mismatch");
    design.row(static_cast<Eigen::Index>(i)) = data[i].x.transpose();
    targets(static_cast<Eigen::Index>(i)) = data[i].reward;
  }
  return least_squares(design, targets);
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m,
                  typename Derived::Scalar rel_tol = kSymmetryTolerance) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  using Scalar = typename Derived::Scalar;
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Smallest eigenvalue of a symmetric matrix.
template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() == 0) throw std::invalid_argument("min_eigenvalue: empty matrix");
  if (!is_symmetric(m)) throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");
  const MatrixX<Scalar> sym = (m + m.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Running sufficient statistics (sum of x x^T and x r) for an OLS estimate
/// that is refreshed after every insertion.
template <typename Scalar>
class OlsAccumulator {
 public:
  explicit OlsAccumulator(Eigen::Index d)
      : gram_(MatrixX<Scalar>::Zero(d, d)), moment_(VectorX<Scalar>::Zero(d)) {}

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& x, Scalar reward) {
    gram_.noalias() += x * x.transpose();
    moment_.noalias() += reward * x;
    ++count_;
  }

  /// Minimum-norm solution of the normal equations.
  VectorX<Scalar> solve() const {
    const auto d = moment_.size();
    if (count_ == 0) return VectorX<Scalar>::Zero(d);
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(gram_);
    const auto& evals = es.eigenvalues();
    const Scalar top = evals.cwiseAbs().maxCoeff();
    const Scalar cutoff = top * Scalar(kGramRankCutoff);
    VectorX<Scalar> proj = es.eigenvectors().transpose() * moment_;
    for (Eigen::Index i = 0; i < d; ++i)
      proj(i) = (evals(i) > cutoff && top > Scalar(0)) ? proj(i) / evals(i) : Scalar(0);
    return es.eigenvectors() * proj;
  }

  const MatrixX<Scalar>& gram() const { return gram_; }
  const VectorX<Scalar>& moment() const { return moment_; }
  long count() const { return count_; }

 private:
  MatrixX<Scalar> gram_;
  VectorX<Scalar> moment_;
  long count_ = 0;
};

}  // namespace stratclass
