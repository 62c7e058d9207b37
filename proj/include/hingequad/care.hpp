// Copyright 2026 The hingequad Authors
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

// Dense Lyapunov and Riccati solvers for small state dimensions.

#pragma once

#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "hingequad/types.hpp"

namespace hq {

/// Solves F X + X F^T + C = 0 through the Kronecker form
/// (I (x) F + F (x) I) vec(X) = -vec(C). Cost is O(n^6); meant for n <= ~10.
template <typename Scalar, int N>
Eigen::Matrix<Scalar, N, N> solve_lyapunov(const Eigen::Matrix<Scalar, N, N>& F,
                                           const Eigen::Matrix<Scalar, N, N>& C) {
  using Big = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = F.rows();
  Big L = Big::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    // Column block j of vec(X) is X.col(j).
    L.block(j * n, j * n, n, n) += F;
    for (Eigen::Index k = 0; k < n; ++k) {
      L.block(j * n, k * n, n, n).diagonal().array() += F(j, k);
    }
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(n * n);
  for (Eigen::Index j = 0; j < n; ++j) rhs.segment(j * n, n) = -C.col(j);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = L.fullPivLu().solve(rhs);
  Eigen::Matrix<Scalar, N, N> X(n, n);
  for (Eigen::Index j = 0; j < n; ++j) X.col(j) = x.segment(j * n, n);
  return Scalar(0.5) * (X + X.transpose());
}

template <typename Scalar, int N>
Scalar spectral_abscissa(const Eigen::Matrix<Scalar, N, N>& A) {
  return Eigen::EigenSolver<Eigen::Matrix<Scalar, N, N>>(A, false).eigenvalues().real().maxCoeff();
}

template <typename Scalar, int N, int M>
struct CareSolution {
  Eigen::Matrix<Scalar, N, N> P;
  Eigen::Matrix<Scalar, M, N> K;  // R^-1 B^T P
  Scalar residual = Scalar(0);    // ||A^T P + P A - P B R^-1 B^T P + Q||_inf
  int iterations = 0;
};

template <typename Scalar, int N, int M>
Eigen::Matrix<Scalar, N, N> care_residual(const Eigen::Matrix<Scalar, N, N>& A,
                                          const Eigen::Matrix<Scalar, N, M>& B,
                                          const Eigen::Matrix<Scalar, N, N>& Q,
                                          const Eigen::Matrix<Scalar, M, M>& R,
                                          const Eigen::Matrix<Scalar, N, N>& P) {
  const Eigen::Matrix<Scalar, M, N> RinvBtP = R.ldlt().solve(B.transpose() * P);
  return A.transpose() * P + P * A - P * B * RinvBtP + Q;
}

/// Stabilizing gain by the Bass construction: K = B^T Z^-1 with
/// (A + beta I) Z + Z (A + beta I)^T = 2 B B^T and beta above the spectral radius.
template <typename Scalar, int N, int M>
Eigen::Matrix<Scalar, M, N> bass_gain(const Eigen::Matrix<Scalar, N, N>& A,
                                      const Eigen::Matrix<Scalar, N, M>& B) {
  const Scalar beta = A.template lpNorm<Eigen::Infinity>() + Scalar(1);
  const Eigen::Matrix<Scalar, N, N> shifted =
      A + beta * Eigen::Matrix<Scalar, N, N>::Identity(A.rows(), A.cols());
  const Eigen::Matrix<Scalar, N, N> Z =
      solve_lyapunov<Scalar, N>(-shifted, Scalar(2) * B * B.transpose());
  return B.transpose() * Z.ldlt().solve(Eigen::Matrix<Scalar, N, N>::Identity(A.rows(), A.cols()));
}

/// Continuous-time algebraic Riccati equation A^T P + P A - P B R^-1 B^T P + Q = 0
/// by Newton-Kleinman iteration from a stabilizing gain `k0` (Bass gain if absent).
/// Throws ConvergenceError when the residual bound 1e-9 ||Q||_inf (floored at
/// machine-level noise) is not met within `max_iterations`.
template <typename Scalar, int N, int M>
CareSolution<Scalar, N, M> solve_care(const Eigen::Matrix<Scalar, N, N>& A,
                                      const Eigen::Matrix<Scalar, N, M>& B,
                                      const Eigen::Matrix<Scalar, N, N>& Q,
                                      const Eigen::Matrix<Scalar, M, M>& R,
                                      std::optional<Eigen::Matrix<Scalar, M, N>> k0 = std::nullopt,
                                      int max_iterations = 60) {
  using MatN = Eigen::Matrix<Scalar, N, N>;
  const auto R_ldlt = R.ldlt();
  if (R_ldlt.info() != Eigen::Success || !(R_ldlt.vectorD().array() > Scalar(0)).all()) {
    throw std::invalid_argument("solve_care: R must be symmetric positive definite");
  }
  Eigen::Matrix<Scalar, M, N> K = k0 ? *k0 : bass_gain<Scalar, N, M>(A, B);
  if (!(spectral_abscissa<Scalar, N>(MatN(A - B * K)) < Scalar(0))) {
    throw ConvergenceError("solve_care: initial gain is not stabilizing", Scalar(-1));
  }

  const Scalar q_norm = Q.template lpNorm<Eigen::Infinity>();
  const Scalar tol = Scalar(1e-9) * q_norm;
  CareSolution<Scalar, N, M> out;
  MatN P = MatN::Zero(A.rows(), A.cols());
  for (int it = 1; it <= max_iterations; ++it) {
    const MatN closed = A - B * K;
    const MatN P_next =
        solve_lyapunov<Scalar, N>(MatN(closed.transpose()), MatN(Q + K.transpose() * R * K));
    const Scalar step = (P_next - P).template lpNorm<Eigen::Infinity>();
    P = P_next;
    K = R_ldlt.solve(B.transpose() * P);
    out.iterations = it;
    const Scalar scale = std::max(Scalar(1), P.template lpNorm<Eigen::Infinity>());
    if (step <= Scalar(1e-14) * scale) break;
  }
  out.P = P;
  out.K = K;
  out.residual = care_residual<Scalar, N, M>(A, B, Q, R, P).template lpNorm<Eigen::Infinity>();
  const Scalar floor = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon() *
                       std::max(Scalar(1), P.template lpNorm<Eigen::Infinity>());
  if (!(out.residual <= std::max(tol, floor))) {
    std::ostringstream msg;
    msg << "solve_care did not converge in " << max_iterations << " iterations (residual "
        << out.residual << ")";
    throw ConvergenceError(msg.str(), static_cast<double>(out.residual));
  }
  return out;
}

}  // namespace hq
