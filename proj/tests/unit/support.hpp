#pragma once

#include "../oracles/oracles.hpp"
#include "eurlab/operators.hpp"

namespace testing {

inline oracle::CMat to_oracle(const eurlab::Matrix& m) {
  oracle::CMat out(static_cast<int>(m.rows()));
  for (int i = 0; i < out.n; ++i)
    for (int j = 0; j < out.n; ++j) out(i, j) = m(i, j);
  return out;
}

inline eurlab::Matrix projector(const Eigen::VectorXcd& v) { return v * v.adjoint() / v.squaredNorm(); }

inline eurlab::MatrixPovm computational(int d) {
  eurlab::MatrixPovm p;
  for (int i = 0; i < d; ++i) {
    eurlab::Matrix e = eurlab::Matrix::Zero(d, d);
    e(i, i) = 1.0;
    p.elements.push_back(e);
  }
  return p;
}

inline eurlab::MatrixPovm hadamard_basis() {
  Eigen::VectorXcd plus(2), minus(2);
  plus << 1.0, 1.0;
  minus << 1.0, -1.0;
  return {{projector(plus), projector(minus)}, std::nullopt};
}

}  // namespace testing
