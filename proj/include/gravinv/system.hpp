#pragma once

#include "gravinv/randsvd.hpp"
#include "gravinv/types.hpp"

#include <string>

namespace gravinv {

/// Passes over the system matrix, split by kind.
struct VisitCounter {
  Index passes = 0;            // any full traversal of the matrix
  Index forward_products = 0;  // single-vector A x
  Index adjoint_products = 0;  // single-vector A^T y
  Index block_products = 0;    // multi-vector products (sketch / projection)
};

/// The standard-form matrix Wd G W^{-1}, applied implicitly from G and the two
/// diagonals. Every method that reads G counts one pass.
class WeightedSystem {
public:
  WeightedSystem(const Matrix& G, const Vector& data_weight, const Vector& inverse_model_weight)
      : G_(G), wd_(data_weight), winv_(inverse_model_weight) {
    detail::require(wd_.size() == G.rows(),
                    "weighted system: data weight length " + std::to_string(wd_.size()) +
                        " does not match " + std::to_string(G.rows()) + " rows");
    detail::require(winv_.size() == G.cols(),
                    "weighted system: model weight length " + std::to_string(winv_.size()) +
                        " does not match " + std::to_string(G.cols()) + " columns");
  }

  Index rows() const { return G_.rows(); }
  Index cols() const { return G_.cols(); }
  const VisitCounter& visits() const { return visits_; }
  void reset_visits() { visits_ = {}; }

  /// X * A for X of size l x m.
  Matrix sketch(const Matrix& X) {
    count_block();
    Matrix Y = (X * wd_.asDiagonal()) * G_;
    return Y * winv_.asDiagonal();
  }

  /// A * X for X of size n x k.
  Matrix multiply(const Matrix& X) {
    count_block();
    return wd_.asDiagonal() * (G_ * (winv_.asDiagonal() * X));
  }

  /// A * Q with Q kept as Householder reflectors.
  Matrix multiply_basis(const FactoredBasis& Q) {
    count_block();
    return detail::multiply_factored_rows(G_.rows(), Q, [&](Index r, Index b) -> Matrix {
      return winv_.asDiagonal() * G_.middleRows(r, b).transpose() *
             wd_.segment(r, b).asDiagonal();
    });
  }

  Vector apply(const Vector& x) {
    ++visits_.passes;
    ++visits_.forward_products;
    return wd_.cwiseProduct(G_ * winv_.cwiseProduct(x));
  }

  Vector apply_transpose(const Vector& y) {
    ++visits_.passes;
    ++visits_.adjoint_products;
    return winv_.cwiseProduct(G_.transpose() * wd_.cwiseProduct(y));
  }

  /// Explicit Wd G W^{-1}.
  Matrix dense() {
    ++visits_.passes;
    return wd_.asDiagonal() * G_ * winv_.asDiagonal();
  }

private:
  void count_block() {
    ++visits_.passes;
    ++visits_.block_products;
  }

  const Matrix& G_;
  Vector wd_;
  Vector winv_;
  VisitCounter visits_;
};

}  // namespace gravinv
