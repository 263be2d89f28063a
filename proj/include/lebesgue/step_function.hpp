#ifndef LEBESGUE_STEP_FUNCTION_HPP
#define LEBESGUE_STEP_FUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lebesgue/errors.hpp"

namespace lebesgue {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Finite partition of [0, 1] stored by its cell masses. Cell k is
/// [m_0 + ... + m_{k-1}, m_0 + ... + m_k); the point 1 belongs to the last cell.
template <typename Scalar>
class MeshPartition {
 public:
  explicit MeshPartition(Vector<Scalar> masses) : masses_(std::move(masses)) {
    if (masses_.size() == 0) throw ParameterError("MeshPartition: no cells");
    if ((masses_.array() <= Scalar(0)).any()) throw ParameterError("MeshPartition: masses must be positive");
    using std::abs;
    if (abs(masses_.sum() - Scalar(1)) > Scalar(1e-12)) {
      throw ParameterError("MeshPartition: masses must sum to 1");
    }
    boundaries_.resize(masses_.size());
    Scalar running(0);
    for (Eigen::Index k = 0; k < masses_.size(); ++k) {
      running += masses_[k];
      boundaries_[k] = running;
    }
    boundaries_[masses_.size() - 1] = Scalar(1);
  }

  static MeshPartition uniform(Eigen::Index cells) {
    return MeshPartition(Vector<Scalar>::Constant(cells, Scalar(1) / Scalar(cells)));
  }

  Eigen::Index size() const { return masses_.size(); }
  const Vector<Scalar>& masses() const { return masses_; }
  Scalar mass(Eigen::Index k) const { return masses_[k]; }

  /// Index of the cell containing x in [0, 1].
  Eigen::Index cell_of(Scalar x) const {
    const auto begin = boundaries_.data();
    const auto end = begin + boundaries_.size();
    const auto it = std::upper_bound(begin, end, x);
    return std::min<Eigen::Index>(it - begin, size() - 1);
  }

  bool operator==(const MeshPartition& other) const { return masses_ == other.masses_; }

 private:
  Vector<Scalar> masses_;
  Vector<Scalar> boundaries_;
};

template <typename Scalar>
class StepFunction {
 public:
  StepFunction(MeshPartition<Scalar> partition, Vector<Scalar> values)
      : partition_(std::move(partition)), values_(std::move(values)) {
    if (values_.size() != partition_.size()) throw ParameterError("StepFunction: one value per cell required");
  }

  static StepFunction constant(Scalar c) {
    return StepFunction(MeshPartition<Scalar>::uniform(1), Vector<Scalar>::Constant(1, c));
  }

  const MeshPartition<Scalar>& partition() const { return partition_; }
  const Vector<Scalar>& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

  Scalar operator()(Scalar x) const { return values_[partition_.cell_of(x)]; }

  bool positive() const { return (values_.array() > Scalar(0)).all(); }
  bool nonvanishing() const { return (values_.array() != Scalar(0)).all(); }

  /// sum_k m_k ln|f_k|
  Scalar mean_log_abs() const { return partition_.masses().dot(values_.array().abs().log().matrix()); }
  /// sum_k m_k f_k
  Scalar mean() const { return partition_.masses().dot(values_); }

  StepFunction abs() const { return StepFunction(partition_, values_.array().abs().matrix()); }

  StepFunction operator*(const StepFunction& other) const {
    require_same_partition(other);
    return StepFunction(partition_, values_.cwiseProduct(other.values_));
  }
  StepFunction operator*(Scalar c) const { return StepFunction(partition_, values_ * c); }
  StepFunction operator-() const { return StepFunction(partition_, -values_); }

  /// Pointwise map of the cell values.
  template <typename F>
  StepFunction map(F&& f) const {
    Vector<Scalar> out(values_.size());
    for (Eigen::Index k = 0; k < values_.size(); ++k) out[k] = f(values_[k]);
    return StepFunction(partition_, std::move(out));
  }

 private:
  void require_same_partition(const StepFunction& other) const {
    if (!(partition_ == other.partition_)) throw ParameterError("StepFunction: partitions differ");
  }

  MeshPartition<Scalar> partition_;
  Vector<Scalar> values_;
};

using MeshPartitiond = MeshPartition<double>;
using StepFunctiond = StepFunction<double>;

}  // namespace lebesgue

#endif  // LEBESGUE_STEP_FUNCTION_HPP
