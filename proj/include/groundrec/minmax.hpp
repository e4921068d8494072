#pragma once

#include <Eigen/Core>

namespace groundrec {

/// (x - min) / (max - min). When max == min (including a single element) the
/// result is all zeros, so downstream reweighting degrades to a no-op.
template <typename Derived>
Eigen::VectorXd min_max_normalize(const Eigen::MatrixBase<Derived>& values) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(values.size());
    if (values.size() == 0) return out;
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    if (!(hi > lo)) return out;
    out = (values.template cast<double>().array() - lo) / (hi - lo);
    return out;
}

}  // namespace groundrec
