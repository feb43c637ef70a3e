#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "regionedit/types.hpp"

namespace regionedit {

/// Below this norm a vector has no usable direction and the degenerate
/// rules apply: similarity 0, distance 1.
inline constexpr double kDegenerateNormEps = 1e-8;

template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                         const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_similarity: dimension mismatch");
    const double na = a.template cast<double>().norm();
    const double nb = b.template cast<double>().norm();
    if (na < kDegenerateNormEps || nb < kDegenerateNormEps) return 0.0;
    return a.template cast<double>().dot(b.template cast<double>()) / (na * nb);
}

template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("cosine_distance: dimension mismatch");
    const double na = a.template cast<double>().norm();
    const double nb = b.template cast<double>().norm();
    if (na < kDegenerateNormEps || nb < kDegenerateNormEps) return 1.0;
    return 1.0 - a.template cast<double>().dot(b.template cast<double>()) / (na * nb);
}

template <typename S>
double cosine_similarity(const EmbeddingVectorT<S>& a, const EmbeddingVectorT<S>& b) {
    return cosine_similarity(a.data, b.data);
}

template <typename S>
double cosine_distance(const EmbeddingVectorT<S>& a, const EmbeddingVectorT<S>& b) {
    return cosine_distance(a.data, b.data);
}

/// Numerically shifted softmax, temperature 1.
template <typename Derived>
VecX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    using S = typename Derived::Scalar;
    if (logits.size() == 0)
        throw std::invalid_argument("softmax: empty input");
    VecX<S> shifted = logits - VecX<S>::Constant(logits.size(), logits.maxCoeff());
    VecX<S> e = shifted.array().exp();
    return e / e.sum();
}

/// argmax with lowest-index tie-break.
template <typename Derived>
Index argmax_lowest(const Eigen::MatrixBase<Derived>& v) {
    if (v.size() == 0)
        throw std::invalid_argument("argmax_lowest: empty input");
    Index best = 0;
    for (Index i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

}  // namespace regionedit
