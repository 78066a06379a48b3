#ifndef CONLEYBIF_TYPES_HPP
#define CONLEYBIF_TYPES_HPP

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace conleybif {

using Point = Eigen::VectorXd;

/// Closed axis-aligned box [lo, hi] in R^d.
template <typename Scalar>
struct BoxT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector lo;
  Vector hi;

  BoxT() = default;
  BoxT(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {}

  static BoxT point(const Vector &x) { return BoxT(x, x); }

  Eigen::Index dim() const { return lo.size(); }
  Vector center() const { return (lo + hi) / Scalar(2); }
  Vector widths() const { return hi - lo; }

  bool contains(const Vector &x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  bool contains(const BoxT &b) const {
    return (b.lo.array() >= lo.array()).all() &&
           (b.hi.array() <= hi.array()).all();
  }
  bool intersects(const BoxT &b) const {
    return (b.lo.array() <= hi.array()).all() &&
           (b.hi.array() >= lo.array()).all();
  }
  bool is_finite() const { return lo.allFinite() && hi.allFinite(); }
};

using Box = BoxT<double>;

template <typename Scalar>
BoxT<Scalar> hull(const BoxT<Scalar> &a, const BoxT<Scalar> &b) {
  return BoxT<Scalar>(a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi));
}

template <typename Scalar>
BoxT<Scalar> hull(const BoxT<Scalar> &a,
                  const typename BoxT<Scalar>::Vector &x) {
  return BoxT<Scalar>(a.lo.cwiseMin(x), a.hi.cwiseMax(x));
}

/// Widen by a relative plus absolute slack; absorbs round-off in endpoint
/// evaluations.
template <typename Scalar>
BoxT<Scalar> inflate(const BoxT<Scalar> &b, Scalar abs_slack,
                     Scalar rel_slack = Scalar(4) *
                                        std::numeric_limits<Scalar>::epsilon()) {
  typename BoxT<Scalar>::Vector pad =
      (b.lo.cwiseAbs().cwiseMax(b.hi.cwiseAbs()) * rel_slack).array() +
      abs_slack;
  return BoxT<Scalar>(b.lo - pad, b.hi + pad);
}

inline Point point1(double x) { return Point::Constant(1, x); }
inline Box box1(double lo, double hi) { return Box(point1(lo), point1(hi)); }

}  // namespace conleybif

#endif  // CONLEYBIF_TYPES_HPP
