#ifndef SEQPRIOR_PARAM_POINT_HPP_
#define SEQPRIOR_PARAM_POINT_HPP_

#include <string>

#include "seqprior/errors.hpp"

namespace seqprior {

// A parameter point: (theta1, theta2) for the two-parameter exponential
// family, or a single scalar (success probability p, Brownian drift theta)
// for the one-parameter models.
class ParamPoint {
 public:
  static ParamPoint one(double value) { return ParamPoint(1, value, 0.0); }
  static ParamPoint two(double theta1, double theta2) { return ParamPoint(2, theta1, theta2); }

  int dim() const { return dim_; }

  double scalar() const {
    require_dim(1);
    return x1_;
  }
  double theta1() const {
    require_dim(2);
    return x1_;
  }
  double theta2() const {
    require_dim(2);
    return x2_;
  }

  double coord(int i) const { return i == 0 ? x1_ : x2_; }

  bool operator==(const ParamPoint& other) const = default;

 private:
  ParamPoint(int dim, double x1, double x2) : dim_(dim), x1_(x1), x2_(x2) {}

  void require_dim(int d) const {
    if (dim_ != d) {
      throw UnsupportedError("ParamPoint: expected dimension " + std::to_string(d) + ", have " +
                             std::to_string(dim_));
    }
  }

  int dim_;
  double x1_;
  double x2_;
};

}  // namespace seqprior

#endif  // SEQPRIOR_PARAM_POINT_HPP_
