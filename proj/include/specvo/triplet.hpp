#pragma once

#include <array>
#include <cstdint>

#include "specvo/error.hpp"

namespace specvo {

struct Measurement {
  double value = 0.0;
  double sigma = 1.0;
};

// Three frames I0, I1, I2 and their registrations 0->1, 1->2, 0->2. Angles in
// degrees; theta is the rotation of the later frame, phi the translation
// direction in the later frame. The lambda_t factors scale the unit length
// rho01; the lambda_s factors are log-polar bin indices converted through
// epsilon (zoom = s01 / epsilon^lambda_s).
struct TripletState {
  double theta01 = 0.0, phi01 = 0.0;
  double theta12 = 0.0, phi12 = 0.0;
  double theta02 = 0.0, phi02 = 0.0;
  double lambda_t12 = 1.0, lambda_t02 = 2.0;
  double lambda_s12 = 0.0, lambda_s02 = 0.0;
  double rho01 = 1.0;
  double s01 = 1.0;
};

struct TripletMeasurements {
  Measurement theta01, phi01;
  Measurement theta12, phi12;
  Measurement theta02, phi02;
  Measurement lambda_t12, lambda_t02;
  Measurement lambda_s12, lambda_s02;
};

struct TripletProblem {
  TripletMeasurements measured;
  double epsilon = 1.02;
  double rho01 = 1.0;
  double s01 = 1.0;
};

// Signed loop mismatches; the printed error terms are their absolute values.
// theta is the rotation closure theta01 + theta12 - theta02 wrapped to
// (-180, 180] degrees.
struct LoopResiduals {
  double mu = 0.0;
  double nu = 0.0;
  double s = 0.0;
  double theta = 0.0;

  // (|mu|, |nu|, |s|)
  std::array<double, 3> errors() const;
  double norm() const;
};

LoopResiduals loop_residuals(const TripletState& state, double epsilon);

struct OptimizerOptions {
  int max_iter = 50;
  double tol = 1e-10;
  // Weight of the squared loop residuals against the inverse-variance priors:
  // 1 / sigma^2 of the loop mismatch in units of rho01, so the loop acts as a
  // near-hard constraint.
  double loop_weight = 1e4;
};

struct TripletEstimate {
  TripletState state;
  std::array<double, 3> residual_before{};
  std::array<double, 3> residual_after{};
  double rotation_before = 0.0;
  double rotation_after = 0.0;
  bool converged = false;
  int iterations = 0;
};

class OptimizerError : public Error {
 public:
  OptimizerError(const std::string& what, const TripletState& last)
      : Error(ErrorCode::kOptimizerFailure, what), last_state_(last) {}
  const TripletState& last_state() const noexcept { return last_state_; }

 private:
  TripletState last_state_;
};

// Damped Gauss-Newton over theta12, phi12, theta02, phi02 and the four lambda
// factors, starting from the measurements; theta01/phi01, rho01 and s01 stay
// fixed. A step is only accepted when it lowers the total cost and does not
// raise the (mu, nu, s) loop-residual norm above its starting value.
TripletEstimate optimize_triplet(const TripletProblem& problem, const OptimizerOptions& options = {});

// Process-wide counters, for asserting residual monotonicity across runs.
struct OptimizerStats {
  std::uint64_t invocations = 0;
  std::uint64_t monotonicity_violations = 0;
};
OptimizerStats optimizer_stats();

}  // namespace specvo
