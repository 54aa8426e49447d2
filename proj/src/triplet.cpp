#include "specvo/triplet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

namespace specvo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMaxWeight = 1e12;
constexpr double kJacobianStep = 1e-6;
constexpr int kNumVars = 8;
constexpr int kNumResiduals = 4 + kNumVars;

std::atomic<std::uint64_t> g_invocations{0};
std::atomic<std::uint64_t> g_violations{0};

using Vec = Eigen::Matrix<double, kNumVars, 1>;
using ResVec = Eigen::Matrix<double, kNumResiduals, 1>;

// Wrap to (-180, 180].
double wrap180(double a) {
  a = std::remainder(a, 360.0);
  return a <= -180.0 ? a + 360.0 : a;
}

double prior_weight(double sigma) {
  if (!(sigma > 0.0)) return kMaxWeight;
  return std::min(1.0 / (sigma * sigma), kMaxWeight);
}

struct Problem {
  const TripletProblem& p;
  double loop_weight;
  Vec weight;

  Problem(const TripletProblem& problem, double lw) : p(problem), loop_weight(lw) {
    const auto& m = problem.measured;
    weight << prior_weight(m.theta12.sigma), prior_weight(m.phi12.sigma),
        prior_weight(m.theta02.sigma), prior_weight(m.phi02.sigma),
        prior_weight(m.lambda_t12.sigma), prior_weight(m.lambda_t02.sigma),
        prior_weight(m.lambda_s12.sigma), prior_weight(m.lambda_s02.sigma);
  }

  // x holds offsets from the measurements, so a zero
  // step reproduces the measured values exactly.
  TripletState state(const Vec& x) const {
    const auto& m = p.measured;
    TripletState s;
    s.theta01 = m.theta01.value;
    s.phi01 = m.phi01.value;
    s.theta12 = m.theta12.value + x[0];
    s.phi12 = m.phi12.value + x[1];
    s.theta02 = m.theta02.value + x[2];
    s.phi02 = m.phi02.value + x[3];
    s.lambda_t12 = m.lambda_t12.value + x[4];
    s.lambda_t02 = m.lambda_t02.value + x[5];
    s.lambda_s12 = m.lambda_s12.value + x[6];
    s.lambda_s02 = m.lambda_s02.value + x[7];
    s.rho01 = p.rho01;
    s.s01 = p.s01;
    return s;
  }

  ResVec residuals(const Vec& x) const {
    const LoopResiduals loop = loop_residuals(state(x), p.epsilon);
    const double lw = std::sqrt(loop_weight);
    // Loop mismatches are measured in units of rho01 so the factors stay
    // gauge invariant.
    ResVec r;
    r[0] = lw * loop.mu / p.rho01;
    r[1] = lw * loop.nu / p.rho01;
    r[2] = lw * loop.s;
    r[3] = lw * loop.theta;
    for (int i = 0; i < kNumVars; ++i) {
      r[4 + i] = std::sqrt(weight[i]) * (i < 4 ? wrap180(x[i]) : x[i]);
    }
    return r;
  }

  double loop_norm(const Vec& x) const { return loop_residuals(state(x), p.epsilon).norm(); }
};

bool all_finite(const ResVec& r) { return r.allFinite(); }

}  // namespace

std::array<double, 3> LoopResiduals::errors() const {
  return {std::abs(mu), std::abs(nu), std::abs(s)};
}

double LoopResiduals::norm() const { return std::sqrt(mu * mu + nu * nu + s * s); }

LoopResiduals loop_residuals(const TripletState& st, double epsilon) {
  const double t01 = st.theta01 * kDegToRad;
  const double t12 = st.theta12 * kDegToRad;
  const double t02 = st.theta02 * kDegToRad;
  const double a01 = t01 + st.phi01 * kDegToRad;
  const double a12 = t01 + t12 + st.phi12 * kDegToRad;
  const double a02 = t02 + st.phi02 * kDegToRad;
  LoopResiduals r;
  r.mu = st.rho01 * std::cos(a01) + st.lambda_t12 * st.rho01 * std::cos(a12) -
         st.lambda_t02 * st.rho01 * std::cos(a02);
  r.nu = st.rho01 * std::sin(a01) + st.lambda_t12 * st.rho01 * std::sin(a12) -
         st.lambda_t02 * st.rho01 * std::sin(a02);
  const double s12 = st.s01 / std::pow(epsilon, st.lambda_s12);
  const double s02 = st.s01 / std::pow(epsilon, st.lambda_s02);
  r.s = st.s01 * s12 / s02 - 1.0;
  r.theta = wrap180(st.theta01 + st.theta12 - st.theta02);
  return r;
}

TripletEstimate optimize_triplet(const TripletProblem& problem, const OptimizerOptions& options) {
  g_invocations.fetch_add(1, std::memory_order_relaxed);
  const Problem prob(problem, options.loop_weight);

  Vec x = Vec::Zero();
  ResVec r = prob.residuals(x);
  if (!all_finite(r)) throw OptimizerError("non-finite residual at the measured state", prob.state(x));

  TripletEstimate est;
  const LoopResiduals start = loop_residuals(prob.state(x), problem.epsilon);
  est.residual_before = start.errors();
  est.rotation_before = std::abs(start.theta);
  const double loop_before = start.norm();

  double cost = r.squaredNorm();
  double damping = 1e-4;
  for (int it = 1; it <= options.max_iter; ++it) {
    est.iterations = it;
    Eigen::Matrix<double, kNumResiduals, kNumVars> jac;
    for (int j = 0; j < kNumVars; ++j) {
      Vec xp = x, xm = x;
      xp[j] += kJacobianStep;
      xm[j] -= kJacobianStep;
      const ResVec rp = prob.residuals(xp);
      const ResVec rm = prob.residuals(xm);
      if (!all_finite(rp) || !all_finite(rm)) {
        throw OptimizerError("non-finite residual while differentiating", prob.state(x));
      }
      jac.col(j) = (rp - rm) / (2.0 * kJacobianStep);
    }
    const Eigen::Matrix<double, kNumVars, kNumVars> normal = jac.transpose() * jac;
    const Vec grad = jac.transpose() * r;
    const Vec diag = normal.diagonal().array() + 1e-12;

    bool accepted = false;
    bool stalled = false;
    while (!accepted) {
      Eigen::Matrix<double, kNumVars, kNumVars> lhs = normal;
      lhs.diagonal() += damping * diag;
      const Vec step = lhs.ldlt().solve(-grad);
      if (!step.allFinite()) throw OptimizerError("singular normal equations", prob.state(x));
      if (step.norm() < options.tol) {
        est.converged = true;
        break;
      }
      const Vec trial = x + step;
      const ResVec rt = prob.residuals(trial);
      if (!all_finite(rt)) throw OptimizerError("non-finite residual during iteration", prob.state(x));
      const double trial_cost = rt.squaredNorm();
      if (trial_cost < cost && prob.loop_norm(trial) <= loop_before) {
        x = trial;
        r = rt;
        cost = trial_cost;
        damping = std::max(damping * 0.5, 1e-12);
        accepted = true;
        if (step.norm() < options.tol) est.converged = true;
      } else {
        damping *= 2.0;
        if (damping > 1e16) {
          stalled = true;
          break;
        }
      }
    }
    if (est.converged || stalled) {
      est.converged = true;
      break;
    }
  }

  est.state = prob.state(x);
  const LoopResiduals end = loop_residuals(est.state, problem.epsilon);
  est.residual_after = end.errors();
  est.rotation_after = std::abs(end.theta);
  if (end.norm() > loop_before + 1e-12) g_violations.fetch_add(1, std::memory_order_relaxed);
  return est;
}

OptimizerStats optimizer_stats() {
  return {g_invocations.load(std::memory_order_relaxed), g_violations.load(std::memory_order_relaxed)};
}

}  // namespace specvo
