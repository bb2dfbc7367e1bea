#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "volterra/grid.hpp"
#include "volterra/simulation.hpp"

namespace volterra {

/// Regulation of a p-channel quadratic model through channel 0. The control
/// acts with a delay of one grid step: x_0(t) = u(t - h), u = 0 on [-h, 0].
struct RegulationProblem {
  VectorQuadraticModel model;
  double setpoint = 0.0;
  /// Known disturbances for channels 1..p-1, midpoint-placed on `grid`.
  std::vector<SampledSignal> disturbances;
  TimeGrid grid{1.0, 1};
  /// Steps ahead at which the predicted output is set to the setpoint, with
  /// the new control value held over those steps (clipped at the horizon).
  std::size_t lookahead = 1;

  void validate() const;
};

struct RegulationResult {
  /// u((c - 1/2) h), c = 1..n. The last value only acts beyond T and is
  /// held from the one before.
  SampledSignal control;
  /// Applied channel-0 input x_0 = u(t - h) on the cells.
  SampledSignal applied;
  /// Closed-loop output at the nodes.
  SampledSignal output;
  /// epsilon = setpoint - output at the nodes.
  SampledSignal error;
  /// f(ih) = epsilon(ih) - epsilon((i-1)h).
  SampledSignal increments;
};

/// Marches i = 1..n: measures y(ih) from the model, then picks u_{i-1/2} as
/// the root of the quadratic "predicted y((i + d)h) = setpoint", i.e. the
/// increment of the output over the next d steps equals epsilon(ih). The first
/// root is the one continuing the linear solution, later roots the one
/// nearest the previous control. Throws ExistenceError with t = ih at the
/// first negative discriminant (loss of controllability).
RegulationResult regulate(const RegulationProblem& problem);

/// Same loop on precomputed weights.
RegulationResult regulate(const RegulationProblem& problem, const VectorWeights& weights);

/// Input x_0 on the cells such that the model output equals `desired` at
/// every node (no delay, no feedback): node i fixes cell i. Same root rules
/// and errors as regulate.
SampledSignal open_loop_solve(const VectorQuadraticModel& model, const std::vector<SampledSignal>& disturbances,
                              const SampledSignal& desired);

struct ThresholdResult {
  bool found = false;
  double amplitude = 0.0;  ///< smallest failing scale (within tolerance) when found
  double failure_time = 0.0;
};

/// Bisection over the disturbance scale in [lo, hi]: `make(a)` builds the
/// problem at scale a. Found when regulation fails at hi; the result brackets
/// the threshold to rel_tol.
ThresholdResult controllability_threshold(const std::function<RegulationProblem(double)>& make, double lo,
                                          double hi, double rel_tol = 1e-3);

}  // namespace volterra
