#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "gcid/errors.hpp"

namespace gcid {

// ---------------------------------------------------------------------------
// Decision grid
// ---------------------------------------------------------------------------

// One decision variable discretized uniformly.  Wrapping variables (heading)
// exclude the upper bound; linear variables (speed) include it.
struct DecisionVariable {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  double step = 1.0;
  bool wrap = false;

  int grid_count() const;
  double grid_value(int k) const { return min + k * step; }
};

struct DecisionSpace {
  std::vector<DecisionVariable> variables;

  // heading [0, 360) step 1 deg, speed [0, 2] step 0.1 m/s
  static DecisionSpace heading_speed(double heading_step = 1.0,
                                     double speed_max = 2.0,
                                     double speed_step = 0.1);
  void validate() const;
  long total_points() const;
};

// A behavior's utility over the grid, in [0, 100].  `utility` is the
// defining evaluation; `fill` optionally tabulates the whole grid in one
// call (row-major, last variable fastest) and must produce bit-identical
// values.  Solvers fall back to pointwise evaluation when fill is absent.
struct PiecewiseObjective {
  std::string behavior_id;
  std::function<double(const Eigen::VectorXd&)> utility;
  std::function<void(const DecisionSpace&, std::vector<double>&)> fill;
};

// Behaviors with their weights and the option-to-behavior activation matrix
// A_c (one row per option, one column per behavior, entries in {0, 1}).
struct BehaviorSet {
  std::vector<PiecewiseObjective> behaviors;
  Eigen::VectorXd weights;
  Eigen::MatrixXi activation;

  void validate() const;
};

struct Decision {
  Eigen::VectorXd values;  // one grid value per decision variable
  double utility = 0.0;    // achieved weighted sum
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Per-behavior weight vector for the dominant option: entry q is weights[q]
// when activation(dominant, q) == 1, else 0.
Eigen::VectorXd active_weights(Eigen::Index dominant, const BehaviorSet& set);

// Exhaustive weighted-sum argmax over the grid.  Ties resolve to the
// lexicographically smallest grid coordinates in variable order.
// Throws NoActiveBehaviorError when no weight is positive.
Decision solve(const DecisionSpace& space, const BehaviorSet& set,
               const Eigen::VectorXd& weights);

// Waypoint-transit objective: utility 100 at (bearing to waypoint, cruise
// speed), falling linearly with period-aware angular error (0 at 180 deg)
// and with speed error.  Positions are meters, compass headings in degrees
// (0 = +y north, 90 = +x east).
PiecewiseObjective make_transit_objective(const Eigen::Vector2d& own,
                                          const Eigen::Vector2d& waypoint,
                                          double cruise_speed,
                                          const DecisionSpace& space);

// Station-keep objective: maximal at speed 0, decreasing linearly in speed,
// flat in heading.
PiecewiseObjective make_station_keep_objective(const DecisionSpace& space);

// Compass bearing from `from` to `to`, degrees in [0, 360).
double bearing_deg(const Eigen::Vector2d& from, const Eigen::Vector2d& to);

// Absolute angular distance between two headings, in [0, 180].
double angle_dist_deg(double a, double b);

}  // namespace gcid
