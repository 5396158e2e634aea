#include "gcid/ivp.hpp"

#include <algorithm>
#include <cmath>

namespace gcid {

namespace {

// Shared scalar kernel for the linear-falloff objectives.  Both the
// pointwise and the tabulated paths go through this so they agree bit for
// bit.
inline double clamped_peak(double heading_term, double speed_term) {
  const double v = 100.0 - heading_term - speed_term;
  return v < 0.0 ? 0.0 : (v > 100.0 ? 100.0 : v);
}

int find_variable(const DecisionSpace& space, const std::string& name) {
  for (std::size_t i = 0; i < space.variables.size(); ++i) {
    if (space.variables[i].name == name) return static_cast<int>(i);
  }
  throw InvalidInputError("decision space is missing variable '" + name + "'");
}

}  // namespace

int DecisionVariable::grid_count() const {
  if (!(step > 0.0) || !(min < max)) {
    throw InvalidInputError("decision variable '" + name + "' has bad grid");
  }
  if (wrap) return static_cast<int>(std::llround((max - min) / step));
  return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
}

DecisionSpace DecisionSpace::heading_speed(double heading_step,
                                           double speed_max,
                                           double speed_step) {
  DecisionSpace s;
  s.variables.push_back({"heading", 0.0, 360.0, heading_step, true});
  s.variables.push_back({"speed", 0.0, speed_max, speed_step, false});
  s.validate();
  return s;
}

void DecisionSpace::validate() const {
  if (variables.empty()) throw InvalidInputError("empty decision space");
  for (const auto& v : variables) {
    if (v.grid_count() < 2) {
      throw InvalidInputError("decision variable '" + v.name +
                              "' needs at least 2 grid points");
    }
  }
  if (total_points() > 100'000'000L) {
    throw InvalidInputError("decision grid too large");
  }
}

long DecisionSpace::total_points() const {
  long total = 1;
  for (const auto& v : variables) total *= v.grid_count();
  return total;
}

void BehaviorSet::validate() const {
  const auto q = static_cast<Eigen::Index>(behaviors.size());
  if (weights.size() != q) {
    throw InvalidInputError("behavior weights length mismatch");
  }
  if ((weights.array() <= 0.0).any()) {
    throw InvalidInputError("behavior weights must be positive");
  }
  if (activation.cols() != q || activation.rows() < 1) {
    throw InvalidInputError("activation matrix shape mismatch");
  }
  for (Eigen::Index r = 0; r < activation.rows(); ++r) {
    int row_sum = 0;
    for (Eigen::Index c = 0; c < q; ++c) {
      const int a = activation(r, c);
      if (a != 0 && a != 1) {
        throw InvalidInputError("activation entries must be 0 or 1");
      }
      row_sum += a;
    }
    if (row_sum == 0) {
      throw InvalidInputError("option row " + std::to_string(r) +
                              " activates no behavior");
    }
  }
  for (Eigen::Index c = 0; c < q; ++c) {
    if (activation.col(c).sum() == 0) {
      throw InvalidInputError("behavior '" + behaviors[c].behavior_id +
                              "' is activated by no option");
    }
  }
}

Eigen::VectorXd active_weights(Eigen::Index dominant, const BehaviorSet& set) {
  if (dominant < 0 || dominant >= set.activation.rows()) {
    throw InvalidInputError("dominant option out of range");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(set.weights.size());
  for (Eigen::Index q = 0; q < w.size(); ++q) {
    if (set.activation(dominant, q) == 1) w(q) = set.weights(q);
  }
  return w;
}

Decision solve(const DecisionSpace& space, const BehaviorSet& set,
               const Eigen::VectorXd& weights) {
  const auto q = static_cast<Eigen::Index>(set.behaviors.size());
  if (weights.size() != q) {
    throw InvalidInputError("solve: weights length mismatch");
  }
  if ((weights.array() < 0.0).any()) {
    throw InvalidInputError("solve: negative behavior weight");
  }
  if (!(weights.array() > 0.0).any()) {
    throw NoActiveBehaviorError("no active behavior");
  }

  const long total = space.total_points();
  const auto n_vars = static_cast<int>(space.variables.size());

  // Weighted accumulation over the grid, behavior by behavior in declared
  // order (row-major, last variable fastest).
  std::vector<double> acc(static_cast<std::size_t>(total), 0.0);
  std::vector<double> table;
  Eigen::VectorXd point(n_vars);
  std::vector<int> idx(n_vars, 0);
  for (Eigen::Index b = 0; b < q; ++b) {
    const double w = weights(b);
    if (w == 0.0) continue;
    const auto& obj = set.behaviors[b];
    table.assign(static_cast<std::size_t>(total), 0.0);
    if (obj.fill) {
      obj.fill(space, table);
    } else {
      std::fill(idx.begin(), idx.end(), 0);
      for (long p = 0; p < total; ++p) {
        for (int v = 0; v < n_vars; ++v) {
          point(v) = space.variables[v].grid_value(idx[v]);
        }
        table[static_cast<std::size_t>(p)] = obj.utility(point);
        for (int v = n_vars - 1; v >= 0; --v) {
          if (++idx[v] < space.variables[v].grid_count()) break;
          idx[v] = 0;
        }
      }
    }
    for (long p = 0; p < total; ++p) {
      acc[static_cast<std::size_t>(p)] += w * table[static_cast<std::size_t>(p)];
    }
  }

  // First strict maximum in lexicographic grid order.
  long best = 0;
  for (long p = 1; p < total; ++p) {
    if (acc[static_cast<std::size_t>(p)] > acc[static_cast<std::size_t>(best)]) {
      best = p;
    }
  }

  Decision d;
  d.values.resize(n_vars);
  long rem = best;
  for (int v = n_vars - 1; v >= 0; --v) {
    const int count = space.variables[v].grid_count();
    d.values(v) = space.variables[v].grid_value(static_cast<int>(rem % count));
    rem /= count;
  }
  d.utility = acc[static_cast<std::size_t>(best)];
  return d;
}

double bearing_deg(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
  const double deg =
      std::atan2(to.x() - from.x(), to.y() - from.y()) * 180.0 / M_PI;
  return deg < 0.0 ? deg + 360.0 : deg;
}

double angle_dist_deg(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

PiecewiseObjective make_transit_objective(const Eigen::Vector2d& own,
                                          const Eigen::Vector2d& waypoint,
                                          double cruise_speed,
                                          const DecisionSpace& space) {
  if ((own - waypoint).norm() < 1e-9) {
    throw DegenerateGoalError("transit waypoint coincides with own position");
  }
  const int hi = find_variable(space, "heading");
  const int si = find_variable(space, "speed");
  const double goal = bearing_deg(own, waypoint);
  constexpr double kHeadingSlope = 100.0 / 180.0;  // zero utility at 180 deg
  constexpr double kSpeedSlope = 50.0;             // per m/s of speed error

  PiecewiseObjective obj;
  obj.behavior_id = "transit";
  obj.utility = [=](const Eigen::VectorXd& point) {
    return clamped_peak(kHeadingSlope * angle_dist_deg(point(hi), goal),
                        kSpeedSlope * std::fabs(point(si) - cruise_speed));
  };
  if (space.variables.size() == 2) {
    obj.fill = [=](const DecisionSpace& s, std::vector<double>& out) {
      const auto& hv = s.variables[hi];
      const auto& sv = s.variables[si];
      std::vector<double> ht(hv.grid_count()), st(sv.grid_count());
      for (int k = 0; k < hv.grid_count(); ++k) {
        ht[k] = kHeadingSlope * angle_dist_deg(hv.grid_value(k), goal);
      }
      for (int k = 0; k < sv.grid_count(); ++k) {
        st[k] = kSpeedSlope * std::fabs(sv.grid_value(k) - cruise_speed);
      }
      // Row-major over declared order; outer = variable 0.
      const bool heading_first = hi == 0;
      const auto& outer = heading_first ? ht : st;
      const auto& inner = heading_first ? st : ht;
      std::size_t p = 0;
      for (double ov : outer) {
        for (double iv : inner) {
          out[p++] = heading_first ? clamped_peak(ov, iv)
                                   : clamped_peak(iv, ov);
        }
      }
    };
  }
  return obj;
}

PiecewiseObjective make_station_keep_objective(const DecisionSpace& space) {
  const int si = find_variable(space, "speed");
  const double slope = 100.0 / space.variables[si].max;

  PiecewiseObjective obj;
  obj.behavior_id = "station-keep";
  obj.utility = [=](const Eigen::VectorXd& point) {
    return clamped_peak(0.0, slope * point(si));
  };
  if (space.variables.size() == 2) {
    obj.fill = [=](const DecisionSpace& s, std::vector<double>& out) {
      const auto& sv = s.variables[si];
      std::vector<double> st(sv.grid_count());
      for (int k = 0; k < sv.grid_count(); ++k) {
        st[k] = clamped_peak(0.0, slope * sv.grid_value(k));
      }
      const int other = 1 - si;
      const int other_count = s.variables[other].grid_count();
      std::size_t p = 0;
      if (si == 1) {
        for (int o = 0; o < other_count; ++o) {
          for (double v : st) out[p++] = v;
        }
      } else {
        for (double v : st) {
          for (int o = 0; o < other_count; ++o) out[p++] = v;
        }
      }
    };
  }
  return obj;
}

}  // namespace gcid
