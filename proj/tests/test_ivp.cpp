#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gcid/ivp.hpp"
#include "gcid/rng.hpp"

using namespace gcid;

namespace {

// Independent exhaustive reference: explicit nested loops, explicit
// comparator, no shared code with solve().
struct ScanResult {
  std::vector<double> values;
  double utility = -1.0;
};

ScanResult exhaustive_scan(const DecisionSpace& space,
                           const std::vector<PiecewiseObjective>& objectives,
                           const Eigen::VectorXd& weights) {
  ScanResult best;
  const int n_vars = static_cast<int>(space.variables.size());
  std::vector<int> idx(static_cast<std::size_t>(n_vars), 0);
  Eigen::VectorXd point(n_vars);
  bool first = true;
  while (true) {
    for (int v = 0; v < n_vars; ++v) {
      point(v) = space.variables[static_cast<std::size_t>(v)].grid_value(
          idx[static_cast<std::size_t>(v)]);
    }
    double total = 0.0;
    for (std::size_t q = 0; q < objectives.size(); ++q) {
      if (weights(static_cast<Eigen::Index>(q)) == 0.0) continue;
      total += weights(static_cast<Eigen::Index>(q)) *
               objectives[q].utility(point);
    }
    if (first || total > best.utility) {
      first = false;
      best.utility = total;
      best.values.assign(point.data(), point.data() + n_vars);
    }
    int v = n_vars - 1;
    for (; v >= 0; --v) {
      if (++idx[static_cast<std::size_t>(v)] <
          space.variables[static_cast<std::size_t>(v)].grid_count()) {
        break;
      }
      idx[static_cast<std::size_t>(v)] = 0;
    }
    if (v < 0) break;
  }
  return best;
}

PiecewiseObjective table_objective(const DecisionSpace& space,
                                   std::vector<double> table,
                                   const std::string& id) {
  PiecewiseObjective obj;
  obj.behavior_id = id;
  obj.utility = [space, table = std::move(table)](const Eigen::VectorXd& p) {
    long flat = 0;
    for (std::size_t v = 0; v < space.variables.size(); ++v) {
      const auto& var = space.variables[v];
      const int k = static_cast<int>(std::llround((p(static_cast<Eigen::Index>(v)) - var.min) / var.step));
      flat = flat * var.grid_count() + k;
    }
    return table[static_cast<std::size_t>(flat)];
  };
  return obj;
}

PiecewiseObjective constant_objective(double value, const std::string& id) {
  PiecewiseObjective obj;
  obj.behavior_id = id;
  obj.utility = [value](const Eigen::VectorXd&) { return value; };
  return obj;
}

BehaviorSet single(PiecewiseObjective obj, double w = 1.0) {
  BehaviorSet set;
  set.behaviors.push_back(std::move(obj));
  set.weights = Eigen::VectorXd::Constant(1, w);
  set.activation = Eigen::MatrixXi::Ones(1, 1);
  return set;
}

}  // namespace

TEST_CASE("decision grids: defaults and the coarse test grid") {
  const DecisionSpace fine = DecisionSpace::heading_speed();
  CHECK(fine.variables[0].grid_count() == 360);
  CHECK(fine.variables[1].grid_count() == 21);
  CHECK(fine.total_points() == 7560);

  const DecisionSpace coarse = DecisionSpace::heading_speed(10.0);
  CHECK(coarse.variables[0].grid_count() == 36);
  CHECK(coarse.total_points() == 756);

  DecisionSpace bad;
  bad.variables.push_back({"x", 0.0, 1.0, -0.5, false});
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
}

TEST_CASE("active_weights selects the dominant option's row") {
  BehaviorSet set;
  for (int q = 0; q < 3; ++q) {
    set.behaviors.push_back(constant_objective(1.0, "b" + std::to_string(q)));
  }
  set.weights = Eigen::Vector3d(1.0, 1.0, 1.0);
  set.activation = Eigen::MatrixXi::Identity(3, 3);
  set.validate();
  CHECK(active_weights(1, set).isApprox(Eigen::Vector3d(0, 1, 0)));

  // Migrate row activating two of four behaviors with weights (2, 1).
  BehaviorSet wide;
  for (int q = 0; q < 4; ++q) {
    wide.behaviors.push_back(constant_objective(1.0, "b" + std::to_string(q)));
  }
  wide.weights.resize(4);
  wide.weights << 1.0, 1.0, 2.0, 1.0;
  wide.activation = Eigen::MatrixXi::Zero(3, 4);
  wide.activation(0, 0) = 1;
  wide.activation(1, 1) = 1;
  wide.activation(2, 2) = 1;  // transit
  wide.activation(2, 3) = 1;  // group cohesion
  wide.validate();
  Eigen::VectorXd w = active_weights(2, wide);
  CHECK(w.isApprox((Eigen::VectorXd(4) << 0, 0, 2, 1).finished()));

  // Full activation returns the weight vector for any dominant option.
  BehaviorSet full;
  for (int q = 0; q < 3; ++q) {
    full.behaviors.push_back(constant_objective(1.0, "b" + std::to_string(q)));
  }
  full.weights = Eigen::Vector3d(0.5, 2.0, 3.0);
  full.activation = Eigen::MatrixXi::Ones(3, 3);
  for (int dominant = 0; dominant < 3; ++dominant) {
    CHECK(active_weights(dominant, full).isApprox(full.weights));
  }
}

TEST_CASE("solve finds a unique peak and breaks ties lexicographically") {
  const DecisionSpace space = DecisionSpace::heading_speed();

  PiecewiseObjective peak;
  peak.behavior_id = "peak";
  peak.utility = [](const Eigen::VectorXd& p) {
    return 100.0 - angle_dist_deg(p(0), 90.0) - 10.0 * std::fabs(p(1) - 1.0);
  };
  const Decision d = solve(space, single(peak), Eigen::VectorXd::Ones(1));
  CHECK(d.values(0) == 90.0);
  CHECK(d.values(1) == doctest::Approx(1.0));

  BehaviorSet flat;
  flat.behaviors.push_back(constant_objective(7.0, "a"));
  flat.behaviors.push_back(constant_objective(3.0, "b"));
  flat.weights = Eigen::Vector2d(1.0, 1.0);
  flat.activation = Eigen::MatrixXi::Ones(1, 2);
  const Decision tie = solve(space, flat, flat.weights);
  CHECK(tie.values(0) == 0.0);
  CHECK(tie.values(1) == 0.0);
  CHECK(tie.utility == doctest::Approx(10.0));

  CHECK_THROWS_AS((void)solve(space, flat, Eigen::Vector2d(0.0, 0.0)),
                  NoActiveBehaviorError);
}

TEST_CASE("solve equals the exhaustive oracle on a transit mixture") {
  const DecisionSpace space = DecisionSpace::heading_speed(10.0);
  const Eigen::Vector2d own(0.0, 0.0);
  const Eigen::Vector2d wp(100.0, 100.0);  // bearing 45 deg

  BehaviorSet set;
  set.behaviors.push_back(make_transit_objective(own, wp, 1.5, space));
  PiecewiseObjective slow;
  slow.behavior_id = "speed-penalty";
  slow.utility = [](const Eigen::VectorXd& p) {
    return std::max(0.0, 100.0 - 80.0 * std::fabs(p(1) - 0.4));
  };
  set.behaviors.push_back(std::move(slow));
  set.weights = Eigen::Vector2d(1.0, 1.0);
  set.activation = Eigen::MatrixXi::Ones(1, 2);

  const Decision d = solve(space, set, set.weights);
  const ScanResult ref = exhaustive_scan(space, set.behaviors, set.weights);
  CHECK(d.values(0) == ref.values[0]);
  CHECK(d.values(1) == ref.values[1]);
  CHECK(d.utility == ref.utility);
}

TEST_CASE("solve matches the oracle on randomized objective tables") {
  Rng rng(321);
  for (int trial = 0; trial < 60; ++trial) {
    const double heading_step = 15.0 + 15.0 * rng.uniform_index(2);
    const double speed_step = 0.25;
    const DecisionSpace space =
        DecisionSpace::heading_speed(heading_step, 2.0, speed_step);

    const long total = space.total_points();
    const int q = 1 + static_cast<int>(rng.uniform_index(3));
    BehaviorSet set;
    Eigen::VectorXd weights(q);
    for (int b = 0; b < q; ++b) {
      std::vector<double> table(static_cast<std::size_t>(total));
      for (auto& v : table) v = 100.0 * rng.uniform();
      set.behaviors.push_back(
          table_objective(space, std::move(table), "t" + std::to_string(b)));
      weights(b) = 0.1 + 5.0 * rng.uniform();
    }
    set.weights = weights;
    set.activation = Eigen::MatrixXi::Ones(1, q);

    const Decision d = solve(space, set, weights);
    const ScanResult ref = exhaustive_scan(space, set.behaviors, weights);
    REQUIRE(d.values(0) == ref.values[0]);
    REQUIRE(d.values(1) == ref.values[1]);

    // Positive rescaling never moves the argmax.
    const double c = 0.25 + 10.0 * rng.uniform();
    const Decision scaled = solve(space, set, (weights.array() * c).matrix());
    REQUIRE(scaled.values(0) == d.values(0));
    REQUIRE(scaled.values(1) == d.values(1));

    // A zero-weight behavior has no effect.
    BehaviorSet padded = set;
    std::vector<double> junk(static_cast<std::size_t>(total));
    for (auto& v : junk) v = 100.0 * rng.uniform();
    padded.behaviors.push_back(table_objective(space, std::move(junk), "junk"));
    Eigen::VectorXd padded_w(q + 1);
    padded_w.head(q) = weights;
    padded_w(q) = 0.0;
    const Decision same = solve(space, padded, padded_w);
    REQUIRE(same.values(0) == d.values(0));
    REQUIRE(same.values(1) == d.values(1));
    REQUIRE(same.utility == d.utility);

    // Determinism: identical call, identical decision.
    const Decision again = solve(space, set, weights);
    REQUIRE(again.values(0) == d.values(0));
    REQUIRE(again.values(1) == d.values(1));
    REQUIRE(again.utility == d.utility);
  }
}

TEST_CASE("transit objective peaks at the bearing and cruise speed") {
  const DecisionSpace space = DecisionSpace::heading_speed();
  const Eigen::Vector2d own(10.0, 10.0);

  SUBCASE("due north") {
    const auto obj =
        make_transit_objective(own, own + Eigen::Vector2d(0, 50), 1.5, space);
    Eigen::Vector2d p(0.0, 1.5);
    CHECK(obj.utility(p) == doctest::Approx(100.0));
    const Decision d = solve(space, single(obj), Eigen::VectorXd::Ones(1));
    CHECK(d.values(0) == 0.0);
    CHECK(d.values(1) == doctest::Approx(1.5));
  }

  SUBCASE("due east beats due west") {
    const auto obj =
        make_transit_objective(own, own + Eigen::Vector2d(80, 0), 1.0, space);
    for (double s : {0.0, 1.0, 2.0}) {
      CHECK(obj.utility(Eigen::Vector2d(270.0, s)) <
            obj.utility(Eigen::Vector2d(90.0, s)));
    }
  }

  SUBCASE("solve recovers the atan2 bearing rounded to the grid") {
    Rng rng(9);
    for (int trial = 0; trial < 25; ++trial) {
      const Eigen::Vector2d wp(rng.uniform(-200, 200), rng.uniform(-200, 200));
      if (wp.norm() < 2.0) continue;
      const auto obj = make_transit_objective({0, 0}, wp, 1.0, space);
      const Decision d =
          solve(space, single(obj), Eigen::VectorXd::Ones(1));
      const ScanResult ref = exhaustive_scan(space, {obj},
                                             Eigen::VectorXd::Ones(1));
      CHECK(d.values(0) == ref.values[0]);
      const double goal = bearing_deg({0, 0}, wp);
      double rounded = std::fmod(std::round(goal), 360.0);
      CHECK(angle_dist_deg(d.values(0), rounded) <= 0.5 + 1e-9);
    }
  }

  SUBCASE("degenerate goal is rejected") {
    CHECK_THROWS_AS((void)make_transit_objective(own, own, 1.0, space),
                    DegenerateGoalError);
  }
}

TEST_CASE("station-keep holds speed zero") {
  const DecisionSpace space = DecisionSpace::heading_speed();
  const auto keep = make_station_keep_objective(space);

  const Decision d = solve(space, single(keep), Eigen::VectorXd::Ones(1));
  CHECK(d.values(1) == 0.0);

  for (double s : {0.1, 0.5, 2.0}) {
    CHECK(keep.utility(Eigen::Vector2d(123.0, 0.0)) >
          keep.utility(Eigen::Vector2d(123.0, s)));
  }

  // Dominant station weight wins over a fast transit preference.
  BehaviorSet mix;
  mix.behaviors.push_back(keep);
  mix.behaviors.push_back(
      make_transit_objective({0, 0}, {100, 0}, 1.5, space));
  mix.weights = Eigen::Vector2d(10.0, 1.0);
  mix.activation = Eigen::MatrixXi::Ones(1, 2);
  const Decision held = solve(space, mix, mix.weights);
  const ScanResult ref = exhaustive_scan(space, mix.behaviors, mix.weights);
  CHECK(held.values(1) == 0.0);
  CHECK(held.values(0) == ref.values[0]);
  CHECK(held.values(1) == ref.values[1]);
}

TEST_CASE("tabulated fill agrees bit for bit with pointwise evaluation") {
  const DecisionSpace space = DecisionSpace::heading_speed(5.0);
  const auto transit = make_transit_objective({3, 4}, {-40, 90}, 1.2, space);
  const auto keep = make_station_keep_objective(space);
  for (const auto& obj : {transit, keep}) {
    REQUIRE(static_cast<bool>(obj.fill));
    std::vector<double> table(static_cast<std::size_t>(space.total_points()));
    obj.fill(space, table);
    std::size_t p = 0;
    for (int h = 0; h < space.variables[0].grid_count(); ++h) {
      for (int s = 0; s < space.variables[1].grid_count(); ++s, ++p) {
        const Eigen::Vector2d point(space.variables[0].grid_value(h),
                                    space.variables[1].grid_value(s));
        REQUIRE(table[p] == obj.utility(point));
      }
    }
  }
}

TEST_CASE("behavior set validation catches structural mistakes") {
  BehaviorSet set;
  set.behaviors.push_back(constant_objective(1.0, "a"));
  set.behaviors.push_back(constant_objective(1.0, "b"));
  set.weights = Eigen::Vector2d(1.0, 1.0);
  set.activation = Eigen::MatrixXi::Ones(2, 2);
  CHECK_NOTHROW(set.validate());

  BehaviorSet dead_row = set;
  dead_row.activation.row(0).setZero();
  CHECK_THROWS_AS(dead_row.validate(), InvalidInputError);

  BehaviorSet orphan = set;
  orphan.activation.col(1).setZero();
  CHECK_THROWS_AS(orphan.validate(), InvalidInputError);

  BehaviorSet negative = set;
  negative.weights(0) = -1.0;
  CHECK_THROWS_AS(negative.validate(), InvalidInputError);
}
