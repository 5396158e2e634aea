#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "gcid/errors.hpp"

namespace gcid {

// ---------------------------------------------------------------------------
// Option vocabulary
// ---------------------------------------------------------------------------

// The ordered set of group-choice options.  Label order is fixed for the
// whole mission and defines the tie-break order of dominant_option().
struct OptionSet {
  std::vector<std::string> labels;

  int count() const { return static_cast<int>(labels.size()); }
  int index_of(const std::string& label) const;  // -1 if absent
  void validate() const;                         // >= 2 unique labels
};

// One agent's opinion state: zero-sum opinion vector z, attention u >= 0,
// and seconds since mission start.
struct OpinionState {
  Eigen::VectorXd z;
  double u = 0.0;
  double time = 0.0;
};

// Homogeneous coupling tensor.  Entries do not depend on the neighbor k,
// only on whether the source is the agent itself and on the option pair.
struct CouplingTensor {
  Eigen::VectorXd alpha_self;  // intra-agent same-option gain, per option j
  Eigen::MatrixXd gamma_self;  // intra-agent different-option gain (j, l)
  Eigen::VectorXd a_same;      // inter-agent same-option gain, per option j
  Eigen::MatrixXd a_diff;      // inter-agent different-option gain (j, l)
  double resistance = 1.0;     // d > 0

  // Uniform tensor with alpha on the self diagonal and a_same/a_diff for
  // every inter-agent pair; gamma_self zero.
  static CouplingTensor homogeneous(int n_options, double alpha, double same,
                                    double diff, double d = 1.0);
  void validate(int n_options) const;
};

struct AttentionParams {
  double tau_u = 2.0;       // time constant, seconds
  double u_min = 0.5;       // Hill floor
  double u_max = 3.0;       // Hill ceiling
  double hill_n = 2.0;      // Hill exponent
  double hill_half = 60.0;  // half-activation input magnitude

  void validate() const;
  // Hill saturation applied to the mean-square opinion magnitude.
  double saturate(double y) const;
};

// Per-option additive input bias (the g_j utilities of the scenario layer).
struct OpinionInput {
  Eigen::VectorXd b;
};

// A decoded neighbor opinion as seen through the message buffer.
struct NeighborOpinionView {
  int agent_id = -1;
  Eigen::VectorXd z;
  double u = 0.0;  // attention is not transmitted; kept for symmetry, zero
  double age = 0.0;
};

// Saturation applied inside the social coupling term: odd, monotone,
// bounded, unit slope at the origin.
enum class Saturation { Tanh, ClippedLinear };

inline double saturate(Saturation kind, double x) {
  switch (kind) {
    case Saturation::Tanh:
      return std::tanh(x);
    case Saturation::ClippedLinear:
      return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x);
  }
  return x;
}

enum class PairRegime { Cooperation, Competition, Neutral };

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Projection onto the zero-sum subspace: P0 v = v - mean(v).
// Idempotent; output sums to zero within 1e-12.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> project_zero_sum(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = v;
  if (!out.allFinite()) {
    throw InvalidInputError("project_zero_sum: non-finite input");
  }
  out.array() -= out.mean();
  return out;
}

// Right-hand side F_i of the opinion dynamics for one agent, before the
// zero-sum projection:
//   F_j = -d z_j + u * sum_l S( A^jl_self z_self_l + sum_k A^jl_inter z_k_l )
//         + b_j
// The neighbor sum runs over the provided views only; absent agents are
// simply omitted.
Eigen::VectorXd opinion_rhs(const OpinionState& state,
                            const OpinionInput& input,
                            const std::vector<NeighborOpinionView>& neighbors,
                            const CouplingTensor& coupling,
                            Saturation saturation);

// One forward-Euler step of z' = z + dt * P0 F(z), with the neighbor
// opinions frozen over the step.  Attention is carried through unchanged.
// substeps > 1 subdivides dt for stiff configurations.
OpinionState opinion_step(const OpinionState& state, const OpinionInput& input,
                          const std::vector<NeighborOpinionView>& neighbors,
                          const CouplingTensor& coupling,
                          Saturation saturation, double dt, int substeps = 1);

// Mean-square opinion magnitude seen by the attention dynamics:
//   y = (1/N_O) sum_k sum_l (a_ik z_kl)^2
// over self (when include_self) plus the provided neighbor views.
double attention_input(const OpinionState& state,
                       const std::vector<NeighborOpinionView>& neighbors,
                       bool include_self, int n_options);

// One forward-Euler step of tau_u u' = -u + S_u(y); z carried through.
OpinionState attention_step(const OpinionState& state,
                            const std::vector<NeighborOpinionView>& neighbors,
                            bool include_self, const AttentionParams& params,
                            double dt);

// Lowest option index attaining the maximum opinion entry (0-based).
Eigen::Index dominant_option(const Eigen::VectorXd& z);

// Sign regime of a_same[j] - a_diff[j][l] for an inter-agent option pair.
PairRegime classify_pair_regime(const CouplingTensor& coupling, int j, int l);

}  // namespace gcid
