#include "gcid/opinion.hpp"

#include <algorithm>
#include <set>

namespace gcid {

int OptionSet::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

void OptionSet::validate() const {
  if (labels.size() < 2) {
    throw InvalidInputError("option set needs at least 2 options");
  }
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) {
    throw InvalidInputError("option labels must be unique");
  }
}

CouplingTensor CouplingTensor::homogeneous(int n, double alpha, double same,
                                           double diff, double d) {
  CouplingTensor c;
  c.alpha_self = Eigen::VectorXd::Constant(n, alpha);
  c.gamma_self = Eigen::MatrixXd::Zero(n, n);
  c.a_same = Eigen::VectorXd::Constant(n, same);
  c.a_diff = Eigen::MatrixXd::Constant(n, n, diff);
  c.a_diff.diagonal().setZero();
  c.resistance = d;
  return c;
}

void CouplingTensor::validate(int n) const {
  if (alpha_self.size() != n || a_same.size() != n ||
      gamma_self.rows() != n || gamma_self.cols() != n ||
      a_diff.rows() != n || a_diff.cols() != n) {
    throw InvalidInputError("coupling tensor dimensions do not match options");
  }
  if ((alpha_self.array() < 0.0).any()) {
    throw InvalidInputError("intra-agent same-option gain must be >= 0");
  }
  if (!(resistance > 0.0)) {
    throw InvalidInputError("resistance d must be > 0");
  }
}

void AttentionParams::validate() const {
  if (!(tau_u > 0.0)) throw InvalidInputError("tau_u must be > 0");
  if (!(u_max > u_min) || u_min < 0.0) {
    throw InvalidInputError("attention bounds need u_max > u_min >= 0");
  }
  if (hill_n < 1.0) throw InvalidInputError("hill_n must be >= 1");
  if (!(hill_half > 0.0)) throw InvalidInputError("hill_half must be > 0");
}

double AttentionParams::saturate(double y) const {
  if (y <= 0.0) return u_min;
  const double yn = std::pow(y / hill_half, hill_n);
  return u_min + (u_max - u_min) * yn / (1.0 + yn);
}

Eigen::VectorXd opinion_rhs(const OpinionState& state,
                            const OpinionInput& input,
                            const std::vector<NeighborOpinionView>& neighbors,
                            const CouplingTensor& coupling,
                            Saturation saturation) {
  const Eigen::Index n = state.z.size();

  // Opinions summed across neighbors, per option.
  Eigen::VectorXd neighbor_sum = Eigen::VectorXd::Zero(n);
  for (const auto& view : neighbors) {
    if (view.z.size() != n) {
      throw InvalidInputError("neighbor opinion length mismatch");
    }
    neighbor_sum += view.z;
  }

  Eigen::VectorXd f(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double social = 0.0;
    for (Eigen::Index l = 0; l < n; ++l) {
      const double intra =
          (l == j) ? coupling.alpha_self(j) : coupling.gamma_self(j, l);
      const double inter =
          (l == j) ? coupling.a_same(j) : coupling.a_diff(j, l);
      social += saturate(saturation,
                         intra * state.z(l) + inter * neighbor_sum(l));
    }
    f(j) = -coupling.resistance * state.z(j) + state.u * social + input.b(j);
  }
  return f;
}

OpinionState opinion_step(const OpinionState& state, const OpinionInput& input,
                          const std::vector<NeighborOpinionView>& neighbors,
                          const CouplingTensor& coupling,
                          Saturation saturation, double dt, int substeps) {
  if (!(dt > 0.0)) throw InvalidInputError("opinion_step: dt must be > 0");
  if (substeps < 1) throw InvalidInputError("opinion_step: substeps >= 1");
  if (input.b.size() != state.z.size()) {
    throw InvalidInputError("opinion_step: input length mismatch");
  }
  if (!state.z.allFinite() || !input.b.allFinite()) {
    throw InvalidInputError("opinion_step: non-finite state or input");
  }

  OpinionState next = state;
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const Eigen::VectorXd f = opinion_rhs(next, input, neighbors, coupling,
                                          saturation);
    next.z += h * (f.array() - f.mean()).matrix();
  }
  for (Eigen::Index j = 0; j < next.z.size(); ++j) {
    if (!std::isfinite(next.z(j))) {
      throw IntegrationDivergedError(
          "opinion_step diverged at option index " + std::to_string(j),
          static_cast<int>(j));
    }
  }
  next.time = state.time + dt;
  return next;
}

double attention_input(const OpinionState& state,
                       const std::vector<NeighborOpinionView>& neighbors,
                       bool include_self, int n_options) {
  double sum_sq = include_self ? state.z.squaredNorm() : 0.0;
  for (const auto& view : neighbors) sum_sq += view.z.squaredNorm();
  return sum_sq / n_options;
}

OpinionState attention_step(const OpinionState& state,
                            const std::vector<NeighborOpinionView>& neighbors,
                            bool include_self, const AttentionParams& params,
                            double dt) {
  if (!(dt > 0.0)) throw InvalidInputError("attention_step: dt must be > 0");
  params.validate();

  const double y = attention_input(state, neighbors, include_self,
                                   static_cast<int>(state.z.size()));
  OpinionState next = state;
  next.u += (dt / params.tau_u) * (-state.u + params.saturate(y));
  if (!std::isfinite(next.u)) {
    throw IntegrationDivergedError("attention_step diverged", -1);
  }
  next.u = std::max(0.0, next.u);
  return next;
}

Eigen::Index dominant_option(const Eigen::VectorXd& z) {
  if (!z.allFinite()) {
    throw InvalidInputError("dominant_option: non-finite opinion");
  }
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < z.size(); ++j) {
    if (z(j) > z(best)) best = j;
  }
  return best;
}

PairRegime classify_pair_regime(const CouplingTensor& coupling, int j, int l) {
  if (j == l) {
    throw InvalidInputError("classify_pair_regime: options must differ");
  }
  const double gap = coupling.a_same(j) - coupling.a_diff(j, l);
  if (gap > 0.0) return PairRegime::Cooperation;
  if (gap < 0.0) return PairRegime::Competition;
  return PairRegime::Neutral;
}

}  // namespace gcid
