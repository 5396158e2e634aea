#pragma once

// Shared test fixture: steps a fully connected fleet through the library's
// opinion and attention steps, synchronously (all updates from the same
// tick-start state).

#include <vector>

#include "gcid/opinion.hpp"

namespace testutil {

struct Fleet {
  std::vector<gcid::OpinionState> agents;
  std::vector<gcid::OpinionInput> inputs;
  gcid::CouplingTensor coupling;
  gcid::AttentionParams attention;
  gcid::Saturation saturation = gcid::Saturation::Tanh;
};

inline void euler_tick(Fleet& fleet, double dt, bool update_attention = true,
                       int substeps = 1) {
  const auto n = fleet.agents.size();
  std::vector<std::vector<gcid::NeighborOpinionView>> views(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      gcid::NeighborOpinionView v;
      v.agent_id = static_cast<int>(k);
      v.z = fleet.agents[k].z;
      views[i].push_back(std::move(v));
    }
  }
  std::vector<gcid::OpinionState> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = gcid::opinion_step(fleet.agents[i], fleet.inputs[i], views[i],
                                 fleet.coupling, fleet.saturation, dt,
                                 substeps);
    if (update_attention) {
      next[i].u = gcid::attention_step(fleet.agents[i], views[i], true,
                                       fleet.attention, dt)
                      .u;
    }
  }
  fleet.agents = std::move(next);
}

}  // namespace testutil
