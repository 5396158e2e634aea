#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "gcid/errors.hpp"
#include "gcid/opinion.hpp"
#include "gcid/rng.hpp"

namespace gcid {

// ---------------------------------------------------------------------------
// Wire format
// ---------------------------------------------------------------------------

enum class Resolution : std::uint8_t {
  Coarse = 0,  // 1 byte per option, scale z_clip / 127
  Fine = 1,    // 4 bytes per option, scale z_clip / 2^31
};

// The quantized opinion record an agent broadcasts once per tick.
// Wire layout, little-endian, bit-exact:
//   sender_id : 1 byte
//   seq       : 2 bytes
//   resolution: 1 byte (0 coarse, 1 fine)
//   payload   : N_O bytes (coarse) or 4 * N_O bytes (fine)
struct OpinionMessage {
  int sender_id = 0;
  std::uint16_t seq = 0;
  Resolution resolution = Resolution::Fine;
  Eigen::VectorXd z;        // decoded opinion values
  bool saturated = false;   // some |z_j| exceeded z_clip and was clamped
};

inline constexpr std::size_t kHeaderBytes = 4;
inline constexpr double kDefaultZClip = 100.0;

std::size_t payload_bytes(Resolution res, int n_options);

std::vector<std::uint8_t> encode(int sender_id, std::uint16_t seq,
                                 const Eigen::VectorXd& z, Resolution res,
                                 double z_clip = kDefaultZClip);

OpinionMessage decode(const std::vector<std::uint8_t>& bytes,
                      double z_clip = kDefaultZClip);

// ---------------------------------------------------------------------------
// Message buffer
// ---------------------------------------------------------------------------

// Latest message per sender.  A message is stored only when its sequence
// number advances; outdated opinions are dropped and tallied.
class MessageBuffer {
 public:
  struct Entry {
    OpinionMessage msg;
    double receipt_time = 0.0;
    std::uint16_t last_seq = 0;
  };

  // Returns true when the message replaced or created the entry.
  bool update(const OpinionMessage& msg, double now);

  const Entry* find(int sender_id) const;
  std::size_t size() const { return entries_.size(); }
  std::size_t stale_dropped() const { return stale_dropped_; }

  // Decoded views of senders that are currently adjacent and whose latest
  // message is younger than ttl seconds.
  std::vector<NeighborOpinionView> neighbor_snapshot(
      const Eigen::Ref<const Eigen::Matrix<bool, 1, Eigen::Dynamic>>& adjacency_row,
      double now, double ttl) const;

 private:
  std::map<int, Entry> entries_;
  std::size_t stale_dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Connectivity
// ---------------------------------------------------------------------------

struct ConnectivityModel {
  double comm_range = 160.0;    // meters
  double drop_probability = 0.0;
  int latency_ticks = 0;

  void validate() const;
};

// Symmetric boolean adjacency with self-loops, from agent positions.
struct NetworkSnapshot {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
  Eigen::VectorXi degrees;  // neighbor counts, self excluded
};

NetworkSnapshot connectivity(const std::vector<Eigen::Vector2d>& positions,
                             const ConnectivityModel& model);

// ---------------------------------------------------------------------------
// Per-tick exchange with impairments
// ---------------------------------------------------------------------------

// Deterministic broadcast fabric: all sends are collected, drops and latency
// applied through the seeded random source, and deliveries committed into
// the receivers' buffers.  Agents listed as muted neither send nor receive.
class NetworkSim {
 public:
  NetworkSim(int n_agents, ConnectivityModel model, Resolution resolution,
             double z_clip, std::uint64_t seed);

  // Broadcasts every agent's opinion to its neighbors under `net`, then
  // delivers everything due this tick.  `muted[i]` removes agent i from the
  // fabric entirely.  Returns payload bytes sent (bandwidth accounting).
  std::size_t exchange(const std::vector<Eigen::VectorXd>& opinions,
                       const NetworkSnapshot& net,
                       const std::vector<bool>& muted, double now,
                       std::vector<MessageBuffer>& buffers);

  std::size_t messages_sent() const { return messages_sent_; }
  std::size_t messages_dropped() const { return messages_dropped_; }

 private:
  struct Pending {
    long due_tick;
    int receiver;
    std::vector<std::uint8_t> bytes;
  };

  ConnectivityModel model_;
  Resolution resolution_;
  double z_clip_;
  Rng rng_;
  std::vector<std::uint16_t> seq_;
  std::deque<Pending> in_flight_;
  long tick_ = 0;
  std::size_t messages_sent_ = 0;
  std::size_t messages_dropped_ = 0;
};

}  // namespace gcid
