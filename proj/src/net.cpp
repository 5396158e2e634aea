#include "gcid/net.hpp"

#include <algorithm>
#include <cmath>

namespace gcid {

namespace {

inline std::int64_t quantize(double v, double scale, std::int64_t qmax,
                             bool& saturated) {
  const double q = std::nearbyint(v / scale);
  if (q > static_cast<double>(qmax)) {
    saturated = true;
    return qmax;
  }
  if (q < -static_cast<double>(qmax)) {
    saturated = true;
    return -qmax;
  }
  return static_cast<std::int64_t>(q);
}

}  // namespace

std::size_t payload_bytes(Resolution res, int n_options) {
  return res == Resolution::Coarse ? static_cast<std::size_t>(n_options)
                                   : static_cast<std::size_t>(4 * n_options);
}

std::vector<std::uint8_t> encode(int sender_id, std::uint16_t seq,
                                 const Eigen::VectorXd& z, Resolution res,
                                 double z_clip) {
  if (!z.allFinite()) throw InvalidInputError("encode: non-finite opinion");
  if (sender_id < 0 || sender_id > 255) {
    throw InvalidInputError("encode: sender_id must fit one byte");
  }
  const int n = static_cast<int>(z.size());
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + payload_bytes(res, n));
  out.push_back(static_cast<std::uint8_t>(sender_id));
  out.push_back(static_cast<std::uint8_t>(seq & 0xff));
  out.push_back(static_cast<std::uint8_t>((seq >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(res));

  bool saturated = false;
  if (res == Resolution::Coarse) {
    const double scale = z_clip / 127.0;
    for (int j = 0; j < n; ++j) {
      const std::int64_t q = quantize(z(j), scale, 127, saturated);
      out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(q)));
    }
  } else {
    const double scale = z_clip / 2147483648.0;  // 2^31
    for (int j = 0; j < n; ++j) {
      const std::int64_t q = quantize(z(j), scale, 2147483647, saturated);
      const auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(q));
      out.push_back(static_cast<std::uint8_t>(u & 0xff));
      out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xff));
      out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xff));
      out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xff));
    }
  }
  (void)saturated;  // flag surfaces on decode; clamping is not an error
  return out;
}

OpinionMessage decode(const std::vector<std::uint8_t>& bytes, double z_clip) {
  if (bytes.size() < kHeaderBytes + 1) {
    throw MalformedMessageError("message truncated before payload");
  }
  OpinionMessage msg;
  msg.sender_id = bytes[0];
  msg.seq = static_cast<std::uint16_t>(bytes[1] | (bytes[2] << 8));
  if (bytes[3] == 0) {
    msg.resolution = Resolution::Coarse;
  } else if (bytes[3] == 1) {
    msg.resolution = Resolution::Fine;
  } else {
    throw MalformedMessageError("unknown resolution flag");
  }

  const std::size_t payload = bytes.size() - kHeaderBytes;
  if (msg.resolution == Resolution::Coarse) {
    const double scale = z_clip / 127.0;
    msg.z.resize(static_cast<Eigen::Index>(payload));
    for (std::size_t j = 0; j < payload; ++j) {
      const auto q = static_cast<std::int8_t>(bytes[kHeaderBytes + j]);
      msg.z(static_cast<Eigen::Index>(j)) = q * scale;
      if (q == 127 || q == -127) msg.saturated = true;
    }
  } else {
    if (payload % 4 != 0) {
      throw MalformedMessageError("fine payload length not a multiple of 4");
    }
    const double scale = z_clip / 2147483648.0;
    const std::size_t n = payload / 4;
    msg.z.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t o = kHeaderBytes + 4 * j;
      const std::uint32_t u = static_cast<std::uint32_t>(bytes[o]) |
                              (static_cast<std::uint32_t>(bytes[o + 1]) << 8) |
                              (static_cast<std::uint32_t>(bytes[o + 2]) << 16) |
                              (static_cast<std::uint32_t>(bytes[o + 3]) << 24);
      const auto q = static_cast<std::int32_t>(u);
      msg.z(static_cast<Eigen::Index>(j)) = q * scale;
      if (q == 2147483647 || q == -2147483647) msg.saturated = true;
    }
  }
  return msg;
}

bool MessageBuffer::update(const OpinionMessage& msg, double now) {
  auto it = entries_.find(msg.sender_id);
  if (it != entries_.end() && msg.seq <= it->second.last_seq) {
    ++stale_dropped_;
    return false;
  }
  Entry& e = entries_[msg.sender_id];
  e.msg = msg;
  e.receipt_time = now;
  e.last_seq = msg.seq;
  return true;
}

const MessageBuffer::Entry* MessageBuffer::find(int sender_id) const {
  auto it = entries_.find(sender_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<NeighborOpinionView> MessageBuffer::neighbor_snapshot(
    const Eigen::Ref<const Eigen::Matrix<bool, 1, Eigen::Dynamic>>& adjacency_row,
    double now, double ttl) const {
  if (!(ttl > 0.0)) throw InvalidInputError("neighbor_snapshot: ttl must be > 0");
  std::vector<NeighborOpinionView> views;
  for (const auto& [sender, entry] : entries_) {
    if (sender < 0 || sender >= adjacency_row.size()) continue;
    if (!adjacency_row(sender)) continue;
    const double age = now - entry.receipt_time;
    if (age > ttl) continue;
    NeighborOpinionView v;
    v.agent_id = sender;
    v.z = entry.msg.z;
    v.age = age;
    views.push_back(std::move(v));
  }
  return views;
}

void ConnectivityModel::validate() const {
  if (!(comm_range > 0.0)) throw InvalidInputError("comm_range must be > 0");
  if (drop_probability < 0.0 || drop_probability > 1.0) {
    throw InvalidInputError("drop_probability must be in [0, 1]");
  }
  if (latency_ticks < 0) throw InvalidInputError("latency must be >= 0");
}

NetworkSnapshot connectivity(const std::vector<Eigen::Vector2d>& positions,
                             const ConnectivityModel& model) {
  if (positions.empty()) throw InvalidInputError("connectivity: no positions");
  model.validate();
  const auto n = static_cast<Eigen::Index>(positions.size());
  NetworkSnapshot snap;
  snap.adjacency.setConstant(n, n, false);
  snap.degrees = Eigen::VectorXi::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    snap.adjacency(i, i) = true;
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double dist = (positions[i] - positions[k]).norm();
      if (dist <= model.comm_range) {
        snap.adjacency(i, k) = snap.adjacency(k, i) = true;
        ++snap.degrees(i);
        ++snap.degrees(k);
      }
    }
  }
  return snap;
}

NetworkSim::NetworkSim(int n_agents, ConnectivityModel model,
                       Resolution resolution, double z_clip,
                       std::uint64_t seed)
    : model_(model),
      resolution_(resolution),
      z_clip_(z_clip),
      rng_(seed),
      seq_(static_cast<std::size_t>(n_agents), 0) {
  model_.validate();
}

std::size_t NetworkSim::exchange(const std::vector<Eigen::VectorXd>& opinions,
                                 const NetworkSnapshot& net,
                                 const std::vector<bool>& muted, double now,
                                 std::vector<MessageBuffer>& buffers) {
  const int n = static_cast<int>(opinions.size());
  std::size_t bytes_sent = 0;

  for (int i = 0; i < n; ++i) {
    if (muted[i]) continue;
    const std::uint16_t seq = ++seq_[i];
    const auto bytes = encode(i, seq, opinions[i], resolution_, z_clip_);
    ++messages_sent_;
    bytes_sent += payload_bytes(resolution_, static_cast<int>(opinions[i].size()));
    for (int k = 0; k < n; ++k) {
      if (k == i || muted[k] || !net.adjacency(i, k)) continue;
      if (model_.drop_probability > 0.0 &&
          rng_.bernoulli(model_.drop_probability)) {
        ++messages_dropped_;
        continue;
      }
      in_flight_.push_back({tick_ + model_.latency_ticks, k, bytes});
    }
  }

  // Commit everything due this tick; a muted receiver loses what was in
  // flight to it.
  for (auto it = in_flight_.begin(); it != in_flight_.end();) {
    if (it->due_tick <= tick_) {
      if (!muted[static_cast<std::size_t>(it->receiver)]) {
        buffers[static_cast<std::size_t>(it->receiver)].update(
            decode(it->bytes, z_clip_), now);
      }
      it = in_flight_.erase(it);
    } else {
      ++it;
    }
  }
  ++tick_;
  return bytes_sent;
}

}  // namespace gcid
