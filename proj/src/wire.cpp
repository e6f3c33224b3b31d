#include "mlr/wire.hpp"

#include <bit>
#include <string>

namespace mlr::wire {
namespace {

constexpr std::uint8_t kMagic0 = 'M';
constexpr std::uint8_t kMagic1 = 'L';
constexpr std::uint8_t kVersion = 1;

enum Tag : std::uint8_t { kUav = 1, kCu = 2, kReply = 3 };
enum PayloadTag : std::uint8_t { kEmpty = 0, kTrajectory = 1, kRequest = 2 };

class Writer {
 public:
  explicit Writer(Tag tag) { out_ = {kMagic0, kMagic1, kVersion, tag}; }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(int v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Vec3& v) {
    for (int a = 0; a < 3; ++a) f64(v[a]);
  }
  void metadata(const TrajectoryMetadata& m) {
    i64(m.calc_round);
    i32(m.cu_id);
  }
  void trajectory(const ReferenceTrajectory& t) {
    i64(t.start_round);
    metadata(t.metadata);
    f64(t.sampling_time);
    i32(t.steps_per_round);
    vec(t.initial_state.position);
    vec(t.initial_state.velocity);
    vec(t.initial_state.acceleration);
    u32(static_cast<std::uint32_t>(t.jerks.size()));
    for (const auto& u : t.jerks) vec(u);
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_++]) << (8 * i);
    return v;
  }
  int i32() { return static_cast<int>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Vec3 vec() {
    Vec3 v;
    for (int a = 0; a < 3; ++a) v[a] = f64();
    return v;
  }
  bool flag() {
    const auto b = u8();
    if (b > 1) throw WireError("bad boolean");
    return b == 1;
  }
  TrajectoryMetadata metadata() {
    TrajectoryMetadata m;
    m.calc_round = i64();
    m.cu_id = i32();
    return m;
  }
  ReferenceTrajectory trajectory() {
    ReferenceTrajectory t;
    t.start_round = i64();
    t.metadata = metadata();
    t.sampling_time = f64();
    t.steps_per_round = i32();
    t.initial_state.position = vec();
    t.initial_state.velocity = vec();
    t.initial_state.acceleration = vec();
    const std::uint32_t n = u32();
    if (n > remaining() / 24) throw WireError("jerk count exceeds payload");
    t.jerks.resize(n);
    for (auto& u : t.jerks) u = vec();
    return t;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void finish() const {
    if (pos_ != in_.size()) throw WireError("trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw WireError("truncated message");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes encode(const UavMessage& m) {
  Writer w(kUav);
  w.i32(m.sender);
  w.metadata(m.metadata);
  w.vec(m.target);
  w.u8(m.measured_position ? 1 : 0);
  if (m.measured_position) w.vec(*m.measured_position);
  return w.take();
}

Bytes encode(const CuMessage& m) {
  Writer w(kCu);
  w.i32(m.sender);
  if (const auto* t = std::get_if<TrajectoryPayload>(&m.payload)) {
    w.u8(kTrajectory);
    w.i32(t->uav);
    w.trajectory(t->trajectory);
  } else if (const auto* r = std::get_if<RequestPayload>(&m.payload)) {
    w.u8(kRequest);
    w.i32(r->uav);
    w.i32(r->requester);
  } else {
    w.u8(kEmpty);
  }
  w.u8(m.priorities ? 1 : 0);
  if (m.priorities) {
    w.u32(static_cast<std::uint32_t>(m.priorities->size()));
    for (auto p : *m.priorities) w.u8(p);
  }
  w.u32(static_cast<std::uint32_t>(m.planner_targets.size()));
  for (const auto& it : m.planner_targets) {
    w.i32(it.uav);
    w.vec(it.position);
    w.u8(it.active ? 1 : 0);
  }
  return w.take();
}

Bytes encode(const TrajectoryReply& m) {
  Writer w(kReply);
  w.i32(m.uav);
  w.i32(m.slot_owner);
  w.trajectory(m.trajectory);
  return w.take();
}

Bytes encode(const Message& m) {
  return std::visit([](const auto& v) { return encode(v); }, m);
}

Message decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.u8() != kMagic0 || r.u8() != kMagic1) throw WireError("bad magic");
  if (const auto v = r.u8(); v != kVersion) throw WireError("unsupported version " + std::to_string(v));
  const auto tag = r.u8();
  Message out;
  switch (tag) {
    case kUav: {
      UavMessage m;
      m.sender = r.i32();
      m.metadata = r.metadata();
      m.target = r.vec();
      if (r.flag()) m.measured_position = r.vec();
      out = m;
      break;
    }
    case kCu: {
      CuMessage m;
      m.sender = r.i32();
      switch (r.u8()) {
        case kEmpty: m.payload = EmptyPayload{}; break;
        case kTrajectory: {
          TrajectoryPayload t;
          t.uav = r.i32();
          t.trajectory = r.trajectory();
          m.payload = std::move(t);
          break;
        }
        case kRequest: {
          RequestPayload q;
          q.uav = r.i32();
          q.requester = r.i32();
          m.payload = q;
          break;
        }
        default: throw WireError("bad payload tag");
      }
      if (r.flag()) {
        const std::uint32_t n = r.u32();
        if (n > r.remaining()) throw WireError("priority count exceeds payload");
        PriorityVector p(n);
        for (auto& v : p) v = r.u8();
        m.priorities = std::move(p);
      }
      const std::uint32_t nt = r.u32();
      if (nt > r.remaining() / 29) throw WireError("target count exceeds payload");
      for (std::uint32_t i = 0; i < nt; ++i) {
        IntermediateTarget it;
        it.uav = r.i32();
        it.position = r.vec();
        it.active = r.flag();
        m.planner_targets.push_back(it);
      }
      out = std::move(m);
      break;
    }
    case kReply: {
      TrajectoryReply m;
      m.uav = r.i32();
      m.slot_owner = r.i32();
      m.trajectory = r.trajectory();
      out = std::move(m);
      break;
    }
    default: throw WireError("unknown message tag");
  }
  r.finish();
  return out;
}

}  // namespace mlr::wire
