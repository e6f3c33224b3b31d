#include "mlr/uav_agent.hpp"

#include <doctest.h>

using namespace mlr;

namespace {

HorizonConfig hc;

CuMessage offer(CuId w, UavId i, RoundIndex k) {
  CuMessage m;
  m.sender = w;
  m.payload = TrajectoryPayload{i, hover_trajectory(Vec3(i, 1, 1), k - 1, hc, {k - 1, w})};
  return m;
}

}  // namespace

TEST_CASE("adopts a trajectory addressed to it") {
  UavAgent u(2, hover_trajectory(Vec3(0, 0, 1), -1, hc), Vec3(1, 1, 1));
  const auto st = u.on_round_start(6, {offer(1, 2, 6)});
  CHECK(st.adopted);
  CHECK(u.current().metadata == TrajectoryMetadata{5, 1});
  CHECK(u.emit().status.metadata == TrajectoryMetadata{5, 1});
}

TEST_CASE("keeps the shifted trajectory otherwise") {
  auto t = hover_trajectory(Vec3(0, 0, 1), 3, hc, {3, 2});
  t.jerks[0] = Vec3(1, 0, 0);
  UavAgent u(0, t, Vec3::Zero());
  const auto st = u.on_round_start(5, {offer(1, 1, 5)});  // for someone else
  CHECK_FALSE(st.adopted);
  CHECK(u.current() == shift(t));
  CHECK(u.current().metadata == TrajectoryMetadata{3, 2});
}

TEST_CASE("replies once per requesting CU") {
  UavAgent u(1, hover_trajectory(Vec3(0, 0, 1), -1, hc), Vec3::Zero());
  CuMessage r1{2, RequestPayload{1, 2}, std::nullopt, {}};
  CuMessage r2{1, RequestPayload{1, 1}, std::nullopt, {}};
  CuMessage other{3, RequestPayload{0, 3}, std::nullopt, {}};
  u.on_round_start(0, {r1, r2, other, r1});
  const auto e = u.emit();
  REQUIRE(e.replies.size() == 2);
  CHECK(e.replies[0].slot_owner == 1);
  CHECK(e.replies[1].slot_owner == 2);
  CHECK(e.replies[0].trajectory == u.current());
  CHECK(u.emit().replies.empty());
}

TEST_CASE("tracking error stays in the ball") {
  UavAgent u(3, hover_trajectory(Vec3(0.5, 0, 1), -1, hc), Vec3::Zero());
  TrackingModel tm{0.05, 9};
  for (int s = 0; s < 500; ++s) {
    const double t = s * 0.013;
    CHECK((u.actual_position(tm, t, 0.2) - u.reference(t, 0.2).position).norm() <= 0.05 + 1e-15);
  }
  TrackingModel none{0.0, 9};
  CHECK(u.actual_position(none, 0.37, 0.2) == u.reference(0.37, 0.2).position);
  CHECK(tm.disturbance(3, 1.1) == TrackingModel{0.05, 9}.disturbance(3, 1.1));
  CHECK(tm.disturbance(3, 1.1) != tm.disturbance(4, 1.1));
}

TEST_CASE("a silent UAV comes to rest within the horizon") {
  auto t = hover_trajectory(Vec3(0, 0, 1), 0, hc, {0, 1});
  for (auto& j : t.jerks) j = Vec3::Zero();
  t.initial_state.velocity = Vec3(0.3, 0, 0);
  t.jerks[0] = Vec3(-1, 0, 0);
  t.jerks[1] = Vec3(1, 0, 0);
  UavAgent u(0, t, Vec3::Zero());
  for (RoundIndex k = 1; k <= hc.horizon + 1; ++k) u.on_round_start(k, {});
  const auto end = terminal_state(t);
  CHECK((u.current().initial_state.position - end.position).norm() < 1e-12);
  CHECK((u.current().initial_state.velocity - end.velocity).norm() < 1e-12);
  for (const auto& j : u.current().jerks) CHECK(j == Vec3::Zero());
}
