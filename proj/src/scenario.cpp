#include "mlr/scenario.hpp"

#include <algorithm>
#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mlr {

RoundSchedule Scenario::schedule() const {
  RoundSchedule sc;
  sc.period = optimization.horizon.round_period;
  sc.computation_time = sc.period * 0.525;
  sc.communication_time = sc.period - sc.computation_time;
  sc.num_uavs = num_uavs;
  sc.num_cus = num_cus;
  return sc;
}

const std::vector<Vec3>& Scenario::targets_at(RoundIndex k) const {
  const TargetSegment* cur = &segments.front();
  for (const auto& s : segments) {
    if (s.start <= k) cur = &s;
  }
  return cur->targets;
}

void Scenario::validate() const {
  if (num_uavs < 1) throw std::invalid_argument("scenario needs at least one UAV");
  if (num_cus < 1 || num_cus > num_uavs) throw std::invalid_argument("need 1 <= M <= N");
  if (rounds < 1) throw std::invalid_argument("scenario needs at least one round");
  if (loss_prob < 0.0 || loss_prob > 1.0) throw std::invalid_argument("loss probability outside [0,1]");
  if (delta_d_min < 0.0) throw std::invalid_argument("tracking bound must be nonnegative");
  optimization.validate();
  deadlock.validate();
  if (static_cast<int>(initial_positions.size()) != num_uavs) throw std::invalid_argument("one initial position per UAV");
  if (segments.empty() || segments.front().start != 0) throw std::invalid_argument("targets must be given from round 0");
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (static_cast<int>(segments[s].targets.size()) != num_uavs) throw std::invalid_argument("one target per UAV");
    if (s > 0 && segments[s].start <= segments[s - 1].start) throw std::invalid_argument("segments must be ordered");
  }
  const Box3& box = optimization.state_box.position;
  for (int i = 0; i < num_uavs; ++i) {
    if (!box.contains(initial_positions[static_cast<std::size_t>(i)])) {
      throw std::invalid_argument("initial position outside the flight box");
    }
    for (int j = i + 1; j < num_uavs; ++j) {
      const double d = scaled_norm(initial_positions[static_cast<std::size_t>(j)] -
                                       initial_positions[static_cast<std::size_t>(i)],
                                   optimization.theta);
      if (d < optimization.d_hat_min) {
        throw std::invalid_argument("initial positions of UAVs " + std::to_string(i) + " and " + std::to_string(j) +
                                    " are closer than d_hat_min");
      }
    }
  }
}

namespace {

constexpr double kCenterZ = 1.3;

std::vector<Vec3> square_ring(int n, double half, double z) {
  std::vector<Vec3> out;
  const double perimeter = 8.0 * half;
  for (int i = 0; i < n; ++i) {
    double s = perimeter * i / n;
    Vec3 p;
    if (s < 2 * half) {
      p = Vec3(-half + s, -half, z);
    } else if ((s -= 2 * half) < 2 * half) {
      p = Vec3(half, -half + s, z);
    } else if ((s -= 2 * half) < 2 * half) {
      p = Vec3(half - s, half, z);
    } else {
      s -= 2 * half;
      p = Vec3(-half, half - s, z);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<Vec3> circle(int n, double radius, double offset, double z) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) {
    const double a = offset + 2.0 * M_PI * i / n;
    out.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
  }
  return out;
}

bool separated(const std::vector<Vec3>& pts, const Vec3& p, const Vec3& theta, double min_dist) {
  return std::all_of(pts.begin(), pts.end(), [&](const Vec3& q) { return scaled_norm(q - p, theta) >= min_dist; });
}

std::vector<Vec3> random_points(int n, const Box3& box, double margin, const Vec3& theta, double min_dist,
                                std::mt19937_64& rng) {
  std::vector<Vec3> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 lo = box.lower + Vec3(margin, margin, margin + 0.3);
  const Vec3 hi = box.upper - Vec3::Constant(margin);
  for (int attempts = 0; static_cast<int>(out.size()) < n; ++attempts) {
    if (attempts > 100000) throw std::runtime_error("could not place random points");
    const Vec3 p(lo.x() + (hi.x() - lo.x()) * u(rng), lo.y() + (hi.y() - lo.y()) * u(rng),
                 lo.z() + (hi.z() - lo.z()) * u(rng));
    if (separated(out, p, theta, min_dist)) out.push_back(p);
  }
  return out;
}

std::vector<Vec3> permuted(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  const auto p = assign_targets(from, to);
  std::vector<Vec3> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) out[i] = to[static_cast<std::size_t>(p[i])];
  return out;
}

}  // namespace

std::vector<Vec3> formation_plane(int n) {
  const int cols = static_cast<int>(std::ceil(std::sqrt(2.0 * n)));
  const int rows = (n + cols - 1) / cols;
  const double spacing = std::min(0.8, 3.0 / std::max(cols, 1));
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) {
    const int r = i / cols, c = i % cols;
    out.emplace_back((c - (cols - 1) / 2.0) * spacing, (r - (rows - 1) / 2.0) * spacing, kCenterZ);
  }
  return out;
}

std::vector<Vec3> formation_pyramid(int n) {
  if (n == 1) return {Vec3(0, 0, kCenterZ)};
  const int mid = (n - 1) / 3;
  const int bottom = n - 1 - mid;
  std::vector<Vec3> out = square_ring(bottom, 1.0, 0.5);
  const auto m = square_ring(mid, 0.5, 1.3);
  out.insert(out.end(), m.begin(), m.end());
  out.emplace_back(0.0, 0.0, 2.1);
  return out;
}

std::vector<Vec3> formation_cube(int n) {
  const int c = std::max(2, static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9)));
  const double side = 1.2;
  std::vector<Vec3> out;
  for (int i = 0; i < c * c * c && static_cast<int>(out.size()) < n; ++i) {
    const int x = i % c, y = (i / c) % c, z = i / (c * c);
    const double s = side / (c - 1);
    out.emplace_back(-side / 2 + x * s, -side / 2 + y * s, kCenterZ - side / 2 + z * s);
  }
  return out;
}

std::vector<Vec3> formation_sphere(int n) {
  std::vector<Vec3> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = n == 1 ? 0.0 : 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(1.0 - z * z);
    const double a = golden * i;
    out.emplace_back(r * std::cos(a), r * std::sin(a), kCenterZ + z);
  }
  return out;
}

std::vector<int> assign_targets(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
  const int n = static_cast<int>(from.size());
  if (static_cast<int>(to.size()) != n) throw std::invalid_argument("assignment needs equal sizes");
  // Hungarian method, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1)), v(static_cast<std::size_t>(n + 1));
  std::vector<int> p(static_cast<std::size_t>(n + 1)), way(static_cast<std::size_t>(n + 1));
  auto cost = [&](int i, int j) {
    return (from[static_cast<std::size_t>(i - 1)] - to[static_cast<std::size_t>(j - 1)]).squaredNorm();
  };
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0, j) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) out[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return out;
}

std::vector<std::string> builtin_names() {
  return {"formations", "circle-exchange", "random-targets", "cross-exchange", "hover"};
}

Scenario builtin_scenario(const std::string& name, int n, int m, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("scenario needs at least one UAV");
  Scenario s;
  s.name = name;
  s.num_uavs = n;
  s.num_cus = m;
  s.seed = seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5ce7u};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  if (name == "formations") {
    // Compute-limited setting like the hardware formation flights: a short
    // horizon and slow cruise, so a formation change takes many plans and
    // the trigger decides who gets them.
    s.optimization.horizon.horizon = 7;
    s.optimization.bvc_steps = 7;
    s.optimization.box_steps = 7;
    s.optimization.cost_steps = 7;
    s.optimization.state_box.velocity = Box3{Vec3::Constant(-0.5), Vec3::Constant(0.5)};
    s.initial_positions = formation_plane(n);
    const std::vector<std::vector<Vec3>> shapes{formation_pyramid(n), formation_cube(n), formation_sphere(n),
                                                formation_plane(n)};
    std::vector<Vec3> prev = s.initial_positions;
    RoundIndex start = 0;
    for (auto shape : shapes) {
      // Seeded yaw so different seeds fly different assignments.
      const double yaw = seed == 0 ? 0.0 : 2.0 * M_PI * unit(rng);
      const Eigen::Matrix3d rot = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
      for (auto& p : shape) p = rot * p;
      prev = permuted(prev, shape);
      s.segments.push_back({start, prev});
      start += 100;
    }
    s.rounds = start;
  } else if (name == "circle-exchange" || name == "cross-exchange") {
    const bool cross = name == "cross-exchange";
    const double offset = cross ? 0.0 : 2.0 * M_PI * unit(rng);
    const double radius = cross ? 1.2 : 1.4;
    s.initial_positions = circle(n, radius, offset, kCenterZ);
    if (!cross) {
      for (auto& p : s.initial_positions) p.z() += 0.1 * (unit(rng) - 0.5);
    }
    std::vector<Vec3> targets;
    for (const auto& p : s.initial_positions) targets.emplace_back(-p.x(), -p.y(), p.z());
    s.segments.push_back({0, targets});
    s.rounds = cross ? 300 : 150;
  } else if (name == "random-targets") {
    const Box3& box = s.optimization.state_box.position;
    const double sep = 0.6;
    s.initial_positions = random_points(n, box, 0.3, s.optimization.theta, sep, rng);
    for (RoundIndex start = 0; start < 180; start += 60) {
      s.segments.push_back({start, random_points(n, box, 0.3, s.optimization.theta, sep, rng)});
    }
    s.rounds = 180;
  } else if (name == "hover") {
    s.initial_positions = formation_plane(n);
    s.segments.push_back({0, s.initial_positions});
    s.rounds = 50;
  } else {
    throw std::invalid_argument("unknown scenario '" + name + "'");
  }
  return s;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad number for '" + key + "': " + v);
}

long to_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("bad integer for '" + key + "': " + v);
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("bad boolean for '" + key + "': " + v);
}

Vec3 to_vec(const std::string& v, const std::string& key) {
  std::stringstream ss(v);
  std::string part;
  std::vector<double> xs;
  while (std::getline(ss, part, ',')) xs.push_back(to_double(trim(part), key));
  if (xs.size() == 1) return Vec3::Constant(xs[0]);
  if (xs.size() != 3) throw std::invalid_argument("expected x,y,z for '" + key + "'");
  return Vec3(xs[0], xs[1], xs[2]);
}

std::vector<Vec3> to_points(const std::string& v, const std::string& key) {
  std::stringstream ss(v);
  std::string part;
  std::vector<Vec3> out;
  while (std::getline(ss, part, ';')) {
    if (!trim(part).empty()) out.push_back(to_vec(trim(part), key));
  }
  return out;
}

}  // namespace

void apply_setting(Scenario& s, const std::string& key, const std::string& value) {
  auto& o = s.optimization;
  auto& d = s.deadlock;
  const std::map<std::string, double*> doubles{
      {"loss_prob", &s.loss_prob},
      {"delta_d_min", &s.delta_d_min},
      {"round_period", &o.horizon.round_period},
      {"sampling_time", &o.horizon.sampling_time},
      {"bvc_sampling_time", &o.bvc_sampling_time},
      {"box_sampling_time", &o.box_sampling_time},
      {"cost_sampling_time", &o.cost_sampling_time},
      {"input_weight", &o.input_weight},
      {"d_hat_min", &o.d_hat_min},
      {"soft_weight_base", &o.soft_weight_base},
      {"soft_weight_right", &o.soft_weight_right},
      {"soft_clearance", &o.soft_clearance},
      {"distance_scale", &s.distance_scale},
      {"hybrid_scale", &s.hybrid_scale},
      {"deadlock.velocity_threshold", &d.velocity_threshold},
      {"deadlock.target_tolerance", &d.target_tolerance},
      {"deadlock.make_room_radius", &d.make_room_radius},
      {"deadlock.push_distance", &d.push_distance},
      {"deadlock.noise_scale", &d.noise_scale},
  };
  const std::map<std::string, int*> ints{
      {"n_uavs", &s.num_uavs},         {"n_cus", &s.num_cus},         {"horizon", &o.horizon.horizon},
      {"bvc_steps", &o.bvc_steps},     {"box_steps", &o.box_steps},   {"cost_steps", &o.cost_steps},
  };
  const std::map<std::string, bool*> bools{
      {"soft_constraints", &s.soft_constraints},
      {"planner", &s.planner},
      {"loss_recovery", &s.loss_recovery},
  };
  const std::map<std::string, Vec3*> vecs{
      {"theta", &o.theta},
      {"position_weight", &o.position_weight},
      {"velocity_weight", &o.velocity_weight},
      {"acceleration_weight", &o.acceleration_weight},
      {"position_min", &o.state_box.position.lower},
      {"position_max", &o.state_box.position.upper},
  };
  if (auto it = doubles.find(key); it != doubles.end()) {
    *it->second = to_double(value, key);
  } else if (auto it2 = ints.find(key); it2 != ints.end()) {
    *it2->second = static_cast<int>(to_int(value, key));
  } else if (auto it3 = bools.find(key); it3 != bools.end()) {
    *it3->second = to_bool(value, key);
  } else if (auto it4 = vecs.find(key); it4 != vecs.end()) {
    *it4->second = to_vec(value, key);
  } else if (key == "name") {
    s.name = value;
  } else if (key == "rounds") {
    s.rounds = to_int(value, key);
  } else if (key == "seed") {
    s.seed = static_cast<std::uint64_t>(to_int(value, key));
  } else if (key == "trigger") {
    s.trigger = parse_trigger(value);
  } else if (key == "jam") {
    s.jams.push_back(parse_jam(value, s.schedule()));
  } else if (key == "bootstrap") {
    if (value != "hover" && value != "request") throw std::invalid_argument("bootstrap must be hover or request");
    s.hover_bootstrap = value == "hover";
  } else if (key == "jerk_max") {
    const Vec3 v = to_vec(value, key);
    o.input_box = Box3{-v, v};
  } else if (key == "velocity_max") {
    const Vec3 v = to_vec(value, key);
    o.state_box.velocity = Box3{-v, v};
  } else if (key == "acceleration_max") {
    const Vec3 v = to_vec(value, key);
    o.state_box.acceleration = Box3{-v, v};
  } else if (key == "initial") {
    s.initial_positions = to_points(value, key);
  } else if (key.starts_with("targets@")) {
    const RoundIndex start = to_int(key.substr(8), key);
    auto pts = to_points(value, key);
    auto it = std::find_if(s.segments.begin(), s.segments.end(), [&](const auto& g) { return g.start == start; });
    if (it != s.segments.end()) {
      it->targets = std::move(pts);
    } else {
      s.segments.push_back({start, std::move(pts)});
      std::sort(s.segments.begin(), s.segments.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    }
  } else if (key == "segment_rounds") {
    // Re-space the target script evenly; the run covers all segments.
    const RoundIndex len = to_int(value, key);
    if (len < 1) throw std::invalid_argument("segment_rounds must be positive");
    for (std::size_t g = 0; g < s.segments.size(); ++g) s.segments[g].start = static_cast<RoundIndex>(g) * len;
    s.rounds = static_cast<RoundIndex>(s.segments.size()) * len;
  } else if (key == "clear_targets") {
    if (to_bool(value, key)) s.segments.clear();
  } else {
    throw std::invalid_argument("unknown scenario key '" + key + "'");
  }
}

Scenario parse_scenario(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  // base, swarm size and seed first: they determine the generated geometry.
  std::string base;
  int n = 0, m = 1;
  std::uint64_t seed = 0;
  for (const auto& [k, v] : kv) {
    if (k == "base") base = v;
    if (k == "n_uavs") n = static_cast<int>(to_int(v, k));
    if (k == "n_cus") m = static_cast<int>(to_int(v, k));
    if (k == "seed") seed = static_cast<std::uint64_t>(to_int(v, k));
  }
  Scenario s;
  if (!base.empty()) {
    s = builtin_scenario(base, n, m, seed);
  } else {
    s.num_uavs = n;
    s.num_cus = m;
    s.seed = seed;
  }
  for (const auto& [k, v] : kv) {
    if (k == "base") continue;
    apply_setting(s, k, v);
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace mlr
