#include "spinal/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace spinal {

using nlohmann::json;
using grp::ConfigError;

RunConfig::RunConfig() {
  knee.layers = 3;
  apply_seeds();
}

void RunConfig::apply_seeds() {
  hip.seed = seeds.init;
  knee.seed = seeds.init + 1;
}

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, key + ": " + what);
}

// A section is a table of key -> reader; anything else in the object is an
// unknown key.
using Reader = std::function<void(const json&, const std::string&)>;

void read_section(const json& obj, const std::string& prefix,
                  const std::map<std::string, Reader>& readers) {
  require(obj.is_object(), prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [name, value] : obj.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    const auto it = readers.find(name);
    require(it != readers.end(), key, "unknown key");
    it->second(value, key);
  }
}

Reader real(double& out) {
  return [&out](const json& v, const std::string& key) {
    require(v.is_number(), key, "expected a number");
    out = v.get<double>();
    require(std::isfinite(out), key, "must be finite");
  };
}

Reader degrees(double& out) {
  return [&out](const json& v, const std::string& key) {
    double deg = 0.0;
    real(deg)(v, key);
    out = dynamics::deg2rad(deg);
  };
}

Reader integer(int& out) {
  return [&out](const json& v, const std::string& key) {
    require(v.is_number_integer(), key, "expected an integer");
    const auto n = v.get<std::int64_t>();
    require(n >= INT32_MIN && n <= INT32_MAX, key, "out of range");
    out = static_cast<int>(n);
  };
}

Reader unsigned64(std::uint64_t& out) {
  return [&out](const json& v, const std::string& key) {
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), key,
            "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  };
}

std::map<std::string, Reader> grp_readers(grp::GrpConfig& c) {
  return {{"layers", integer(c.layers)}, {"mu", real(c.mu)},
          {"lambda", real(c.lambda)},    {"gamma0", real(c.gamma0)},
          {"beta", real(c.beta)},        {"w_gain", real(c.w_gain)},
          {"init_scale", real(c.init_scale)}};
}

json grp_json(const grp::GrpConfig& c) {
  return {{"layers", c.layers}, {"mu", c.mu},         {"lambda", c.lambda},
          {"gamma0", c.gamma0}, {"beta", c.beta},     {"w_gain", c.w_gain},
          {"init_scale", c.init_scale}};
}

void validate_grp(const grp::GrpConfig& c, const std::string& prefix) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + "." + e.key(), prefix + "." + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  const auto& p = sim.params;
  require(p.l_t > 0, "physics.l_t", "must be positive");
  require(p.l_s > 0, "physics.l_s", "must be positive");
  require(p.m_t > 0, "physics.m_t", "must be positive");
  require(p.m_s > 0, "physics.m_s", "must be positive");
  require(p.g >= 0, "physics.g", "must be non-negative");
  require(std::abs(p.l_0 - (p.l_t + p.l_s)) <= 1e-12, "physics.l_0", "must equal l_t + l_s");
  require(sim.dt > 0, "physics.dt", "must be positive");
  require(sim.timeout >= sim.dt, "physics.timeout", "must be at least one step");
  require(sim.gains.alpha_dot_max > 0, "controller.alpha_dot_max", "must be positive");
  require(ranges.alpha_tgt_min <= ranges.alpha_tgt_max, "tasks.alpha_tgt_max_deg",
          "must not be below alpha_tgt_min_deg");
  require(ranges.phi_h_dot0_min <= ranges.phi_h_dot0_max, "tasks.phi_h_dot0_max",
          "must not be below phi_h_dot0_min");
  require(ranges.phi_k_dot0_min <= ranges.phi_k_dot0_max, "tasks.phi_k_dot0_max",
          "must not be below phi_k_dot0_min");
  require(ranges.phi_k0 > 0 && ranges.phi_k0 <= std::numbers::pi, "tasks.phi_k0_deg",
          "must lie in (0, 180]");
  require(ranges.l_clr > 0 && ranges.l_clr < p.l_0, "tasks.l_clr", "must lie in (0, l_0)");
  validate_grp(hip, "hip");
  validate_grp(knee, "knee");
  require(episodes >= 1, "training.episodes", "must be at least 1");
  require(demos >= 1, "training.demos", "must be at least 1");
  require(eval_trajectories >= 1, "evaluation.trajectories", "must be at least 1");
  require(active_threshold > 0 && active_threshold <= 1, "evaluation.active_threshold",
          "must lie in (0, 1]");
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("<root>: malformed JSON: ") + e.what());
  }
  RunConfig c;
  auto& p = c.sim.params;
  auto& g = c.sim.gains;
  auto& r = c.ranges;
  auto& s = c.seeds;
  auto section = [](std::map<std::string, Reader> readers) {
    return [readers = std::move(readers)](const json& v, const std::string& key) {
      read_section(v, key, readers);
    };
  };
  read_section(
      doc, "",
      {{"physics", section({{"l_t", real(p.l_t)},
                            {"l_s", real(p.l_s)},
                            {"m_t", real(p.m_t)},
                            {"m_s", real(p.m_s)},
                            {"g", real(p.g)},
                            {"l_0", real(p.l_0)},
                            {"dt", real(c.sim.dt)},
                            {"timeout", real(c.sim.timeout)}})},
       {"controller", section({{"k_p_alpha", real(g.k_p_alpha)},
                               {"k_d_alpha", real(g.k_d_alpha)},
                               {"k_i", real(g.k_i)},
                               {"k_ii", real(g.k_ii)},
                               {"k_stp", real(g.k_stp)},
                               {"k_ext", real(g.k_ext)},
                               {"alpha_dot_max", real(g.alpha_dot_max)},
                               {"delta_alpha_thr_deg", degrees(g.delta_alpha_thr)}})},
       {"tasks", section({{"alpha_tgt_min_deg", degrees(r.alpha_tgt_min)},
                          {"alpha_tgt_max_deg", degrees(r.alpha_tgt_max)},
                          {"phi_h_dot0_min", real(r.phi_h_dot0_min)},
                          {"phi_h_dot0_max", real(r.phi_h_dot0_max)},
                          {"phi_k_dot0_min", real(r.phi_k_dot0_min)},
                          {"phi_k_dot0_max", real(r.phi_k_dot0_max)},
                          {"phi_h0_deg", degrees(r.phi_h0)},
                          {"phi_k0_deg", degrees(r.phi_k0)},
                          {"l_clr", real(r.l_clr)}})},
       {"hip", section(grp_readers(c.hip))},
       {"knee", section(grp_readers(c.knee))},
       {"training", section({{"episodes", integer(c.episodes)}, {"demos", integer(c.demos)}})},
       {"evaluation", section({{"trajectories", integer(c.eval_trajectories)},
                               {"active_threshold", real(c.active_threshold)}})},
       {"seeds", section({{"demo", unsigned64(s.demo)},
                          {"init", unsigned64(s.init)},
                          {"eval", unsigned64(s.eval)}})}});
  c.apply_seeds();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& c) {
  const auto& p = c.sim.params;
  const auto& g = c.sim.gains;
  const auto& r = c.ranges;
  using dynamics::rad2deg;
  json doc = {
      {"physics",
       {{"l_t", p.l_t}, {"l_s", p.l_s}, {"m_t", p.m_t}, {"m_s", p.m_s}, {"g", p.g},
        {"l_0", p.l_0}, {"dt", c.sim.dt}, {"timeout", c.sim.timeout}}},
      {"controller",
       {{"k_p_alpha", g.k_p_alpha}, {"k_d_alpha", g.k_d_alpha}, {"k_i", g.k_i},
        {"k_ii", g.k_ii}, {"k_stp", g.k_stp}, {"k_ext", g.k_ext},
        {"alpha_dot_max", g.alpha_dot_max}, {"delta_alpha_thr_deg", rad2deg(g.delta_alpha_thr)}}},
      {"tasks",
       {{"alpha_tgt_min_deg", rad2deg(r.alpha_tgt_min)}, {"alpha_tgt_max_deg", rad2deg(r.alpha_tgt_max)},
        {"phi_h_dot0_min", r.phi_h_dot0_min}, {"phi_h_dot0_max", r.phi_h_dot0_max},
        {"phi_k_dot0_min", r.phi_k_dot0_min}, {"phi_k_dot0_max", r.phi_k_dot0_max},
        {"phi_h0_deg", rad2deg(r.phi_h0)}, {"phi_k0_deg", rad2deg(r.phi_k0)}, {"l_clr", r.l_clr}}},
      {"hip", grp_json(c.hip)},
      {"knee", grp_json(c.knee)},
      {"training", {{"episodes", c.episodes}, {"demos", c.demos}}},
      {"evaluation",
       {{"trajectories", c.eval_trajectories}, {"active_threshold", c.active_threshold}}},
      {"seeds", {{"demo", c.seeds.demo}, {"init", c.seeds.init}, {"eval", c.seeds.eval}}}};
  return doc.dump(2) + "\n";
}

}  // namespace spinal
