#include "mfg/registry.hpp"

#include <stdexcept>

#include "mfg/environments.hpp"

namespace mfg {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json lq_defaults(int horizon) {
  return ordered_json{{"states", 100},     {"horizon", horizon}, {"action_bound", 37},
                      {"sigma", 3.0},      {"delta_n", 0.1},     {"drift_gain", 1.0},
                      {"q", 0.01},         {"kappa", 0.5},       {"c_term", 1.0},
                      {"half_width", 0.0}};
}

ordered_json beach_bar_defaults(int horizon) {
  return ordered_json{{"states", 100},   {"bar_position", 50}, {"horizon", horizon},
                      {"p_stay", 0.5},   {"crowd_clamp", 1e-12}};
}

ordered_json merge_params(const std::string& name, const ordered_json& defaults,
                          const json& overrides) {
  ordered_json merged = defaults;
  for (const auto& [key, value] : overrides.items()) {
    if (!merged.contains(key))
      throw std::invalid_argument("environment '" + name + "' has no parameter '" + key + "'");
    merged[key] = value;
  }
  return merged;
}

LQParams lq_params_from(const ordered_json& p) {
  LQParams out;
  out.num_states = p.at("states").get<int>();
  out.horizon = p.at("horizon").get<int>();
  out.action_bound = p.at("action_bound").get<int>();
  out.sigma = p.at("sigma").get<Scalar>();
  out.delta_n = p.at("delta_n").get<Scalar>();
  out.drift_gain = p.at("drift_gain").get<Scalar>();
  out.q = p.at("q").get<Scalar>();
  out.kappa = p.at("kappa").get<Scalar>();
  out.c_term = p.at("c_term").get<Scalar>();
  out.half_width = p.at("half_width").get<Scalar>();
  if (p.contains("rho")) out.rho = p.at("rho").get<Scalar>();
  if (p.contains("cn_alphabet")) out.cn_alphabet = p.at("cn_alphabet").get<int>();
  return out;
}

BeachBarParams beach_bar_params_from(const ordered_json& p) {
  BeachBarParams out;
  out.num_states = p.at("states").get<int>();
  out.bar_position = p.at("bar_position").get<int>();
  if (p.contains("horizon")) out.horizon = p.at("horizon").get<int>();
  if (p.contains("gamma")) out.discount = p.at("gamma").get<Scalar>();
  out.p_stay = p.at("p_stay").get<Scalar>();
  out.crowd_clamp = p.at("crowd_clamp").get<Scalar>();
  if (p.contains("closure_step")) out.closure_step = p.at("closure_step").get<int>();
  if (p.contains("p_close")) out.p_close = p.at("p_close").get<Scalar>();
  return out;
}

MazeParams maze_params_from(const ordered_json& p) {
  MazeParams out;
  out.width = p.at("width").get<int>();
  out.height = p.at("height").get<int>();
  out.horizon = p.at("horizon").get<int>();
  out.goal = {p.at("goal")[0].get<int>(), p.at("goal")[1].get<int>()};
  out.source = {p.at("source")[0].get<int>(), p.at("source")[1].get<int>()};
  out.crowd_weight = p.at("crowd_weight").get<Scalar>();
  out.init_exponent = p.at("init_exponent").get<Scalar>();
  out.dist_scale = p.at("dist_scale").get<Scalar>();
  out.crowd_clamp = p.at("crowd_clamp").get<Scalar>();
  if (!p.at("mask_file").get<std::string>().empty())
    out.obstacle_mask = load_maze_mask(p.at("mask_file").get<std::string>());
  else if (!p.at("mask").empty())
    out.obstacle_mask = p.at("mask").get<std::vector<std::string>>();
  return out;
}

}  // namespace

const std::vector<EnvironmentEntry>& environment_registry() {
  static const std::vector<EnvironmentEntry> registry = [] {
    std::vector<EnvironmentEntry> entries;

    entries.push_back({"lq", "linear-quadratic game on a 1d grid, mean-tracking reward",
                       lq_defaults(30)});

    ordered_json lq_cn = lq_defaults(8);
    lq_cn["rho"] = 0.5;
    lq_cn["cn_alphabet"] = 2;
    entries.push_back({"lq_cn",
                       "linear-quadratic game with a common noise scenario tree (rho-correlated)",
                       lq_cn});

    entries.push_back({"beach_bar", "torus beach bar with crowd aversion, finite horizon",
                       beach_bar_defaults(15)});

    ordered_json cn1 = beach_bar_defaults(30);
    cn1["closure_step"] = 15;
    cn1["p_close"] = 0.5;
    entries.push_back({"beach_bar_cn1",
                       "beach bar where the bar may close once at a fixed step", cn1});

    ordered_json cn2 = beach_bar_defaults(30);
    cn2["p_close"] = 0.5;
    entries.push_back({"beach_bar_cn2",
                       "beach bar where the bar may close at each of the first N/2 steps", cn2});

    ordered_json gamma = ordered_json{{"states", 100},   {"bar_position", 50}, {"gamma", 0.9},
                                      {"p_stay", 0.5},   {"crowd_clamp", 1e-12}};
    entries.push_back({"beach_bar_gamma", "discounted beach bar with occupancy-measure coupling",
                       gamma});

    ordered_json maze = ordered_json{{"width", 100},
                                     {"height", 100},
                                     {"horizon", 150},
                                     {"goal", {50, 50}},
                                     {"source", {5, 5}},
                                     {"crowd_weight", 0.5},
                                     {"init_exponent", 10.0},
                                     {"dist_scale", 100.0},
                                     {"crowd_clamp", 1e-12},
                                     {"mask_file", ""},
                                     {"mask", json::array()}};
    entries.push_back({"maze2d", "2d grid world with obstacles, crowd-averse goal seeking", maze});
    return entries;
  }();
  return registry;
}

FiniteMFG build_environment(const std::string& name, const nlohmann::json& params) {
  const EnvironmentEntry* entry = nullptr;
  for (const EnvironmentEntry& e : environment_registry())
    if (e.name == name) entry = &e;
  if (!entry) throw std::invalid_argument("unknown environment '" + name + "'");
  const ordered_json merged = merge_params(name, entry->defaults, params);

  if (name == "lq") return build_lq(lq_params_from(merged));
  if (name == "lq_cn") return build_lq_cn(lq_params_from(merged));
  if (name == "beach_bar") return build_beach_bar(beach_bar_params_from(merged));
  if (name == "beach_bar_cn1") {
    BeachBarParams p = beach_bar_params_from(merged);
    p.common_noise = BeachBarParams::CommonNoise::ClosureAtStep;
    return build_beach_bar(p);
  }
  if (name == "beach_bar_cn2") {
    BeachBarParams p = beach_bar_params_from(merged);
    p.common_noise = BeachBarParams::CommonNoise::ClosureWindow;
    return build_beach_bar(p);
  }
  if (name == "beach_bar_gamma") return build_beach_bar(beach_bar_params_from(merged));
  if (name == "maze2d") return build_maze2d(maze_params_from(merged));
  throw std::logic_error("registry entry without builder: " + name);
}

}  // namespace mfg
