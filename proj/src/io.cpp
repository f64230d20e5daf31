#include "mfg/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mfg/registry.hpp"

namespace mfg {

std::string format_double(Scalar v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

std::string flow_csv(const FiniteMFG& model, const DistributionFlow& flow) {
  std::ostringstream os;
  os << "n,node_id,state,mass\n";
  for (std::size_t n = 0; n < flow.steps.size(); ++n) {
    const auto& level = model.noise_tree.level(static_cast<int>(n));
    for (std::size_t s = 0; s < flow.steps[n].size(); ++s) {
      const Vector& slice = flow.steps[n][s];
      for (int x = 0; x < slice.size(); ++x)
        os << n << ',' << level[s] << ',' << x << ',' << format_double(slice(x)) << '\n';
    }
  }
  return os.str();
}

std::string qtable_csv(const FiniteMFG& model, const QTable& q) {
  std::ostringstream os;
  os << "n,node_id,state,action,q\n";
  for (std::size_t n = 0; n < q.steps.size(); ++n) {
    const auto& level = model.noise_tree.level(static_cast<int>(n));
    for (std::size_t s = 0; s < q.steps[n].size(); ++s) {
      const Matrix& slice = q.steps[n][s];
      for (int x = 0; x < slice.rows(); ++x)
        for (int a = 0; a < slice.cols(); ++a)
          os << n << ',' << level[s] << ',' << x << ',' << a << ','
             << format_double(slice(x, a)) << '\n';
    }
  }
  return os.str();
}

std::string exploitability_csv(const std::vector<FPTracePoint>& trace) {
  bool with_proxy = false;
  for (const FPTracePoint& p : trace) with_proxy = with_proxy || p.phi_proxy.has_value();
  std::ostringstream os;
  os << "iteration,exploitability,wallclock_s";
  if (with_proxy) os << ",exploitability_proxy";
  os << '\n';
  for (const FPTracePoint& p : trace) {
    os << p.iteration << ',' << format_double(p.phi) << ',' << format_double(p.wallclock_s);
    if (with_proxy) os << ',' << (p.phi_proxy ? format_double(*p.phi_proxy) : "");
    os << '\n';
  }
  return os.str();
}

nlohmann::ordered_json monotonicity_report_json(const MonotonicityReport& report) {
  nlohmann::ordered_json j;
  j["trials"] = report.trials;
  j["max_value"] = report.max_value;
  j["argmax_trial"] = report.argmax_trial;
  j["violated"] = report.violated;
  j["tolerance"] = report.tolerance;
  j["witness_mu"] = std::vector<Scalar>(report.witness_mu.begin(), report.witness_mu.end());
  j["witness_mu_prime"] =
      std::vector<Scalar>(report.witness_mu_prime.begin(), report.witness_mu_prime.end());
  return j;
}

nlohmann::ordered_json residual_report_json(const ResidualReport& report) {
  nlohmann::ordered_json j;
  j["sup_norm"] = report.sup_norm;
  j["weighted_norm"] = report.weighted_norm;
  j["argmax"] = {{"n", report.argmax_step}, {"state", report.argmax_state}};
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const Vector& r : report.residual)
    rows.push_back(std::vector<Scalar>(r.begin(), r.end()));
  j["residual"] = rows;
  return j;
}

namespace {

using nlohmann::json;

[[noreturn]] void model_error(const std::string& message) {
  throw std::invalid_argument("model description: " + message);
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) model_error(what + " must be an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<Scalar>();
  return v;
}

void tree_from_json(const json& node, NoiseTreeBuilder& builder, int parent, int& max_symbol) {
  if (!node.contains("children")) return;
  for (const json& child : node.at("children")) {
    const int symbol = child.at("symbol").get<int>();
    const Scalar prob = child.at("prob").get<Scalar>();
    max_symbol = std::max(max_symbol, symbol);
    const int id = builder.add_child(parent, symbol, prob);
    tree_from_json(child, builder, id, max_symbol);
  }
}

RewardFn reward_from_json(const json& spec, int states, int actions, FiniteMFG& model) {
  const std::string name = spec.at("name").get<std::string>();
  const json params = spec.value("params", json::object());
  if (name == "zero") {
    return [states, actions](const Vector&, int) { return Matrix::Zero(states, actions); };
  }
  if (name == "table" || name == "table_plus_log_crowd") {
    const json& values = params.at("values");
    if (static_cast<int>(values.size()) != states) model_error("reward table needs |X| rows");
    Matrix table(states, actions);
    for (int x = 0; x < states; ++x) {
      if (static_cast<int>(values[static_cast<std::size_t>(x)].size()) != actions)
        model_error("reward table rows must have |A| entries");
      for (int a = 0; a < actions; ++a)
        table(x, a) = values[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)].get<Scalar>();
    }
    if (name == "table") {
      return [table](const Vector&, int) { return table; };
    }
    const Scalar weight = params.value("weight", Scalar(1));
    const Scalar clamp = params.value("clamp", Scalar(1e-12));
    auto crowd = [weight, clamp](const Vector& mu) {
      return Vector((-weight * mu.array().max(clamp).log()).matrix());
    };
    MonotoneDecomposition decomposition;
    decomposition.tilde.assign(static_cast<std::size_t>(model.noise_tree.num_symbols()), table);
    decomposition.crowd = crowd;
    model.monotone = std::move(decomposition);
    return [table, crowd](const Vector& mu, int) {
      Matrix r = table;
      r.colwise() += crowd(mu);
      return r;
    };
  }
  model_error("unknown reward builtin '" + name + "'");
}

}  // namespace

FiniteMFG model_from_json(const nlohmann::json& j) {
  if (j.contains("env"))
    return build_environment(j.at("env").get<std::string>(), j.value("env_params", json::object()));

  FiniteMFG model;
  model.name = j.value("name", std::string("custom"));
  model.num_states = j.at("states").get<int>();
  model.num_actions = j.at("actions").get<int>();
  if (j.contains("horizon") == j.contains("discount"))
    model_error("exactly one of horizon / discount must be set");
  if (j.contains("horizon")) {
    model.mode = TimeMode::FiniteHorizon;
    model.horizon = j.at("horizon").get<int>();
  } else {
    model.mode = TimeMode::Discounted;
    model.discount = j.at("discount").get<Scalar>();
  }
  model.mu0 = vector_from_json(j.at("mu0"), "mu0");

  if (j.contains("noise_tree")) {
    NoiseTreeBuilder builder;
    int max_symbol = 0;
    tree_from_json(j.at("noise_tree"), builder, builder.root(), max_symbol);
    model.noise_tree = builder.finish(max_symbol + 1);
  } else {
    model.noise_tree =
        NoiseTree::degenerate(model.finite_horizon() ? model.horizon + 1 : 1);
  }

  const json& transition = j.at("transition");
  if (!transition.is_array() || transition.empty()) model_error("transition must be a dense array");
  // Either [x][a][x'] (single symbol) or [xi][x][a][x'].
  const bool per_symbol = transition[0].size() > 0 && transition[0][0].size() > 0 &&
                          transition[0][0][0].is_array();
  const int symbols = model.noise_tree.num_symbols();
  model.transition.resize(static_cast<std::size_t>(symbols));
  for (int xi = 0; xi < symbols; ++xi) {
    const json& block = per_symbol ? transition[static_cast<std::size_t>(xi)] : transition;
    if (per_symbol && static_cast<int>(transition.size()) != symbols)
      model_error("transition needs one block per noise symbol");
    auto& kernels = model.transition[static_cast<std::size_t>(xi)];
    for (int a = 0; a < model.num_actions; ++a) {
      std::vector<Eigen::Triplet<Scalar>> triplets;
      for (int x = 0; x < model.num_states; ++x) {
        const json& row = block[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
        if (static_cast<int>(row.size()) != model.num_states)
          model_error("transition rows must have |X| entries");
        for (int y = 0; y < model.num_states; ++y) {
          const Scalar p = row[static_cast<std::size_t>(y)].get<Scalar>();
          if (p != 0) triplets.emplace_back(x, y, p);
        }
      }
      Kernel k(model.num_states, model.num_states);
      k.setFromTriplets(triplets.begin(), triplets.end());
      k.makeCompressed();
      kernels.push_back(std::move(k));
    }
  }

  model.reward = reward_from_json(j.at("reward"), model.num_states, model.num_actions, model);
  return model;
}

FiniteMFG load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace mfg
