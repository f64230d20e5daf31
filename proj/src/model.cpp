#include "mfg/model.hpp"

#include <cmath>
#include <sstream>

namespace mfg {

namespace {

template <typename Table, typename Init>
Table make_table(const FiniteMFG& model, Init init) {
  Table table;
  table.steps.resize(static_cast<std::size_t>(model.num_steps()));
  for (int n = 0; n < model.num_steps(); ++n) {
    const int slots = model.nodes_at(n);
    auto& level = table.steps[static_cast<std::size_t>(n)];
    level.reserve(static_cast<std::size_t>(slots));
    for (int s = 0; s < slots; ++s) level.push_back(init());
  }
  return table;
}

}  // namespace

Matrix FiniteMFG::reward_matrix(const Vector& mu, int symbol) const {
  Matrix r = reward(mu, symbol);
  if (r.rows() != num_states || r.cols() != num_actions)
    throw ShapeError("reward callback returned a matrix of wrong shape");
  return r;
}

PolicyFlow PolicyFlow::uniform(const FiniteMFG& model) {
  const Scalar w = Scalar(1) / model.num_actions;
  return make_table<PolicyFlow>(
      model, [&] { return Matrix::Constant(model.num_states, model.num_actions, w); });
}

PolicyFlow PolicyFlow::zeros(const FiniteMFG& model) {
  return make_table<PolicyFlow>(model,
                                [&] { return Matrix::Zero(model.num_states, model.num_actions); });
}

DistributionFlow DistributionFlow::zeros(const FiniteMFG& model) {
  return make_table<DistributionFlow>(model, [&] { return Vector::Zero(model.num_states); });
}

bool DistributionFlow::fully_estimated() const {
  for (const auto& level : estimated)
    for (std::uint8_t e : level)
      if (!e) return false;
  return true;
}

QTable QTable::zeros(const FiniteMFG& model) {
  return make_table<QTable>(model,
                            [&] { return Matrix::Zero(model.num_states, model.num_actions); });
}

Vector values_under_policy(const Matrix& q, const Matrix& policy) {
  if (q.rows() != policy.rows() || q.cols() != policy.cols())
    throw ShapeError("values_under_policy: shape mismatch");
  return (q.array() * policy.array()).rowwise().sum();
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const Violation& v : violations) os << "violation [" << v.location << "] " << v.message << "\n";
  for (const Violation& w : warnings) os << "warning [" << w.location << "] " << w.message << "\n";
  return os.str();
}

namespace {

void check_tree(const NoiseTree& tree, ValidationReport& report) {
  if (tree.num_nodes() == 0) {
    report.violations.push_back({"noise_tree", "tree is empty"});
    return;
  }
  for (const NoiseNode& node : tree.nodes()) {
    if (node.children.empty()) continue;
    Scalar sum = 0;
    for (int kid : node.children) {
      const NoiseNode& child = tree.node(kid);
      sum += child.edge_prob;
      if (child.edge_prob < 0)
        report.violations.push_back({"noise_tree node " + std::to_string(kid),
                                     "negative edge probability"});
      if (child.symbol < 0 || child.symbol >= tree.num_symbols())
        report.violations.push_back({"noise_tree node " + std::to_string(kid),
                                     "edge symbol outside alphabet"});
    }
    if (std::abs(sum - 1) > kProbRowTol)
      report.violations.push_back({"noise_tree node " + std::to_string(node.id),
                                   "outgoing edge probabilities sum to " + std::to_string(sum)});
  }
  for (int d = 0; d <= tree.depth(); ++d) {
    Scalar mass = 0;
    for (int id : tree.level(d)) mass += tree.node(id).prob;
    if (std::abs(mass - 1) > kDepthMassTol)
      report.violations.push_back({"noise_tree depth " + std::to_string(d),
                                   "node probabilities sum to " + std::to_string(mass)});
  }
}

}  // namespace

ValidationReport validate_mfg(const FiniteMFG& model) {
  ValidationReport report;
  if (model.num_states < 1) report.violations.push_back({"states", "|X| must be >= 1"});
  if (model.num_actions < 1) report.violations.push_back({"actions", "|A| must be >= 1"});

  if (model.finite_horizon()) {
    if (model.horizon < 0) report.violations.push_back({"horizon", "N must be >= 0"});
  } else if (!(model.discount > 0 && model.discount < 1)) {
    report.violations.push_back({"discount", "gamma must lie in (0,1)"});
  }

  if (model.mu0.size() != model.num_states) {
    report.violations.push_back({"mu0", "size does not match |X|"});
  } else {
    Scalar sum = 0;
    for (int x = 0; x < model.num_states; ++x) {
      const Scalar m = model.mu0(x);
      if (m < 0)
        report.violations.push_back({"mu0 x=" + std::to_string(x), "negative entry"});
      sum += m;
    }
    if (std::abs(sum - 1) > kProbRowTol)
      report.violations.push_back({"mu0", "entries sum to " + std::to_string(sum)});
  }

  check_tree(model.noise_tree, report);
  if (model.finite_horizon() && model.noise_tree.depth() != model.horizon + 1)
    report.violations.push_back(
        {"noise_tree", "tree depth " + std::to_string(model.noise_tree.depth()) +
                           " does not equal N+1 = " + std::to_string(model.horizon + 1)});

  const int symbols = model.noise_tree.num_symbols();
  if (static_cast<int>(model.transition.size()) != symbols) {
    report.violations.push_back({"transition", "one kernel set per noise symbol required"});
  } else {
    for (int xi = 0; xi < symbols; ++xi) {
      const auto& per_action = model.transition[static_cast<std::size_t>(xi)];
      if (static_cast<int>(per_action.size()) != model.num_actions) {
        report.violations.push_back(
            {"transition xi=" + std::to_string(xi), "one kernel per action required"});
        continue;
      }
      for (int a = 0; a < model.num_actions; ++a) {
        const Kernel& kernel = per_action[static_cast<std::size_t>(a)];
        if (kernel.rows() != model.num_states || kernel.cols() != model.num_states) {
          report.violations.push_back({"transition (a=" + std::to_string(a) +
                                           ",xi=" + std::to_string(xi) + ")",
                                       "kernel is not |X| x |X|"});
          continue;
        }
        for (int x = 0; x < kernel.outerSize(); ++x) {
          Scalar sum = 0;
          bool negative = false;
          for (Kernel::InnerIterator it(kernel, x); it; ++it) {
            sum += it.value();
            negative = negative || it.value() < 0;
          }
          const std::string loc = "transition (x=" + std::to_string(x) +
                                  ",a=" + std::to_string(a) + ",xi=" + std::to_string(xi) + ")";
          if (negative) report.violations.push_back({loc, "negative probability"});
          if (std::abs(sum - 1) > kProbRowTol)
            report.violations.push_back({loc, "row sums to " + std::to_string(sum)});
        }
      }
    }
  }

  if (!model.reward) report.violations.push_back({"reward", "missing reward function"});

  for (const std::string& w : model.build_warnings)
    report.warnings.push_back({"builder", w});
  return report;
}

void check_policy_shape(const FiniteMFG& model, const PolicyFlow& policy) {
  if (static_cast<int>(policy.steps.size()) != model.num_steps())
    throw ShapeError("policy has " + std::to_string(policy.steps.size()) + " steps, model needs " +
                     std::to_string(model.num_steps()));
  for (int n = 0; n < model.num_steps(); ++n) {
    const auto& level = policy.steps[static_cast<std::size_t>(n)];
    if (static_cast<int>(level.size()) != model.nodes_at(n))
      throw ShapeError("policy level " + std::to_string(n) + " does not match the noise tree");
    for (const Matrix& slice : level)
      if (slice.rows() != model.num_states || slice.cols() != model.num_actions)
        throw ShapeError("policy slice shape mismatch at step " + std::to_string(n));
  }
}

void check_flow_shape(const FiniteMFG& model, const DistributionFlow& flow) {
  if (static_cast<int>(flow.steps.size()) != model.num_steps())
    throw ShapeError("flow has " + std::to_string(flow.steps.size()) + " steps, model needs " +
                     std::to_string(model.num_steps()));
  for (int n = 0; n < model.num_steps(); ++n) {
    const auto& level = flow.steps[static_cast<std::size_t>(n)];
    if (static_cast<int>(level.size()) != model.nodes_at(n))
      throw ShapeError("flow level " + std::to_string(n) + " does not match the noise tree");
    for (const Vector& slice : level)
      if (slice.size() != model.num_states)
        throw ShapeError("flow slice size mismatch at step " + std::to_string(n));
  }
}

void check_policy_rows(const PolicyFlow& policy) {
  for (std::size_t n = 0; n < policy.steps.size(); ++n) {
    for (std::size_t s = 0; s < policy.steps[n].size(); ++s) {
      const Matrix& slice = policy.steps[n][s];
      for (int x = 0; x < slice.rows(); ++x) {
        const Scalar sum = slice.row(x).sum();
        if (!std::isfinite(sum) || std::abs(sum - 1) > kProbRowTol ||
            (slice.row(x).array() < 0).any())
          throw std::invalid_argument("degenerate policy row at (n=" + std::to_string(n) +
                                      ",slot=" + std::to_string(s) + ",x=" + std::to_string(x) +
                                      ")");
      }
    }
  }
}

}  // namespace mfg
