#include "mfg/noise_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace mfg {

NoiseTree NoiseTree::degenerate(int depth) {
  return degenerate(depth, std::vector<int>(static_cast<std::size_t>(std::max(depth, 0)), 0));
}

NoiseTree NoiseTree::degenerate(int depth, const std::vector<int>& symbol_at) {
  if (depth < 0) throw std::invalid_argument("NoiseTree::degenerate: negative depth");
  if (static_cast<int>(symbol_at.size()) != depth)
    throw std::invalid_argument("NoiseTree::degenerate: one symbol per edge level required");
  NoiseTreeBuilder builder;
  int at = builder.root();
  int max_symbol = 0;
  for (int d = 0; d < depth; ++d) {
    at = builder.add_child(at, symbol_at[static_cast<std::size_t>(d)], 1.0);
    max_symbol = std::max(max_symbol, symbol_at[static_cast<std::size_t>(d)]);
  }
  return builder.finish(max_symbol + 1);
}

bool NoiseTree::is_degenerate() const {
  for (const NoiseNode& n : nodes_)
    if (n.children.size() > 1) return false;
  return true;
}

std::vector<std::pair<int, Scalar>> NoiseTree::enumerate_scenarios(int depth) const {
  if (depth < 0 || depth > this->depth())
    throw std::out_of_range("enumerate_scenarios: depth exceeds tree depth");
  std::vector<std::pair<int, Scalar>> out;
  for (int id : level(depth)) out.emplace_back(id, node(id).prob);
  return out;
}

NoiseTreeBuilder::NoiseTreeBuilder() { proto_.emplace_back(); }

int NoiseTreeBuilder::add_child(int parent, int symbol, Scalar edge_prob) {
  if (parent < 0 || parent >= static_cast<int>(proto_.size()))
    throw std::out_of_range("NoiseTreeBuilder: unknown parent");
  ProtoNode child;
  child.parent = parent;
  child.symbol = symbol;
  child.edge_prob = edge_prob;
  const int id = static_cast<int>(proto_.size());
  proto_.push_back(child);
  proto_[static_cast<std::size_t>(parent)].children.push_back(id);
  return id;
}

NoiseTree NoiseTreeBuilder::finish(int num_symbols) {
  NoiseTree tree;
  tree.num_symbols_ = num_symbols;
  tree.nodes_.reserve(proto_.size());

  // DFS preorder renumbering; children keep their insertion order.
  std::vector<int> new_id(proto_.size(), -1);
  std::vector<int> stack = {0};
  std::vector<int> order;
  order.reserve(proto_.size());
  while (!stack.empty()) {
    const int old = stack.back();
    stack.pop_back();
    new_id[static_cast<std::size_t>(old)] = static_cast<int>(order.size());
    order.push_back(old);
    const auto& kids = proto_[static_cast<std::size_t>(old)].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }

  for (int old : order) {
    const ProtoNode& p = proto_[static_cast<std::size_t>(old)];
    NoiseNode n;
    n.id = new_id[static_cast<std::size_t>(old)];
    n.parent = p.parent < 0 ? -1 : new_id[static_cast<std::size_t>(p.parent)];
    n.symbol = p.symbol;
    n.edge_prob = p.edge_prob;
    if (n.parent >= 0) {
      const NoiseNode& par = tree.nodes_[static_cast<std::size_t>(n.parent)];
      n.depth = par.depth + 1;
      n.prob = par.prob * n.edge_prob;
    }
    for (int kid : p.children) n.children.push_back(new_id[static_cast<std::size_t>(kid)]);
    if (n.depth >= static_cast<int>(tree.levels_.size())) tree.levels_.resize(n.depth + 1);
    n.slot = static_cast<int>(tree.levels_[static_cast<std::size_t>(n.depth)].size());
    tree.levels_[static_cast<std::size_t>(n.depth)].push_back(n.id);
    tree.nodes_.push_back(std::move(n));
  }
  return tree;
}

}  // namespace mfg
