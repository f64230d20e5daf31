#pragma once

#include <utility>
#include <vector>

#include "mfg/types.hpp"

namespace mfg {

/// One realized common-noise prefix. The edge from the parent is labeled with
/// the noise symbol drawn at step `depth-1`.
struct NoiseNode {
  int id = 0;
  int parent = -1;  // -1 for the root
  int depth = 0;
  int symbol = -1;        // edge label from parent; -1 for the root
  Scalar edge_prob = 1;   // P(symbol | parent prefix)
  Scalar prob = 1;        // P(prefix), chain rule
  int slot = 0;           // index of this node within its depth level
  std::vector<int> children;  // node ids, in symbol insertion order
};

/// Rooted scenario tree of common-noise realizations. Node ids are depth-first
/// (preorder) indices; flows and policies address depth levels through
/// `levels[depth]` and the per-node `slot`.
class NoiseTree {
 public:
  NoiseTree() = default;

  /// Single-branch tree: one child per node with probability 1. `depth` is the
  /// number of edge levels. `symbol_at` maps the step index to the edge symbol
  /// (defaults to symbol 0 everywhere).
  static NoiseTree degenerate(int depth);
  static NoiseTree degenerate(int depth, const std::vector<int>& symbol_at);

  const std::vector<NoiseNode>& nodes() const { return nodes_; }
  const NoiseNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::vector<std::vector<int>>& levels() const { return levels_; }
  const std::vector<int>& level(int depth) const {
    return levels_[static_cast<std::size_t>(depth)];
  }

  /// Number of edge levels (max node depth).
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_symbols() const { return num_symbols_; }
  bool is_degenerate() const;

  /// All nodes at `depth` with their chain-rule probabilities.
  std::vector<std::pair<int, Scalar>> enumerate_scenarios(int depth) const;

  friend class NoiseTreeBuilder;

 private:
  std::vector<NoiseNode> nodes_;
  std::vector<std::vector<int>> levels_;
  int num_symbols_ = 1;
};

/// Incremental construction; `finish()` renumbers nodes into DFS preorder and
/// computes chain-rule probabilities and level slots.
class NoiseTreeBuilder {
 public:
  NoiseTreeBuilder();

  /// Returns the id of the new child (builder-local until finish()).
  int add_child(int parent, int symbol, Scalar edge_prob);
  int root() const { return 0; }

  NoiseTree finish(int num_symbols);

 private:
  struct ProtoNode {
    int parent = -1;
    int symbol = -1;
    Scalar edge_prob = 1;
    std::vector<int> children;
  };
  std::vector<ProtoNode> proto_;
};

}  // namespace mfg
