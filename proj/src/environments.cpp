#include "mfg/environments.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <stdexcept>

#include "mfg/distribution.hpp"

namespace mfg {

namespace {

constexpr int kNoiseAtoms = 7;  // z in {-3,...,3}

/// Standard-normal weights over the 7 integer atoms, renormalized.
Vector normal_atom_weights(int count) {
  Vector w(count);
  for (int i = 0; i < count; ++i) {
    const Scalar z = count == 1 ? 0 : Scalar(-3) + Scalar(6) * i / (count - 1);
    w(i) = std::exp(-0.5 * z * z);
  }
  return w / w.sum();
}

Vector atom_values(int count) {
  Vector v(count);
  for (int i = 0; i < count; ++i)
    v(i) = count == 1 ? 0 : Scalar(-3) + Scalar(6) * i / (count - 1);
  return v;
}

Kernel kernel_from_triplets(int states, std::vector<Eigen::Triplet<Scalar>>& triplets) {
  Kernel k(states, states);
  k.setFromTriplets(triplets.begin(), triplets.end());
  k.makeCompressed();
  return k;
}

void validate_lq(const LQParams& p) {
  if (p.num_states < 3) throw std::invalid_argument("lq: |X| must be >= 3");
  if (p.horizon < 0) throw std::invalid_argument("lq: horizon must be >= 0");
  if (p.action_bound < 0) throw std::invalid_argument("lq: action bound must be >= 0");
  if (!(p.delta_n > 0)) throw std::invalid_argument("lq: delta_n must be positive");
  if (p.sigma < 0) throw std::invalid_argument("lq: sigma must be >= 0");
  if (p.q > p.kappa) throw std::invalid_argument("lq: q <= kappa required");
  if (p.rho < 0 || p.rho > 1) throw std::invalid_argument("lq: rho must lie in [0,1]");
}

/// Kernels for the LQ displacement x -> x + (K(c - x) + a) delta + shift + eps,
/// with eps the 7-atom idiosyncratic noise scaled by `idio_scale`, rounded to
/// the nearest grid point and clamped at the boundary. The mean-field drift is
/// frozen at the grid center c = 0: the kernel contract is per (x, a, xi),
/// so the population enters through the reward only.
std::vector<Kernel> lq_kernels(const LQParams& p, const Vector& grid, Scalar shift,
                               Scalar idio_scale) {
  const Scalar spacing = grid(1) - grid(0);
  const Vector weights = normal_atom_weights(kNoiseAtoms);
  const Vector atoms = atom_values(kNoiseAtoms);
  std::vector<Kernel> kernels;
  kernels.reserve(static_cast<std::size_t>(p.num_actions()));
  Vector row = Vector::Zero(p.num_states);
  for (int ai = 0; ai < p.num_actions(); ++ai) {
    const Scalar a_val = Scalar(ai - p.action_bound);
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (int x = 0; x < p.num_states; ++x) {
      const Scalar mean =
          grid(x) + (p.drift_gain * (0 - grid(x)) + a_val) * p.delta_n + shift;
      row.setZero();
      for (int j = 0; j < kNoiseAtoms; ++j) {
        const Scalar target = mean + atoms(j) * idio_scale;
        long idx = std::lround((target - grid(0)) / spacing);
        idx = std::clamp(idx, 0L, static_cast<long>(p.num_states - 1));
        row(static_cast<int>(idx)) += weights(j);
      }
      for (int x2 = 0; x2 < p.num_states; ++x2)
        if (row(x2) != 0) triplets.emplace_back(x, x2, row(x2));
    }
    kernels.push_back(kernel_from_triplets(p.num_states, triplets));
  }
  return kernels;
}

Vector lq_mu0(const LQParams& p, const Vector& grid) {
  // Two separated bell-shaped bumps around +-L/2.
  const Scalar l = p.resolved_half_width();
  const Scalar s = l / 8;
  Vector mu(p.num_states);
  for (int x = 0; x < p.num_states; ++x) {
    const Scalar d1 = grid(x) - l / 2;
    const Scalar d2 = grid(x) + l / 2;
    mu(x) = std::exp(-0.5 * d1 * d1 / (s * s)) + std::exp(-0.5 * d2 * d2 / (s * s));
  }
  return mu / mu.sum();
}

/// Reward shared by the plain and common-noise LQ variants. Symbols below
/// `terminal_offset` are running steps; the rest select the terminal cost.
RewardFn lq_reward(const LQParams& p, const Vector& grid, int terminal_offset) {
  const Scalar delta = p.delta_n;
  const Scalar q = p.q;
  const Scalar kappa = p.kappa;
  const Scalar c_term = p.c_term;
  const int actions = p.num_actions();
  const int bound = p.action_bound;
  return [=](const Vector& mu, int symbol) {
    const Scalar m = grid.dot(mu);
    const Vector dist = Vector::Constant(grid.size(), m) - grid;
    if (symbol >= terminal_offset) {
      const Vector terminal = (-0.5 * c_term * dist.array().square()).matrix();
      return Matrix(terminal.replicate(1, actions));
    }
    Matrix r(grid.size(), actions);
    for (int ai = 0; ai < actions; ++ai) {
      const Scalar a_val = Scalar(ai - bound);
      r.col(ai) = (delta * (-0.5 * a_val * a_val + (q * a_val) * dist.array() -
                            0.5 * kappa * dist.array().square()))
                      .matrix();
    }
    return r;
  };
}

}  // namespace

Scalar LQParams::grid_step() const { return sigma > 0 ? sigma * std::sqrt(delta_n) : Scalar(1); }

Scalar LQParams::resolved_half_width() const {
  return half_width > 0 ? half_width : grid_step() * (num_states - 1) / 2;
}

Vector lq_grid(const LQParams& params) {
  const Scalar l = params.resolved_half_width();
  const Scalar spacing = 2 * l / (params.num_states - 1);
  Vector grid(params.num_states);
  for (int x = 0; x < params.num_states; ++x) grid(x) = -l + spacing * x;
  return grid;
}

FiniteMFG build_lq(const LQParams& params) {
  validate_lq(params);
  const Vector grid = lq_grid(params);

  FiniteMFG model;
  model.name = "lq";
  model.num_states = params.num_states;
  model.num_actions = params.num_actions();
  model.mode = TimeMode::FiniteHorizon;
  model.horizon = params.horizon;
  model.mu0 = lq_mu0(params, grid);

  // Symbol 0 drives every running step, symbol 1 the terminal step; the
  // degenerate tree realizes the switch through its edge labels.
  std::vector<int> symbols(static_cast<std::size_t>(params.horizon) + 1, 0);
  symbols.back() = 1;
  model.noise_tree = NoiseTree::degenerate(params.horizon + 1, symbols);

  std::vector<Kernel> kernels =
      lq_kernels(params, grid, 0, params.sigma * std::sqrt(params.delta_n));
  model.transition.push_back(kernels);
  model.transition.push_back(std::move(kernels));
  model.reward = lq_reward(params, grid, 1);
  return model;
}

FiniteMFG build_lq_cn(const LQParams& params) {
  validate_lq(params);
  if (params.cn_alphabet < 2) throw std::invalid_argument("lq_cn: alphabet size must be >= 2");

  // Full product tree: sum of alphabet^d over node depths d = 0 .. N+1.
  double nodes = 1;
  double level = 1;
  for (int d = 1; d <= params.horizon + 1; ++d) {
    level *= params.cn_alphabet;
    nodes += level;
  }
  if (nodes > 100000)
    throw std::invalid_argument("lq_cn: scenario tree would hold " + std::to_string(nodes) +
                                " nodes, above the 100000-node bound for exact exploitability");

  const Vector grid = lq_grid(params);
  const int alphabet = params.cn_alphabet;

  Vector cn_values;
  Vector cn_weights;
  if (alphabet == 2) {
    cn_values = Vector(2);
    cn_values << -1, 1;
    cn_weights = Vector::Constant(2, 0.5);
  } else {
    cn_values = atom_values(alphabet);
    cn_weights = normal_atom_weights(alphabet);
  }

  FiniteMFG model;
  model.name = "lq_cn";
  model.num_states = params.num_states;
  model.num_actions = params.num_actions();
  model.mode = TimeMode::FiniteHorizon;
  model.horizon = params.horizon;
  model.mu0 = lq_mu0(params, grid);

  // Symbols [0, alphabet) are running noise atoms, [alphabet, 2*alphabet) the
  // terminal copies of the same atoms.
  NoiseTreeBuilder builder;
  std::vector<int> frontier = {builder.root()};
  for (int d = 0; d <= params.horizon; ++d) {
    std::vector<int> next;
    next.reserve(frontier.size() * static_cast<std::size_t>(alphabet));
    const int offset = d == params.horizon ? alphabet : 0;
    for (int node : frontier)
      for (int k = 0; k < alphabet; ++k)
        next.push_back(builder.add_child(node, offset + k, cn_weights(k)));
    frontier = std::move(next);
  }
  model.noise_tree = builder.finish(2 * alphabet);

  const Scalar idio = params.sigma * std::sqrt((1 - params.rho * params.rho) * params.delta_n);
  for (int k = 0; k < alphabet; ++k) {
    const Scalar shift = params.sigma * params.rho * cn_values(k) * std::sqrt(params.delta_n);
    model.transition.push_back(lq_kernels(params, grid, shift, idio));
  }
  // Terminal symbols reuse the running kernels; nothing is propagated past N.
  for (int k = 0; k < alphabet; ++k) model.transition.push_back(model.transition[static_cast<std::size_t>(k)]);

  model.reward = lq_reward(params, grid, alphabet);
  return model;
}

Scalar lq_riccati_eta(Scalar t, const LQParams& params) {
  const Scalar curvature = params.kappa - params.q * params.q;
  if (!(curvature > 0)) throw std::invalid_argument("lq_riccati_eta: kappa - q^2 must be positive");
  const Scalar horizon_time = params.total_time();
  if (t < 0 || t > horizon_time)
    throw std::invalid_argument("lq_riccati_eta: t must lie in [0, N*delta_n]");

  const Scalar b = params.drift_gain + params.q;
  const Scalar r = b * b + curvature;
  const Scalar root = std::sqrt(r);
  const Scalar delta_plus = -b + root;
  const Scalar delta_minus = -b - root;
  const Scalar e = std::exp((delta_plus - delta_minus) * (horizon_time - t));
  const Scalar c = params.c_term;
  const Scalar numerator = -curvature * (e - 1) - c * (delta_plus * e - delta_minus);
  const Scalar denominator = (delta_minus * e - delta_plus) - c * (e - 1);
  return numerator / denominator;
}

std::vector<std::pair<Scalar, Scalar>> lq_riccati_ode(const LQParams& params, Scalar step) {
  const Scalar curvature = params.kappa - params.q * params.q;
  if (!(curvature > 0)) throw std::invalid_argument("lq_riccati_ode: kappa - q^2 must be positive");
  const Scalar b = params.drift_gain + params.q;
  auto f = [&](Scalar eta) { return 2 * b * eta + eta * eta - curvature; };

  std::vector<std::pair<Scalar, Scalar>> out(static_cast<std::size_t>(params.horizon) + 1);
  Scalar t = params.total_time();
  Scalar eta = params.c_term;
  out[static_cast<std::size_t>(params.horizon)] = {t, eta};
  for (int n = params.horizon - 1; n >= 0; --n) {
    const Scalar t_target = n * params.delta_n;
    while (t > t_target + 1e-15) {
      const Scalar h = -std::min(step, t - t_target);
      const Scalar k1 = f(eta);
      const Scalar k2 = f(eta + 0.5 * h * k1);
      const Scalar k3 = f(eta + 0.5 * h * k2);
      const Scalar k4 = f(eta + h * k3);
      eta += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += h;
    }
    out[static_cast<std::size_t>(n)] = {t_target, eta};
  }
  return out;
}

PolicyFlow lq_exact_policy(const LQParams& params) {
  const FiniteMFG model = build_lq(params);
  const Vector grid = lq_grid(params);

  std::vector<Scalar> gain(static_cast<std::size_t>(params.horizon) + 1);
  for (int n = 0; n <= params.horizon; ++n)
    gain[static_cast<std::size_t>(n)] = params.q + lq_riccati_eta(n * params.delta_n, params);

  // m_n must be consistent with the flow the policy itself induces; a few
  // fixed-point sweeps suffice since the control is nearly linear in m.
  Vector mean_at = Vector::Constant(params.horizon + 1, grid.dot(model.mu0));
  PolicyFlow policy = PolicyFlow::zeros(model);
  for (int sweep = 0; sweep < 5; ++sweep) {
    for (int n = 0; n <= params.horizon; ++n) {
      Matrix& slice = policy.steps[static_cast<std::size_t>(n)][0];
      slice.setZero();
      for (int x = 0; x < params.num_states; ++x) {
        const Scalar a_star = gain[static_cast<std::size_t>(n)] * (mean_at(n) - grid(x));
        long a_idx = std::lround(a_star);
        a_idx = std::clamp(a_idx, static_cast<long>(-params.action_bound),
                           static_cast<long>(params.action_bound));
        slice(x, static_cast<int>(a_idx) + params.action_bound) = 1;
      }
    }
    const DistributionFlow flow = propagate_exact(model, policy);
    for (int n = 0; n <= params.horizon; ++n)
      mean_at(n) = grid.dot(flow.steps[static_cast<std::size_t>(n)][0]);
  }
  return policy;
}

namespace {

int torus_distance(int a, int b, int size) {
  const int d = std::abs(a - b);
  return std::min(d, size - d);
}

void validate_beach_bar(const BeachBarParams& p) {
  if (p.num_states < 1) throw std::invalid_argument("beach_bar: |X| must be >= 1");
  if (p.bar_position != -1 && (p.bar_position < 0 || p.bar_position >= p.num_states))
    throw std::invalid_argument("beach_bar: bar position outside the torus");
  if (p.p_stay < 0 || p.p_stay > 1)
    throw std::invalid_argument("beach_bar: p_stay must lie in [0,1]");
  if (p.p_close < 0 || p.p_close > 1)
    throw std::invalid_argument("beach_bar: p_close must lie in [0,1]");
  if (p.discount) {
    if (!(*p.discount > 0 && *p.discount < 1))
      throw std::invalid_argument("beach_bar: discount must lie in (0,1)");
    if (p.common_noise != BeachBarParams::CommonNoise::None)
      throw std::invalid_argument("beach_bar: the discounted variant has no common noise");
  } else if (p.horizon < 0) {
    throw std::invalid_argument("beach_bar: horizon must be >= 0");
  }
}

}  // namespace

FiniteMFG build_beach_bar(const BeachBarParams& params) {
  validate_beach_bar(params);
  const int states = params.num_states;
  const int bar = params.bar_position == -1 ? states / 2 : params.bar_position;
  const int kSymbolOpen = 0;
  const int kSymbolClosed = 1;
  const bool with_noise = params.common_noise != BeachBarParams::CommonNoise::None;

  FiniteMFG model;
  model.num_states = states;
  model.num_actions = 3;  // left, still, right
  if (params.discount) {
    model.mode = TimeMode::Discounted;
    model.discount = *params.discount;
    model.name = "beach_bar_gamma";
    model.noise_tree = NoiseTree::degenerate(1);
  } else {
    model.mode = TimeMode::FiniteHorizon;
    model.horizon = params.horizon;
    switch (params.common_noise) {
      case BeachBarParams::CommonNoise::None:
        model.name = "beach_bar";
        model.noise_tree = NoiseTree::degenerate(params.horizon + 1);
        break;
      case BeachBarParams::CommonNoise::ClosureAtStep: {
        model.name = "beach_bar_cn1";
        if (params.closure_step < 0 || params.closure_step > params.horizon)
          throw std::invalid_argument("beach_bar: closure step outside the horizon");
        NoiseTreeBuilder builder;
        int open_at = builder.root();
        int closed_at = -1;
        for (int d = 0; d <= params.horizon; ++d) {
          if (d == params.closure_step) {
            closed_at = builder.add_child(open_at, kSymbolClosed, params.p_close);
            open_at = builder.add_child(open_at, kSymbolOpen, 1 - params.p_close);
          } else {
            open_at = builder.add_child(open_at, kSymbolOpen, 1.0);
            if (closed_at >= 0) closed_at = builder.add_child(closed_at, kSymbolClosed, 1.0);
          }
        }
        model.noise_tree = builder.finish(2);
        break;
      }
      case BeachBarParams::CommonNoise::ClosureWindow: {
        model.name = "beach_bar_cn2";
        // The bar may close at each of the first N/2 steps; once closed it
        // stays closed, giving N/2 + 1 scenario leaves.
        const int window = params.horizon / 2;
        NoiseTreeBuilder builder;
        int open_at = builder.root();
        std::vector<int> closed_frontier;
        for (int d = 0; d <= params.horizon; ++d) {
          for (int& node : closed_frontier) node = builder.add_child(node, kSymbolClosed, 1.0);
          if (d < window) {
            closed_frontier.push_back(builder.add_child(open_at, kSymbolClosed, params.p_close));
            open_at = builder.add_child(open_at, kSymbolOpen, 1 - params.p_close);
          } else {
            open_at = builder.add_child(open_at, kSymbolOpen, 1.0);
          }
        }
        model.noise_tree = builder.finish(2);
        break;
      }
    }
  }

  // mu0 uniform on the torus.
  model.mu0 = Vector::Constant(states, Scalar(1) / states);

  // Dynamics x' = x + b(a) + eps on the torus, identical across symbols.
  const Scalar p_move = (1 - params.p_stay) / 2;
  std::vector<Kernel> kernels;
  for (int a = 0; a < 3; ++a) {
    const int b = a - 1;  // left, still, right
    std::vector<Eigen::Triplet<Scalar>> triplets;
    Vector row = Vector::Zero(states);
    for (int x = 0; x < states; ++x) {
      row.setZero();
      const int base = x + b;
      row(((base - 1) % states + states) % states) += p_move;
      row((base % states + states) % states) += params.p_stay;
      row(((base + 1) % states + states) % states) += p_move;
      for (int x2 = 0; x2 < states; ++x2)
        if (row(x2) != 0) triplets.emplace_back(x, x2, row(x2));
    }
    kernels.push_back(kernel_from_triplets(states, triplets));
  }
  model.transition.push_back(kernels);
  if (with_noise) model.transition.push_back(std::move(kernels));

  // Proximity term decreasing in the torus distance to the bar; the closed
  // symbol drops it. Crowd aversion is -log(mu) with a floor so empirical
  // flows with exact zeros stay finite.
  Vector proximity(states);
  for (int x = 0; x < states; ++x)
    proximity(x) = 1 - Scalar(torus_distance(x, bar, states)) / states;
  Vector action_cost(3);
  action_cost << Scalar(1) / states, 0, Scalar(1) / states;
  const Scalar clamp = params.crowd_clamp;

  auto crowd = [clamp](const Vector& mu) {
    return (-mu.array().max(clamp).log()).matrix().eval();
  };
  model.reward = [=](const Vector& mu, int symbol) {
    const Vector aversion = crowd(mu);
    Matrix r(mu.size(), 3);
    for (int a = 0; a < 3; ++a) {
      r.col(a) = (aversion.array() - action_cost(a)).matrix();
      if (symbol == kSymbolOpen) r.col(a) += proximity;
    }
    return r;
  };

  MonotoneDecomposition decomposition;
  for (int symbol = 0; symbol < (with_noise ? 2 : 1); ++symbol) {
    Matrix tilde(states, 3);
    for (int a = 0; a < 3; ++a) {
      tilde.col(a).setConstant(-action_cost(a));
      if (symbol == kSymbolOpen) tilde.col(a) += proximity;
    }
    decomposition.tilde.push_back(std::move(tilde));
  }
  decomposition.crowd = crowd;
  model.monotone = std::move(decomposition);
  return model;
}

std::vector<std::string> default_maze_mask(int width, int height) {
  std::vector<std::string> mask(static_cast<std::size_t>(height),
                                std::string(static_cast<std::size_t>(width), '.'));
  auto wall = [&](int row, int gap_from, int gap_to) {
    if (row >= height) return;
    for (int j = 0; j < width; ++j)
      if (j < gap_from || j > gap_to) mask[static_cast<std::size_t>(row)][static_cast<std::size_t>(j)] = '#';
  };
  wall(height * 3 / 10, width * 6 / 10, width * 7 / 10 - 1);
  wall(height * 6 / 10, width * 3 / 10, width * 4 / 10 - 1);
  return mask;
}

std::vector<std::string> load_maze_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open maze mask file: " + path);
  std::vector<std::string> mask;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) mask.push_back(line);
  }
  return mask;
}

std::vector<int> maze_state_index(const std::vector<std::string>& mask) {
  std::vector<int> index;
  int next = 0;
  for (const std::string& row : mask)
    for (char c : row) index.push_back(c == '#' ? -1 : next++);
  return index;
}

FiniteMFG build_maze2d(const MazeParams& params) {
  if (params.width < 1 || params.height < 1)
    throw std::invalid_argument("maze2d: grid must be non-empty");
  if (params.horizon < 0) throw std::invalid_argument("maze2d: horizon must be >= 0");

  const std::vector<std::string> mask =
      params.obstacle_mask.empty() ? default_maze_mask(params.width, params.height)
                                   : params.obstacle_mask;
  if (static_cast<int>(mask.size()) != params.height)
    throw std::invalid_argument("maze2d: mask row count does not match the height");
  for (const std::string& row : mask)
    if (static_cast<int>(row.size()) != params.width)
      throw std::invalid_argument("maze2d: mask row width mismatch");

  auto is_free = [&](int i, int j) {
    return i >= 0 && i < params.height && j >= 0 && j < params.width &&
           mask[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != '#';
  };
  const auto [goal_i, goal_j] = params.goal;
  if (!is_free(goal_i, goal_j)) throw std::invalid_argument("maze2d: goal lies on an obstacle");

  const std::vector<int> index = maze_state_index(mask);
  auto state_of = [&](int i, int j) { return index[static_cast<std::size_t>(i) * params.width + j]; };
  int states = 0;
  for (int v : index) states = std::max(states, v + 1);

  std::vector<std::pair<int, int>> cell_of(static_cast<std::size_t>(states));
  for (int i = 0; i < params.height; ++i)
    for (int j = 0; j < params.width; ++j)
      if (state_of(i, j) >= 0) cell_of[static_cast<std::size_t>(state_of(i, j))] = {i, j};

  FiniteMFG model;
  model.name = "maze2d";
  model.num_states = states;
  model.num_actions = 5;  // up, down, left, right, stay
  model.mode = TimeMode::FiniteHorizon;
  model.horizon = params.horizon;
  model.noise_tree = NoiseTree::degenerate(params.horizon + 1);

  const int di[5] = {-1, 1, 0, 0, 0};
  const int dj[5] = {0, 0, -1, 1, 0};
  std::vector<Kernel> kernels;
  for (int a = 0; a < 5; ++a) {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (int x = 0; x < states; ++x) {
      const auto [i, j] = cell_of[static_cast<std::size_t>(x)];
      const int ti = i + di[a];
      const int tj = j + dj[a];
      const int target = is_free(ti, tj) ? state_of(ti, tj) : x;  // blocked moves stay
      triplets.emplace_back(x, target, 1.0);
    }
    kernels.push_back(kernel_from_triplets(states, triplets));
  }
  model.transition.push_back(std::move(kernels));

  // Initial mass around the source, null on obstacles.
  const Scalar init_scale =
      params.init_scale > 0 ? params.init_scale : std::sqrt(Scalar(2) * 95 * 95);
  Vector mu0(states);
  for (int x = 0; x < states; ++x) {
    const auto [i, j] = cell_of[static_cast<std::size_t>(x)];
    const Scalar d = std::hypot(Scalar(i - params.source.first), Scalar(j - params.source.second));
    mu0(x) = std::pow(std::max<Scalar>(0, 1 - d / init_scale), params.init_exponent);
  }
  const Scalar mass = mu0.sum();
  if (!(mass > 0)) throw std::invalid_argument("maze2d: initial distribution has no mass");
  model.mu0 = mu0 / mass;

  Vector distance_term(states);
  for (int x = 0; x < states; ++x) {
    const auto [i, j] = cell_of[static_cast<std::size_t>(x)];
    const Scalar l1 = std::abs(i - goal_i) + std::abs(j - goal_j);
    distance_term(x) = 10 * (1 - l1 / params.dist_scale);
  }

  const Scalar weight = params.crowd_weight;
  const Scalar clamp = params.crowd_clamp;
  auto crowd = [weight, clamp](const Vector& mu) {
    return (-weight * mu.array().max(clamp).log()).matrix().eval();
  };
  model.reward = [distance_term, crowd](const Vector& mu, int) {
    const Vector per_state = distance_term + crowd(mu);
    return Matrix(per_state.replicate(1, 5));
  };

  MonotoneDecomposition decomposition;
  decomposition.tilde.push_back(Matrix(distance_term.replicate(1, 5)));
  decomposition.crowd = crowd;
  model.monotone = std::move(decomposition);

  // Flag free-cell components that hold initial mass but cannot reach the
  // goal component.
  std::vector<char> reached(static_cast<std::size_t>(states), 0);
  std::deque<int> queue = {state_of(goal_i, goal_j)};
  reached[static_cast<std::size_t>(queue.front())] = 1;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    const auto [i, j] = cell_of[static_cast<std::size_t>(x)];
    for (int a = 0; a < 4; ++a) {
      const int ti = i + di[a];
      const int tj = j + dj[a];
      if (!is_free(ti, tj)) continue;
      const int y = state_of(ti, tj);
      if (!reached[static_cast<std::size_t>(y)]) {
        reached[static_cast<std::size_t>(y)] = 1;
        queue.push_back(y);
      }
    }
  }
  Scalar stranded = 0;
  for (int x = 0; x < states; ++x)
    if (!reached[static_cast<std::size_t>(x)]) stranded += model.mu0(x);
  if (stranded > 0)
    model.build_warnings.push_back(
        "initial mass " + std::to_string(stranded) +
        " lies in a free-cell region disconnected from the goal");
  return model;
}

}  // namespace mfg
