#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfg/model.hpp"

namespace mfg {

/// Linear-quadratic game on a one dimensional grid: actions push the player
/// left or right, the reward tracks the population mean, and the
/// idiosyncratic noise is a 7-atom discretization of a standard normal.
struct LQParams {
  int num_states = 100;
  int horizon = 30;
  int action_bound = 37;  // actions take integer values in [-M, M]
  Scalar sigma = 3;
  Scalar delta_n = 0.1;
  Scalar drift_gain = 1;  // K
  Scalar q = 0.01;
  Scalar kappa = 0.5;
  Scalar c_term = 1;
  // Common-noise extension (build_lq_cn only).
  Scalar rho = 0.5;
  int cn_alphabet = 2;
  // Grid half-width L; 0 selects the default where one grid step equals
  // sigma * sqrt(delta_n) so the noise atoms land on exact grid moves.
  Scalar half_width = 0;

  int num_actions() const { return 2 * action_bound + 1; }
  Scalar grid_step() const;
  Scalar resolved_half_width() const;
  Scalar total_time() const { return horizon * delta_n; }
};

/// Grid point values for an LQ configuration.
Vector lq_grid(const LQParams& params);

FiniteMFG build_lq(const LQParams& params);
FiniteMFG build_lq_cn(const LQParams& params);

/// Closed-form solution of the LQ Riccati terminal-value problem
///   eta' = 2(K+q) eta + eta^2 - (kappa - q^2),  eta(T) = c_term.
Scalar lq_riccati_eta(Scalar t, const LQParams& params);

/// 4th-order Runge-Kutta backward integration of the same terminal-value
/// problem, evaluated at the step times n * delta_n. Cross-check companion to
/// the closed form.
std::vector<std::pair<Scalar, Scalar>> lq_riccati_ode(const LQParams& params,
                                                      Scalar step = 1e-4);

/// Benchmark policy: at (n, x) the grid action nearest to
/// (q + eta_{n delta}) (m_n - x), with m_n made self-consistent with the flow
/// the policy itself induces. Evaluated by the standard pipeline.
PolicyFlow lq_exact_policy(const LQParams& params);

/// Torus beach bar: three actions (left, still, right), a sticky idiosyncratic
/// noise, proximity reward toward the bar and a -log(mu) crowd penalty.
struct BeachBarParams {
  enum class CommonNoise { None, ClosureAtStep, ClosureWindow };

  int num_states = 100;
  int bar_position = -1;  // -1 selects the torus midpoint |X|/2
  int horizon = 15;
  std::optional<Scalar> discount;  // set for the gamma-discounted variant
  Scalar p_stay = 0.5;
  CommonNoise common_noise = CommonNoise::None;
  int closure_step = 15;   // ClosureAtStep: the single step at which the bar may close
  Scalar p_close = 0.5;    // closure probability (per step for ClosureWindow)
  Scalar crowd_clamp = 1e-12;
};

FiniteMFG build_beach_bar(const BeachBarParams& params);

/// 2D grid world with obstacles: a distribution of players is driven toward a
/// goal cell under a crowd-aversion penalty. Moves into walls resolve to stay.
struct MazeParams {
  int width = 100;
  int height = 100;
  int horizon = 150;
  std::pair<int, int> goal = {50, 50};
  std::pair<int, int> source = {5, 5};
  Scalar crowd_weight = 0.5;
  Scalar init_exponent = 10;
  Scalar dist_scale = 100;          // L1 normalizer in the distance reward
  Scalar init_scale = 0;            // 0 selects sqrt(2 * 95^2)
  Scalar crowd_clamp = 1e-12;
  // Obstacle mask rows of '.' (free) and '#' (wall); empty selects the named
  // default mask ("two_walls").
  std::vector<std::string> obstacle_mask;
};

FiniteMFG build_maze2d(const MazeParams& params);

/// The shipped default obstacle layout: two horizontal walls with gaps.
std::vector<std::string> default_maze_mask(int width, int height);

/// Parses a plain-text mask file: '.' free, '#' wall, row-major.
std::vector<std::string> load_maze_mask(const std::string& path);

/// Row-major free-cell indexing used by the maze builder; -1 marks obstacles.
std::vector<int> maze_state_index(const std::vector<std::string>& mask);

}  // namespace mfg
