#pragma once

// Single-player PUCT search. Leaves are valued by the evaluator; terminal
// positions are valued by their ranked reward against a frozen snapshot of
// the recent scores. Values are never negated on the way up.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "morpion/core.hpp"
#include "morpion/encoding.hpp"
#include "morpion/random.hpp"
#include "morpion/ranked_reward.hpp"
#include "morpion/record.hpp"

namespace morpion {

template <typename E>
concept Evaluator = requires(const E& e, const BoardState& b) {
  { e.evaluate(b) } -> std::convertible_to<Evaluation>;
};

struct SearchParams {
  int simulations = 20000;
  double c_puct = 1.0;
  // Optional root exploration noise; off unless asked for.
  bool dirichlet = false;
  double dirichlet_alpha = 0.3;
  double dirichlet_weight = 0.25;

  bool valid() const { return simulations >= 1 && c_puct >= 0.0; }
};

class TerminalRoot : public Error {
 public:
  TerminalRoot() : Error("search root has no legal moves") {}
};

struct SearchNode {
  std::vector<Move> moves;  // ascending action index
  std::vector<int> actions;
  std::vector<float> prior;
  std::vector<int> visits;
  std::vector<double> value_sum;
  std::vector<int> child;  // -1 until expanded
  int total_visits = 0;
  bool terminal = false;

  double q(std::size_t a) const {
    return visits[a] > 0 ? value_sum[a] / visits[a] : 0.0;
  }
};

template <Evaluator E, typename Rng>
class Mcts {
 public:
  Mcts(const E& model, const SearchParams& params, const RewardSnapshot& rewards, Rng& rng)
      : model_(model), params_(params), rewards_(rewards), rng_(rng) {}

  // Runs the configured number of simulations from `root` and returns the
  // visit distribution over the full action space.
  std::vector<float> run(const BoardState& root) {
    nodes_.clear();
    BoardState board = root;
    expand(board);
    if (nodes_[0].terminal) throw TerminalRoot();
    if (params_.dirichlet) add_root_noise();

    std::vector<std::pair<int, int>> path;
    for (int sim = 0; sim < params_.simulations; ++sim) {
      path.clear();
      int node = 0;
      double value = 0.0;
      while (true) {
        const int slot = select(nodes_[node]);
        path.emplace_back(node, slot);
        board.apply(nodes_[node].moves[slot]);
        const int next = nodes_[node].child[slot];
        if (next < 0) {
          const int created = static_cast<int>(nodes_.size());
          value = expand(board);
          nodes_[node].child[slot] = created;
          break;
        }
        if (nodes_[next].terminal) {
          value = terminal_value(board.score());
          break;
        }
        node = next;
      }
      for (auto [n, s] : path) {
        SearchNode& sn = nodes_[n];
        sn.visits[s] += 1;
        sn.value_sum[s] += value;
        sn.total_visits += 1;
        board.undo();
      }
    }

    std::vector<float> pi(action_count(root.size()), 0.0f);
    const SearchNode& r = nodes_[0];
    for (std::size_t a = 0; a < r.moves.size(); ++a)
      pi[r.actions[a]] = static_cast<float>(r.visits[a]) / static_cast<float>(r.total_visits);
    return pi;
  }

  const SearchNode& root() const { return nodes_.at(0); }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  int select(const SearchNode& n) const {
    const double sqrt_total = std::sqrt(static_cast<double>(n.total_visits));
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n.moves.size(); ++a) {
      const double u = params_.c_puct * n.prior[a] * sqrt_total / (1.0 + n.visits[a]);
      const double score = n.q(a) + u;
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(a);
      }
    }
    return best;
  }

  double terminal_value(int score) {
    if (rewards_.empty()) return 0.0;
    return rank(score, *rewards_.r_alpha, rng_);
  }

  // Appends a node for `board` and returns the leaf value.
  double expand(const BoardState& board) {
    SearchNode node;
    node.moves = board.legal_moves();
    if (node.moves.empty()) {
      node.terminal = true;
      nodes_.push_back(std::move(node));
      return terminal_value(board.score());
    }
    const Evaluation eval = model_.evaluate(board);
    const int n = board.size();
    const std::size_t k = node.moves.size();
    node.actions.resize(k);
    node.prior.resize(k);
    double mass = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      node.actions[a] = action_index(node.moves[a], n);
      const float p = eval.policy.at(node.actions[a]);
      node.prior[a] = p > 0.0f ? p : 0.0f;
      mass += node.prior[a];
    }
    for (std::size_t a = 0; a < k; ++a)
      node.prior[a] = mass > 0.0 ? static_cast<float>(node.prior[a] / mass)
                                 : 1.0f / static_cast<float>(k);
    node.visits.assign(k, 0);
    node.value_sum.assign(k, 0.0);
    node.child.assign(k, -1);
    nodes_.push_back(std::move(node));
    return std::clamp(static_cast<double>(eval.value), -1.0, 1.0);
  }

  void add_root_noise() {
    SearchNode& r = nodes_[0];
    std::gamma_distribution<double> gamma(params_.dirichlet_alpha, 1.0);
    std::vector<double> noise(r.prior.size());
    double sum = 0.0;
    for (double& x : noise) sum += (x = gamma(rng_));
    if (sum <= 0.0) return;
    const double w = params_.dirichlet_weight;
    for (std::size_t a = 0; a < noise.size(); ++a)
      r.prior[a] = static_cast<float>((1.0 - w) * r.prior[a] + w * noise[a] / sum);
  }

  const E& model_;
  SearchParams params_;
  const RewardSnapshot& rewards_;
  Rng& rng_;
  std::vector<SearchNode> nodes_;
};

template <Evaluator E, typename Rng>
std::vector<float> search(const BoardState& root, const E& model, const SearchParams& params,
                          const RewardSnapshot& rewards, Rng& rng) {
  Mcts<E, Rng> mcts(model, params, rewards, rng);
  return mcts.run(root);
}

// Highest-probability action; ties go to the lowest index.
inline int argmax_action(const std::vector<float>& pi) {
  int best = -1;
  float best_p = -1.0f;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] > best_p) {
      best_p = pi[a];
      best = static_cast<int>(a);
    }
  }
  return best;
}

// Draws an action proportionally to `pi`.
template <typename Rng>
int sample_action(const std::vector<float>& pi, Rng& rng) {
  double total = 0.0;
  for (float p : pi) total += p;
  double r = uniform01(rng) * total;
  int last = -1;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (pi[a] <= 0.0f) continue;
    last = static_cast<int>(a);
    r -= pi[a];
    if (r < 0.0) return last;
  }
  return last;
}

// Plays a whole game from `root`, searching afresh before every move and
// taking the most visited action. The first `sample_moves` moves are drawn
// from the visit distribution instead.
template <Evaluator E, typename Rng>
SolutionRecord best_line(const BoardState& root, const E& model, const SearchParams& params,
                         const RewardSnapshot& rewards, Rng& rng, int sample_moves = 0) {
  BoardState board = root;
  while (!board.is_terminal()) {
    const auto pi = search(board, model, params, rewards, rng);
    const int step = board.score() - root.score() + 1;
    const int a = step <= sample_moves ? sample_action(pi, rng) : argmax_action(pi);
    board.apply(*board.resolve(index_to_line(a, board.size())));
  }
  return serialize_record(board);
}

}  // namespace morpion
