#pragma once

// Ranked-reward self-play training loop.
//
// Each iteration:
//   1. play E episodes against a frozen copy of the model, storing every
//      (state, policy target, ranked reward) in the replay buffer;
//   2. train a candidate model on minibatches drawn from the buffer;
//   3. let the candidate play one full-strength search game as a record
//      attempt, then replace the model with the candidate unconditionally.
//
// Episode RNG streams are derived from (seed, iteration, episode), so
// episodes can run on several workers and still commit identical results.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "morpion/core.hpp"
#include "morpion/encoding.hpp"
#include "morpion/mcts.hpp"
#include "morpion/network.hpp"
#include "morpion/random.hpp"
#include "morpion/ranked_reward.hpp"
#include "morpion/record.hpp"

namespace morpion {

enum class SelfPlayMode : std::uint8_t { DirectPolicy, Search };

// Policy target stored for direct-policy episodes.
enum class DirectTarget : std::uint8_t {
  // The masked network policy itself.
  Policy,
  // One-hot on the played action for episodes ranked +1, the masked policy
  // otherwise.
  PlayedIfPositive,
};

struct TrainLoopConfig {
  int iterations = 100;
  int episodes = 50;
  int step_threshold = 41;
  int retrain_window = 10;
  SelfPlayMode mode = SelfPlayMode::DirectPolicy;
  DirectTarget direct_target = DirectTarget::PlayedIfPositive;
  int selfplay_simulations = 100;
  int stage3_simulations = 20000;
  bool stage3_into_rewards = true;
  int board = 22;
  Variant variant = Variant::FiveD;
  std::uint64_t seed = 0;
  int workers = 1;
  int stuck_window = 20;
  RankedRewardConfig reward;
  ModelConfig model;
  SearchParams search;

  // Empty when valid, otherwise the offending key.
  std::optional<std::string> invalid_key() const {
    if (iterations < 1) return "iterations";
    if (episodes < 1) return "episodes";
    if (step_threshold < 0) return "step_threshold";
    if (retrain_window < 1) return "retrain_window";
    if (selfplay_simulations < 1) return "selfplay_simulations";
    if (stage3_simulations < 1) return "stage3_simulations";
    if (board < kMinBoardSize || board > kMaxBoardSize) return "board";
    if (workers < 1) return "workers";
    if (!(reward.alpha > 0.0 && reward.alpha < 1.0)) return "alpha";
    if (reward.capacity < 1) return "reward_capacity";
    if (model.epochs < 1) return "epochs";
    if (model.batch_size < 1) return "batch_size";
    if (model.learning_rate < 0.0) return "learning_rate";
    if (!(model.dropout >= 0.0 && model.dropout < 1.0)) return "dropout";
    if (model.channels < 1) return "channels";
    if (model.blocks < 0) return "blocks";
    if (model.value_hidden < 1) return "value_hidden";
    if (model.l2 < 0.0) return "l2";
    if (!(model.momentum >= 0.0 && model.momentum < 1.0)) return "momentum";
    if (search.c_puct < 0.0) return "c_puct";
    return std::nullopt;
  }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& why)
      : Error(key + ": " + why), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ConfigMismatch : public Error {
 public:
  explicit ConfigMismatch(const std::string& key)
      : Error("checkpoint config differs in '" + key + "'"), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

// ---------------------------------------------------------------------------
// Config as key/value text (shared by the config file and the checkpoint echo)

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::string>> to_key_values(const TrainLoopConfig& c) {
  using detail::format_double;
  return {
      {"iterations", std::to_string(c.iterations)},
      {"episodes", std::to_string(c.episodes)},
      {"step_threshold", std::to_string(c.step_threshold)},
      {"retrain_window", std::to_string(c.retrain_window)},
      {"selfplay", c.mode == SelfPlayMode::DirectPolicy ? "direct" : "mcts"},
      {"direct_target", c.direct_target == DirectTarget::Policy ? "policy" : "played"},
      {"selfplay_simulations", std::to_string(c.selfplay_simulations)},
      {"stage3_simulations", std::to_string(c.stage3_simulations)},
      {"stage3_into_rewards", c.stage3_into_rewards ? "true" : "false"},
      {"board", std::to_string(c.board)},
      {"variant", std::string(to_string(c.variant))},
      {"seed", std::to_string(c.seed)},
      {"workers", std::to_string(c.workers)},
      {"stuck_window", std::to_string(c.stuck_window)},
      {"alpha", format_double(c.reward.alpha)},
      {"reward_capacity", std::to_string(c.reward.capacity)},
      {"epochs", std::to_string(c.model.epochs)},
      {"batch_size", std::to_string(c.model.batch_size)},
      {"learning_rate", format_double(c.model.learning_rate)},
      {"dropout", format_double(c.model.dropout)},
      {"channels", std::to_string(c.model.channels)},
      {"blocks", std::to_string(c.model.blocks)},
      {"value_hidden", std::to_string(c.model.value_hidden)},
      {"l2", format_double(c.model.l2)},
      {"momentum", format_double(c.model.momentum)},
      {"c_puct", format_double(c.search.c_puct)},
      {"dirichlet", c.search.dirichlet ? "true" : "false"},
  };
}

// Applies one `key = value` setting; throws ConfigError on an unknown key or
// an unparsable value.
inline void set_config_value(TrainLoopConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&]() {
    long long v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
      throw ConfigError(key, "expected an integer, got '" + value + "'");
    return v;
  };
  auto as_double = [&]() {
    double v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
      throw ConfigError(key, "expected a number, got '" + value + "'");
    return v;
  };
  auto as_bool = [&]() {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + value + "'");
  };
  const std::map<std::string, std::function<void()>> setters = {
      {"iterations", [&] { c.iterations = static_cast<int>(as_int()); }},
      {"episodes", [&] { c.episodes = static_cast<int>(as_int()); }},
      {"step_threshold", [&] { c.step_threshold = static_cast<int>(as_int()); }},
      {"retrain_window", [&] { c.retrain_window = static_cast<int>(as_int()); }},
      {"selfplay",
       [&] {
         if (value == "direct") c.mode = SelfPlayMode::DirectPolicy;
         else if (value == "mcts") c.mode = SelfPlayMode::Search;
         else throw ConfigError(key, "expected direct|mcts");
       }},
      {"direct_target",
       [&] {
         if (value == "policy") c.direct_target = DirectTarget::Policy;
         else if (value == "played") c.direct_target = DirectTarget::PlayedIfPositive;
         else throw ConfigError(key, "expected policy|played");
       }},
      {"selfplay_simulations", [&] { c.selfplay_simulations = static_cast<int>(as_int()); }},
      {"stage3_simulations", [&] { c.stage3_simulations = static_cast<int>(as_int()); }},
      {"stage3_into_rewards", [&] { c.stage3_into_rewards = as_bool(); }},
      {"board", [&] { c.board = static_cast<int>(as_int()); }},
      {"variant",
       [&] {
         auto v = parse_variant(value);
         if (!v) throw ConfigError(key, "expected 5D|5T");
         c.variant = *v;
       }},
      {"seed", [&] { c.seed = static_cast<std::uint64_t>(as_int()); }},
      {"workers", [&] { c.workers = static_cast<int>(as_int()); }},
      {"stuck_window", [&] { c.stuck_window = static_cast<int>(as_int()); }},
      {"alpha", [&] { c.reward.alpha = as_double(); }},
      {"reward_capacity",
       [&] {
         const auto v = as_int();
         if (v < 1) throw ConfigError(key, "must be >= 1");
         c.reward.capacity = static_cast<std::size_t>(v);
       }},
      {"epochs", [&] { c.model.epochs = static_cast<int>(as_int()); }},
      {"batch_size", [&] { c.model.batch_size = static_cast<int>(as_int()); }},
      {"learning_rate", [&] { c.model.learning_rate = as_double(); }},
      {"dropout", [&] { c.model.dropout = as_double(); }},
      {"channels", [&] { c.model.channels = static_cast<int>(as_int()); }},
      {"blocks", [&] { c.model.blocks = static_cast<int>(as_int()); }},
      {"value_hidden", [&] { c.model.value_hidden = static_cast<int>(as_int()); }},
      {"l2", [&] { c.model.l2 = as_double(); }},
      {"momentum", [&] { c.model.momentum = as_double(); }},
      {"c_puct", [&] { c.search.c_puct = as_double(); }},
      {"dirichlet", [&] { c.search.dirichlet = as_bool(); }},
  };
  auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError(key, "unknown key");
  it->second();
}

// Parses `key = value` lines; `#` starts a comment.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value'");
    out.emplace_back(detail::trim(std::string_view(t).substr(0, eq)),
                     detail::trim(std::string_view(t).substr(eq + 1)));
  }
  return out;
}

inline std::string config_text(const TrainLoopConfig& c) {
  std::string out;
  for (const auto& [k, v] : to_key_values(c)) out += k + " = " + v + "\n";
  return out;
}

// Keys that may change between a checkpoint and its resumption.
inline bool resumable_key(const std::string& key) {
  return key == "iterations" || key == "workers";
}

inline void check_resume_compatible(const TrainLoopConfig& stored, const TrainLoopConfig& now) {
  const auto a = to_key_values(stored), b = to_key_values(now);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!resumable_key(a[i].first) && a[i].second != b[i].second)
      throw ConfigMismatch(a[i].first);
}

// ---------------------------------------------------------------------------
// Replay buffer

class ReplayBuffer {
 public:
  void add(int iteration, std::vector<TrainingExample> examples) {
    if (groups_.empty() || groups_.back().first != iteration) groups_.emplace_back(iteration, std::vector<TrainingExample>{});
    auto& dst = groups_.back().second;
    for (auto& ex : examples) dst.push_back(std::move(ex));
  }

  // Drops every group older than the last `window` iterations up to `current`.
  void trim(int current, int window) {
    while (!groups_.empty() && groups_.front().first <= current - window) groups_.pop_front();
  }

  std::vector<TrainingExample> all() const {
    std::vector<TrainingExample> out;
    out.reserve(size());
    for (const auto& g : groups_) out.insert(out.end(), g.second.begin(), g.second.end());
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& g : groups_) n += g.second.size();
    return n;
  }

  const std::deque<std::pair<int, std::vector<TrainingExample>>>& groups() const { return groups_; }
  std::deque<std::pair<int, std::vector<TrainingExample>>>& groups() { return groups_; }

  friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;

 private:
  std::deque<std::pair<int, std::vector<TrainingExample>>> groups_;
};

// ---------------------------------------------------------------------------
// Loop state

struct MetricsRow {
  int iteration = 0;
  double mean_score = 0.0;
  double median_score = 0.0;
  int max_score = 0;
  int r_alpha = 0;
  double loss = 0.0;
  int stage3_score = 0;
  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr std::string_view kMetricsHeader = "iter,mean_score,median_score,max_score,r_alpha,loss";

inline std::string metrics_csv_line(const MetricsRow& r) {
  std::ostringstream os;
  os << r.iteration << ',' << std::fixed << std::setprecision(4) << r.mean_score << ','
     << std::setprecision(1) << r.median_score << ',' << r.max_score << ',' << r.r_alpha << ','
     << std::setprecision(6) << r.loss;
  return os.str();
}

struct TrainState {
  PolicyValueModel model;
  RewardList rewards;
  ReplayBuffer replay;
  int iteration = 0;  // completed iterations
  std::optional<SolutionRecord> best;
  std::mt19937_64 rng;
  std::vector<MetricsRow> metrics;

  explicit TrainState(const TrainLoopConfig& cfg)
      : model(cfg.model, cfg.board, kEncodingPlanes, derive_seed(cfg.seed, {0x6d6f64656cULL})),
        rewards(cfg.reward.capacity),
        rng(derive_seed(cfg.seed, {0x6c6f6f70ULL})) {}
};

// ---------------------------------------------------------------------------
// Stage 1

struct EpisodeStep {
  StateEncoding encoding;
  PolicyTarget pi;
  int action = 0;
};

struct Episode {
  std::vector<EpisodeStep> steps;
  int score = 0;
  SolutionRecord record;
};

inline double median(std::vector<int> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Plays one self-play game. Moves with step index <= step_threshold are
// sampled from pi_t, later moves take argmax pi_t.
template <typename Rng>
Episode run_episode(const PolicyValueModel& model, const TrainLoopConfig& cfg,
                    const RewardSnapshot& rewards, Rng& rng) {
  Episode ep;
  BoardState board(cfg.board, cfg.variant);
  SearchParams sp = cfg.search;
  sp.simulations = cfg.selfplay_simulations;
  while (true) {
    const auto mask = board.legal_mask();
    if (std::find(mask.begin(), mask.end(), 1) == mask.end()) break;
    EpisodeStep step;
    step.encoding = encode(board);
    std::vector<float> pi;
    if (cfg.mode == SelfPlayMode::DirectPolicy) {
      pi = masked_policy(model.predict(step.encoding).policy, mask);
    } else {
      pi = search(board, model, sp, rewards, rng);
    }
    const int t = board.score() + 1;
    step.action = t <= cfg.step_threshold ? sample_action(pi, rng) : argmax_action(pi);
    step.pi = sparse_policy(std::span<const float>(pi));
    board.apply(*board.resolve(index_to_line(step.action, cfg.board)));
    ep.steps.push_back(std::move(step));
  }
  ep.score = board.score();
  ep.record = serialize_record(board);
  return ep;
}

// Records the score, ranks it against the updated list and labels every step
// with the single resulting z.
inline std::vector<TrainingExample> finish_episode(TrainState& ts, Episode&& ep,
                                                   const TrainLoopConfig& cfg) {
  ts.rewards.record_score(ep.score);
  const int r_alpha = ts.rewards.threshold(cfg.reward.alpha);
  const int z = rank(ep.score, r_alpha, ts.rng);
  std::vector<TrainingExample> out;
  out.reserve(ep.steps.size());
  const bool one_hot = cfg.mode == SelfPlayMode::DirectPolicy &&
                       cfg.direct_target == DirectTarget::PlayedIfPositive && z > 0;
  for (auto& s : ep.steps) {
    TrainingExample ex;
    ex.encoding = std::move(s.encoding);
    ex.pi = one_hot ? PolicyTarget{{s.action, 1.0f}} : std::move(s.pi);
    ex.z = z;
    out.push_back(std::move(ex));
  }
  return out;
}

struct IterationReport {
  MetricsRow row;
  std::vector<int> episode_scores;
  SolutionRecord stage3;
  std::vector<std::string> warnings;
};

inline std::optional<std::string> stuck_warning(const TrainState& ts, int window) {
  if (window < 1 || static_cast<int>(ts.metrics.size()) < window || ts.rewards.empty())
    return std::nullopt;
  const int last_max = ts.metrics.back().max_score;
  for (std::size_t i = ts.metrics.size() - window; i < ts.metrics.size(); ++i)
    if (ts.metrics[i].max_score != last_max) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(ts.rewards.entries().begin(), ts.rewards.entries().end());
  if (*lo != *hi) return std::nullopt;
  return "possible local optimum: max score " + std::to_string(last_max) + " for " +
         std::to_string(window) + " iterations and every recent score equals " +
         std::to_string(*lo);
}

inline IterationReport run_iteration(TrainState& ts, const TrainLoopConfig& cfg) {
  const int iter = ts.iteration + 1;
  IterationReport report;

  // Stage 1.
  const RewardSnapshot snapshot = ts.rewards.snapshot(cfg.reward.alpha);
  const PolicyValueModel& frozen = ts.model;
  std::vector<Episode> episodes(cfg.episodes);
  auto play = [&](int e) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter),
                                               static_cast<std::uint64_t>(e)}));
    episodes[e] = run_episode(frozen, cfg, snapshot, rng);
  };
  const int workers = std::min(cfg.workers, cfg.episodes);
  if (workers <= 1) {
    for (int e = 0; e < cfg.episodes; ++e) play(e);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int e = w; e < cfg.episodes; e += workers) play(e);
      });
    for (auto& t : pool) t.join();
  }
  std::vector<TrainingExample> fresh;
  for (auto& ep : episodes) {
    report.episode_scores.push_back(ep.score);
    auto ex = finish_episode(ts, std::move(ep), cfg);
    for (auto& x : ex) fresh.push_back(std::move(x));
  }
  ts.replay.add(iter, std::move(fresh));

  // Stage 2.
  PolicyValueModel candidate = ts.model;
  const auto examples = ts.replay.all();
  const TrainStats stats = train(candidate, std::span<const TrainingExample>(examples), cfg.model, ts.rng);

  // Stage 3.
  SearchParams sp = cfg.search;
  sp.simulations = cfg.stage3_simulations;
  std::mt19937_64 stage3_rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(iter), 0x7374616765ULL}));
  const RewardSnapshot after = ts.rewards.snapshot(cfg.reward.alpha);
  report.stage3 = best_line(BoardState(cfg.board, cfg.variant), candidate, sp, after, stage3_rng);
  const int stage3_score = verify_record(report.stage3);
  if (!ts.best || stage3_score > ts.best->score()) ts.best = report.stage3;
  for (const auto& ep : episodes)
    if (ep.score > ts.best->score()) ts.best = ep.record;
  if (cfg.stage3_into_rewards) ts.rewards.record_score(stage3_score);
  ts.model = std::move(candidate);
  ts.replay.trim(iter, cfg.retrain_window);

  MetricsRow& row = report.row;
  row.iteration = iter;
  const auto& sc = report.episode_scores;
  row.mean_score = std::accumulate(sc.begin(), sc.end(), 0.0) / static_cast<double>(sc.size());
  row.median_score = median(sc);
  row.max_score = *std::max_element(sc.begin(), sc.end());
  row.r_alpha = ts.rewards.threshold(cfg.reward.alpha);
  row.loss = stats.loss;
  row.stage3_score = stage3_score;
  ts.metrics.push_back(row);
  ts.iteration = iter;
  if (auto w = stuck_warning(ts, cfg.stuck_window)) report.warnings.push_back(*w);
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoint directory
//
//   model.ckpt      network checkpoint
//   rewards.txt     capacity, then the reward list oldest first
//   replay.bin      replay buffer
//   rng.txt         loop RNG state
//   config.txt      config echo (key = value)
//   state.txt       completed iterations
//   best_record.txt best solution record (when one exists)
//   metrics.csv     one row per completed iteration

inline constexpr char kReplayMagic[] = "MR2REPLAY";
inline constexpr std::uint32_t kReplayVersion = 1;

inline std::string replay_bytes(const ReplayBuffer& d) {
  std::string out(kReplayMagic, 9);
  detail::put_u32(out, kReplayVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(d.groups().size()));
  for (const auto& [iter, exs] : d.groups()) {
    detail::put_u32(out, static_cast<std::uint32_t>(iter));
    detail::put_u32(out, static_cast<std::uint32_t>(exs.size()));
    for (const auto& ex : exs) {
      detail::put_u32(out, static_cast<std::uint32_t>(ex.z + 1));
      detail::put_u32(out, static_cast<std::uint32_t>(ex.encoding.planes));
      detail::put_u32(out, static_cast<std::uint32_t>(ex.encoding.size));
      out.append(reinterpret_cast<const char*>(ex.encoding.data.data()), ex.encoding.data.size());
      detail::put_u32(out, static_cast<std::uint32_t>(ex.pi.size()));
      for (const auto& ap : ex.pi) {
        detail::put_u32(out, static_cast<std::uint32_t>(ap.action));
        detail::put_f32(out, ap.prob);
      }
    }
  }
  return out;
}

inline ReplayBuffer replay_from_bytes(std::string_view data) {
  detail::ByteReader in(data);
  if (in.bytes(9) != std::string_view(kReplayMagic, 9)) throw CorruptCheckpoint("bad replay magic");
  if (in.u32() != kReplayVersion) throw CorruptCheckpoint("unsupported replay version");
  ReplayBuffer d;
  const std::uint32_t groups = in.u32();
  for (std::uint32_t g = 0; g < groups; ++g) {
    const int iter = static_cast<int>(in.u32());
    const std::uint32_t count = in.u32();
    std::vector<TrainingExample> exs;
    for (std::uint32_t i = 0; i < count; ++i) {
      TrainingExample ex;
      ex.z = static_cast<int>(in.u32()) - 1;
      ex.encoding.planes = static_cast<int>(in.u32());
      ex.encoding.size = static_cast<int>(in.u32());
      if (ex.encoding.planes > 64 || ex.encoding.size > kMaxBoardSize)
        throw CorruptCheckpoint("replay encoding shape");
      const auto raw = in.bytes(static_cast<std::size_t>(ex.encoding.planes) * ex.encoding.size *
                                ex.encoding.size);
      ex.encoding.data.assign(raw.begin(), raw.end());
      const std::uint32_t np = in.u32();
      for (std::uint32_t k = 0; k < np; ++k) {
        ActionProb ap;
        ap.action = static_cast<int>(in.u32());
        ap.prob = in.f32();
        ex.pi.push_back(ap);
      }
      exs.push_back(std::move(ex));
    }
    d.add(iter, std::move(exs));
  }
  if (!in.done()) throw CorruptCheckpoint("trailing replay bytes");
  return d;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointWriteFailure(tmp);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw CheckpointWriteFailure(tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointWriteFailure(path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CorruptCheckpoint("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const auto& r : rows) out += metrics_csv_line(r) + '\n';
  return out;
}

inline std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  std::vector<MetricsRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader) throw CorruptCheckpoint("metrics header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricsRow r;
    char c1, c2, c3, c4, c5;
    ls >> r.iteration >> c1 >> r.mean_score >> c2 >> r.median_score >> c3 >> r.max_score >> c4 >>
        r.r_alpha >> c5 >> r.loss;
    if (!ls) throw CorruptCheckpoint("metrics row");
    rows.push_back(r);
  }
  return rows;
}

inline void save_train_state(const TrainState& ts, const TrainLoopConfig& cfg,
                             const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CheckpointWriteFailure(dir.string());
  detail::write_file(dir / "model.ckpt", checkpoint_bytes(ts.model));
  {
    std::ostringstream os;
    os << ts.rewards.capacity() << '\n';
    for (int s : ts.rewards.entries()) os << s << '\n';
    detail::write_file(dir / "rewards.txt", os.str());
  }
  detail::write_file(dir / "replay.bin", replay_bytes(ts.replay));
  {
    std::ostringstream os;
    os << ts.rng;
    detail::write_file(dir / "rng.txt", os.str());
  }
  detail::write_file(dir / "config.txt", config_text(cfg));
  detail::write_file(dir / "state.txt", "iteration = " + std::to_string(ts.iteration) + "\n");
  if (ts.best) detail::write_file(dir / "best_record.txt", to_text(*ts.best));
  // Rows after a resumed run keep the exact text of the earlier rows.
  detail::write_file(dir / "metrics.csv", metrics_csv(ts.metrics));
}

inline bool has_train_state(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "state.txt");
}

inline TrainState load_train_state(const TrainLoopConfig& cfg, const std::filesystem::path& dir) {
  TrainLoopConfig stored = cfg;
  for (const auto& [k, v] : parse_key_values(detail::read_file(dir / "config.txt")))
    set_config_value(stored, k, v);
  check_resume_compatible(stored, cfg);

  TrainState ts(cfg);
  ts.model = checkpoint_from_bytes<float>(detail::read_file(dir / "model.ckpt"), cfg.board);
  if (!(ts.model.config() == cfg.model)) throw ConfigMismatch("model");
  {
    std::istringstream in(detail::read_file(dir / "rewards.txt"));
    std::size_t cap = 0;
    if (!(in >> cap)) throw CorruptCheckpoint("rewards");
    ts.rewards = RewardList(cap);
    int s;
    while (in >> s) ts.rewards.record_score(s);
  }
  ts.replay = replay_from_bytes(detail::read_file(dir / "replay.bin"));
  {
    std::istringstream in(detail::read_file(dir / "rng.txt"));
    in >> ts.rng;
    if (!in) throw CorruptCheckpoint("rng");
  }
  for (const auto& [k, v] : parse_key_values(detail::read_file(dir / "state.txt")))
    if (k == "iteration") ts.iteration = std::stoi(v);
  if (std::filesystem::exists(dir / "best_record.txt")) {
    ts.best = parse_record(detail::read_file(dir / "best_record.txt"));
    verify_record(*ts.best);
  }
  const std::string csv = detail::read_file(dir / "metrics.csv");
  ts.metrics = parse_metrics_csv(csv);
  if (static_cast<int>(ts.metrics.size()) != ts.iteration) throw CorruptCheckpoint("metrics rows");
  return ts;
}

struct TrainLoopResult {
  PolicyValueModel model;
  std::optional<SolutionRecord> best;
  std::vector<MetricsRow> metrics;
  std::vector<std::string> warnings;
};

struct TrainLoopHooks {
  std::function<void(const IterationReport&)> on_iteration;
  std::function<void(const std::string&)> on_warning;
};

// Runs until `cfg.iterations` iterations are complete, checkpointing into
// `dir` after every iteration. An existing checkpoint in `dir` is resumed.
inline TrainLoopResult train_loop(const TrainLoopConfig& cfg,
                                  const std::optional<std::filesystem::path>& dir = std::nullopt,
                                  const TrainLoopHooks& hooks = {}) {
  if (auto bad = cfg.invalid_key()) throw ConfigError(*bad, "invalid value");
  TrainState ts = dir && has_train_state(*dir) ? load_train_state(cfg, *dir) : TrainState(cfg);
  std::vector<std::string> warnings;
  while (ts.iteration < cfg.iterations) {
    IterationReport report = run_iteration(ts, cfg);
    if (dir) save_train_state(ts, cfg, *dir);
    if (hooks.on_iteration) hooks.on_iteration(report);
    for (auto& w : report.warnings) {
      if (hooks.on_warning) hooks.on_warning(w);
      warnings.push_back(std::move(w));
    }
  }
  return {std::move(ts.model), ts.best, ts.metrics, std::move(warnings)};
}

}  // namespace morpion
