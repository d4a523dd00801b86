// morpion: train, search, verify, render and bench.
//
// Exit codes: 0 success; 1 illegal record / terminal position / step out of
// range; 2 usage, config or parse error; 3 I/O error; 4 checkpoint mismatch.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "morpion/morpion.hpp"

namespace fs = std::filesystem;
using namespace morpion;

namespace {

constexpr const char* kSeedEnv = "MORPION_SEED";

enum Exit : int { kOk = 0, kInvalid = 1, kUsage = 2, kIo = 3, kMismatch = 4 };

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

const std::map<std::string, std::string>& train_help() {
  static const std::map<std::string, std::string> h = {
      {"iterations", "training iterations I"},
      {"episodes", "self-play episodes per iteration E"},
      {"step_threshold", "moves up to this step are sampled, later ones greedy (T')"},
      {"retrain_window", "replay window in iterations (rs)"},
      {"selfplay", "self-play move source: direct | mcts"},
      {"direct_target", "direct-mode policy target: played | policy"},
      {"selfplay_simulations", "MCTS simulations per move in mcts self-play"},
      {"stage3_simulations", "MCTS simulations per move in the record attempt"},
      {"stage3_into_rewards", "add the record-attempt score to the reward list"},
      {"board", "board size N"},
      {"variant", "5D | 5T"},
      {"seed", std::string("base seed (env ") + kSeedEnv + ")"},
      {"workers", "parallel self-play workers"},
      {"stuck_window", "iterations of a flat max score before warning"},
      {"alpha", "ranked-reward percentile"},
      {"reward_capacity", "ranked-reward list length L"},
      {"epochs", "training epochs per iteration"},
      {"batch_size", "minibatch size"},
      {"learning_rate", "SGD learning rate"},
      {"dropout", "dropout rate in the value head"},
      {"channels", "residual tower width"},
      {"blocks", "residual blocks"},
      {"value_hidden", "value head hidden units"},
      {"l2", "L2 weight penalty"},
      {"momentum", "SGD momentum"},
      {"c_puct", "PUCT exploration weight"},
      {"dirichlet", "Dirichlet noise at search roots"},
  };
  return h;
}

std::optional<std::string> read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

bool write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  return static_cast<bool>(f);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv(kSeedEnv);
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (v[used] != '\0') throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ConfigError(kSeedEnv, std::string("expected an integer, got '") + v + "'");
  }
}

// Loads a record for verify/render, printing the failure. Returns the exit
// code on failure.
std::variant<SolutionRecord, int> load_record(const std::string& path) {
  const auto text = read_text(path);
  if (!text) {
    std::cerr << "error: cannot read " << path << "\n";
    return kUsage;
  }
  try {
    return parse_record(*text);
  } catch (const ParseError& e) {
    std::cout << "PARSE ERROR line " << e.line() << ": " << e.reason() << "\n";
    return kUsage;
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_file;
  std::string out = "run";
  std::map<std::string, std::string> values;
};

void add_train(CLI::App& app, TrainArgs& a) {
  app.add_option("--config", a.config_file, "key = value config file (flags override it)");
  app.add_option("--out", a.out, "checkpoint directory; an existing run there is resumed")
      ->capture_default_str();
  for (const auto& [key, def] : to_key_values(TrainLoopConfig{}))
    app.add_option(flag_name(key), a.values[key], train_help().at(key))
        ->default_str(def)
        ->type_name("VALUE");
}

int cmd_train(const CLI::App& app, const TrainArgs& a) {
  TrainLoopConfig cfg;
  try {
    if (!a.config_file.empty()) {
      const auto text = read_text(a.config_file);
      if (!text) {
        std::cerr << "error: cannot read " << a.config_file << "\n";
        return kIo;
      }
      for (const auto& [k, v] : parse_key_values(*text)) set_config_value(cfg, k, v);
    }
    if (auto s = env_seed()) cfg.seed = *s;
    for (const auto& [key, value] : a.values)
      if (app.count(flag_name(key))) set_config_value(cfg, key, value);
    if (auto bad = cfg.invalid_key()) throw ConfigError(*bad, "invalid value");
  } catch (const ConfigError& e) {
    const bool known = train_help().count(e.key());
    std::cerr << "error: " << (known ? flag_name(e.key()) : e.key()) << ": "
              << std::string(e.what()).substr(e.key().size() + 2) << "\n";
    return kUsage;
  }

  const fs::path dir = a.out;
  TrainLoopHooks hooks;
  bool header = false;
  hooks.on_iteration = [&](const IterationReport& r) {
    if (!header) {
      std::cout << kMetricsHeader << "\n";
      header = true;
    }
    std::cout << metrics_csv_line(r.row) << "\n" << std::flush;
  };
  hooks.on_warning = [](const std::string& w) { std::cerr << "warning: " << w << "\n"; };
  try {
    const TrainLoopResult res = train_loop(cfg, dir, hooks);
    if (res.best) {
      if (!write_text(dir / "best.svg", render_svg(*res.best))) {
        std::cerr << "error: cannot write " << (dir / "best.svg").string() << "\n";
        return kIo;
      }
      std::cout << "best " << res.best->score() << "\n";
    }
  } catch (const ConfigMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CheckpointWriteFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const CorruptCheckpoint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SearchArgs {
  std::string model;
  std::string from;
  std::string out = "search_record.txt";
  std::string svg;
  std::optional<int> board;
  std::string variant = "5D";
  int simulations = SearchParams{}.simulations;
  double c_puct = SearchParams{}.c_puct;
  std::uint64_t seed = 0;
  double alpha = RankedRewardConfig{}.alpha;
};

void add_search(CLI::App& app, SearchArgs& a) {
  app.add_option("--model", a.model,
                 "model checkpoint, or a train --out directory (uses its reward list too)")
      ->required();
  app.add_option("--from", a.from, "start from the position after this record");
  app.add_option("--out", a.out, "record output path")->capture_default_str();
  app.add_option("--svg", a.svg, "SVG output path (default: <out>.svg)");
  app.add_option("--board", a.board, "expected board size; must match the checkpoint");
  app.add_option("--variant", a.variant, "5D | 5T (ignored with --from)")->capture_default_str();
  app.add_option("--simulations", a.simulations, "MCTS simulations per move")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--c-puct", a.c_puct, "PUCT exploration weight")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", a.seed, std::string("search seed (env ") + kSeedEnv + ")")
      ->capture_default_str();
  app.add_option("--alpha", a.alpha, "ranked-reward percentile for terminal values")
      ->capture_default_str();
}

int cmd_search(const CLI::App& app, SearchArgs a) {
  try {
    if (!app.count("--seed"))
      if (auto s = env_seed()) a.seed = *s;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) {
    std::cerr << "error: --alpha: must be in (0, 1)\n";
    return kUsage;
  }
  auto variant = parse_variant(a.variant);
  if (!variant) {
    std::cerr << "error: --variant: expected 5D or 5T\n";
    return kUsage;
  }

  fs::path ckpt = a.model;
  RewardSnapshot snapshot;
  std::optional<PolicyValueModel> model;
  try {
    if (fs::is_directory(ckpt)) {
      if (auto text = read_text((ckpt / "rewards.txt").string())) {
        std::istringstream in(*text);
        std::size_t cap = 0;
        in >> cap;
        RewardList list(std::max<std::size_t>(cap, 1));
        for (int s; in >> s;) list.record_score(s);
        snapshot = list.snapshot(a.alpha);
      }
      ckpt /= "model.ckpt";
    }
    model = load_checkpoint(ckpt.string(), a.board);
  } catch (const CorruptCheckpoint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  } catch (const ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  }

  const int n = model->board();
  BoardState root(n, *variant);
  if (!a.from.empty()) {
    auto rec = load_record(a.from);
    if (auto* code = std::get_if<int>(&rec)) return *code;
    const auto& r = std::get<SolutionRecord>(rec);
    if (r.board != n) {
      std::cerr << "error: record board " << r.board << " does not match checkpoint board " << n
                << "\n";
      return kMismatch;
    }
    try {
      root = replay(r);
    } catch (const IllegalRecordMove& e) {
      std::cout << e.what() << "\n";
      return kInvalid;
    }
  }

  SearchParams params;
  params.simulations = a.simulations;
  params.c_puct = a.c_puct;
  std::cout << "search board=" << n << " variant=" << to_string(root.variant())
            << " simulations=" << params.simulations << " c_puct=" << params.c_puct
            << " seed=" << a.seed << " start=" << root.score() << "\n";
  if (root.is_terminal()) {
    std::cerr << "error: start position is terminal (score " << root.score() << ")\n";
    return kInvalid;
  }
  std::mt19937_64 rng(a.seed);
  const SolutionRecord rec = best_line(root, *model, params, snapshot, rng);
  const int score = verify_record(rec);
  const fs::path svg = a.svg.empty() ? fs::path(a.out + ".svg") : fs::path(a.svg);
  if (!write_text(a.out, to_text(rec)) || !write_text(svg, render_svg(rec))) {
    std::cerr << "error: cannot write " << a.out << " or " << svg.string() << "\n";
    return kIo;
  }
  std::cout << "score " << score << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& path) {
  auto rec = load_record(path);
  if (auto* code = std::get_if<int>(&rec)) return *code;
  try {
    const int score = verify_record(std::get<SolutionRecord>(rec));
    std::cout << "OK " << score << "\n";
  } catch (const IllegalRecordMove& e) {
    std::cout << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}

struct RenderArgs {
  std::string path;
  std::optional<int> step;
  std::string svg;
  bool quiet = false;
};

int cmd_render(const RenderArgs& a) {
  auto loaded = load_record(a.path);
  if (auto* code = std::get_if<int>(&loaded)) return *code;
  SolutionRecord rec = std::get<SolutionRecord>(loaded);
  BoardState board = new_board(rec.board, rec.variant);
  try {
    board = replay(rec);
  } catch (const IllegalRecordMove& e) {
    std::cout << e.what() << "\n";
    return kInvalid;
  }
  if (a.step) {
    if (*a.step < 0 || *a.step > board.score()) {
      std::cerr << "error: --step " << *a.step << " is outside 0.." << board.score() << "\n";
      return kInvalid;
    }
    while (board.score() > *a.step) board.undo();
  }
  const std::string svg = a.svg.empty() ? a.path + ".svg" : a.svg;
  if (!write_text(svg, render_svg(board))) {
    std::cerr << "error: cannot write " << svg << "\n";
    return kIo;
  }
  if (!a.quiet) std::cout << render_text(board);
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  int games = 1000;
  int board = 22;
  std::string variant = "5D";
  std::uint64_t seed = 0;
};

int cmd_bench(const CLI::App& app, BenchArgs a) {
  if (a.games < 1) {
    std::cerr << "error: --games must be at least 1\n";
    return kUsage;
  }
  if (a.board < kMinBoardSize || a.board > kMaxBoardSize) {
    std::cerr << "error: --board must be in " << kMinBoardSize << ".." << kMaxBoardSize << "\n";
    return kUsage;
  }
  auto variant = parse_variant(a.variant);
  if (!variant) {
    std::cerr << "error: --variant: expected 5D or 5T\n";
    return kUsage;
  }
  try {
    if (!app.count("--seed"))
      if (auto s = env_seed()) a.seed = *s;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  std::mt19937_64 rng(a.seed);
  long long moves = 0, calls = 0;
  int best = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int g = 0; g < a.games; ++g) {
    BoardState b(a.board, *variant);
    while (true) {
      const auto legal = b.legal_moves();
      ++calls;
      if (legal.empty()) break;
      b.apply(legal[rng() % legal.size()]);
    }
    moves += b.score();
    best = std::max(best, b.score());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "games " << a.games << "\nmoves " << moves << "\nmean_score "
            << static_cast<double>(moves) / a.games << "\nmax_score " << best << "\n";
  // Timings go to stderr so seeded stdout stays byte-identical.
  const double s = std::max(secs, 1e-9);
  std::cerr << "seconds " << secs << "\nplayouts_per_sec " << a.games / s
            << "\nmoves_per_sec " << moves / s << "\nlegal_moves_calls_per_sec " << calls / s
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morpion Solitaire search and self-play training"};
  app.require_subcommand(1);
  app.footer(std::string("Environment: ") + kSeedEnv +
             " overrides the config file seed; an explicit --seed wins.\n"
             "Exit codes: 0 ok, 1 illegal/terminal, 2 usage or parse error, 3 I/O, "
             "4 checkpoint mismatch.");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "run the self-play training loop");
  add_train(*train, train_args);

  SearchArgs search_args;
  auto* search = app.add_subcommand("search", "play one full MCTS game with a trained model");
  add_search(*search, search_args);

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "check a solution record");
  verify->add_option("record", verify_path, "record file")->required();

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "draw a record as a text grid and an SVG file");
  render->add_option("record", render_args.path, "record file")->required();
  render->add_option("--step", render_args.step, "render only the first k moves");
  render->add_option("--svg", render_args.svg, "SVG output path (default: <record>.svg)");
  render->add_flag("--quiet", render_args.quiet, "skip the text grid");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "random-playout throughput");
  bench->add_option("--games", bench_args.games, "playouts to run")->capture_default_str();
  bench->add_option("--board", bench_args.board, "board size")->capture_default_str();
  bench->add_option("--variant", bench_args.variant, "5D | 5T")->capture_default_str();
  bench->add_option("--seed", bench_args.seed, std::string("seed (env ") + kSeedEnv + ")")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) return cmd_train(*train, train_args);
    if (*search) return cmd_search(*search, search_args);
    if (*verify) return cmd_verify(verify_path);
    if (*render) return cmd_render(render_args);
    if (*bench) return cmd_bench(*bench, bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
