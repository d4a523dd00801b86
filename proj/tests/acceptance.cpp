// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "gradient_check.hpp"
#include "morpion/morpion.hpp"
#include "oracle.hpp"

using namespace morpion;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double median_of(std::vector<int> v) { return median(std::move(v)); }

// ---------------------------------------------------------------------------
// 1. legal_moves against the brute-force enumerator.
Verdict rules_oracle() {
  long positions = 0, mismatches = 0;
  std::mt19937_64 rng(101);
  for (int n : {16, 20, 22}) {
    for (Variant v : {Variant::FiveD, Variant::FiveT}) {
      // Each game is stopped at a uniformly random point of its trajectory.
      for (int game = 0; game < 1000; ++game) {
        BoardState b = new_board(n, v);
        testing::random_playout(b, rng);
        const int stop = static_cast<int>(rng() % (b.score() + 1));
        while (b.score() > stop) b.undo();
        ++positions;
        if (testing::as_oracle(b.legal_moves()) != testing::oracle_legal_moves(b)) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(positions) + " positions (1000 per size and variant), " +
                               std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------
// 2. Random 5D playouts on 22 x 22 respect the 121 bound and replay exactly.
Verdict upper_bound() {
  std::mt19937_64 rng(202);
  long bad_bound = 0, bad_replay = 0;
  int best = 0;
  constexpr int kGames = 100000;
  for (int g = 0; g < kGames; ++g) {
    BoardState b = new_board(22, Variant::FiveD);
    while (true) {
      const auto moves = b.legal_moves();
      if (moves.empty()) break;
      b.apply(moves[rng() % moves.size()]);
    }
    best = std::max(best, b.score());
    if (b.score() > kMaxScore5D) ++bad_bound;
    try {
      if (verify_record(parse_record(to_text(serialize_record(b)))) != b.score()) ++bad_replay;
    } catch (const Error&) {
      ++bad_replay;
    }
  }
  return {bad_bound == 0 && bad_replay == 0,
          std::to_string(kGames) + " playouts, max score " + std::to_string(best) + ", " +
              std::to_string(bad_bound) + " over 121, " + std::to_string(bad_replay) +
              " replay failures"};
}

// ---------------------------------------------------------------------------
// 3. Ranked reward cases, tie frequency and the threshold index.
Verdict ranked_reward() {
  std::vector<std::string> problems;
  std::mt19937_64 rng(303);
  for (int r = 0; r < 50; ++r) {
    if (rank(r + 1, r, rng) != 1) problems.push_back("above");
    if (rank(r - 1, r, rng) != -1) problems.push_back("below");
  }
  std::mt19937_64 tie_rng(304);
  int plus = 0;
  constexpr int kDraws = 10000;
  for (int i = 0; i < kDraws; ++i) plus += rank(40, 40, tie_rng) == 1;
  const double freq = static_cast<double>(plus) / kDraws;
  if (freq < 0.47 || freq > 0.53) problems.push_back("tie frequency");

  // Full list of 200 distinct shuffled scores: the threshold is sorted[150].
  std::vector<int> scores(200);
  std::iota(scores.begin(), scores.end(), 1000);
  std::shuffle(scores.begin(), scores.end(), rng);
  RewardList list(200);
  for (int s : scores) list.record_score(s);
  std::vector<int> sorted = scores;
  std::sort(sorted.begin(), sorted.end());
  const int th = list.threshold(0.75);
  if (th != sorted[150]) problems.push_back("threshold");
  // With repeated values too.
  RewardList dup(200);
  std::vector<int> dups;
  for (int i = 0; i < 300; ++i) dups.push_back(static_cast<int>(rng() % 40));
  for (int s : dups) dup.record_score(s);
  std::vector<int> last(dups.end() - 200, dups.end());
  std::sort(last.begin(), last.end());
  if (dup.threshold(0.75) != last[150]) problems.push_back("threshold with repeats");

  std::ostringstream os;
  os << "tie +1 frequency " << freq << " over " << kDraws << " draws, threshold " << th
     << " == sorted[150] " << sorted[150];
  for (const auto& p : problems) os << "; failed: " << p;
  return {problems.empty(), os.str()};
}

// ---------------------------------------------------------------------------
// 4. Analytic gradients against central differences.
Verdict gradient() {
  const auto g = testing::check_gradient(150, 1e-4);
  std::ostringstream os;
  os << g.checked << " of " << g.parameters << " parameters checked, worst relative error "
     << g.worst << " (limit 1e-4)";
  if (!g.failures.empty()) os << "; first failure " << g.failures.front();
  return {g.failures.empty() && g.checked >= 100, os.str()};
}

// ---------------------------------------------------------------------------
// 5. Search with an untrained model against random play, paired by seed.
Verdict search_lift() {
  constexpr int kGames = 50;
  const int n = 16;
  const PolicyValueModel model(ModelConfig{}, n, kEncodingPlanes, 505);

  // Terminal leaves are ranked against the scores of an independent batch
  // of random games, as the reward list would hold after untrained self-play.
  RewardList list(200);
  std::mt19937_64 fill(506);
  for (int i = 0; i < 200; ++i) {
    BoardState b = new_board(n, Variant::FiveD);
    testing::random_playout(b, fill);
    list.record_score(b.score());
  }
  const RewardSnapshot snapshot = list.snapshot(0.75);

  SearchParams params;
  params.simulations = 100;
  std::vector<double> diff;
  double mcts_sum = 0, random_sum = 0;
  for (int g = 0; g < kGames; ++g) {
    std::mt19937_64 search_rng(derive_seed(507, {static_cast<std::uint64_t>(g)}));
    const SolutionRecord rec =
        best_line(new_board(n, Variant::FiveD), model, params, snapshot, search_rng);
    const int searched = verify_record(rec);
    std::mt19937_64 random_rng(derive_seed(508, {static_cast<std::uint64_t>(g)}));
    BoardState b = new_board(n, Variant::FiveD);
    testing::random_playout(b, random_rng);
    mcts_sum += searched;
    random_sum += b.score();
    diff.push_back(searched - b.score());
  }
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / kGames;
  double var = 0;
  for (double d : diff) var += (d - mean) * (d - mean);
  var /= kGames - 1;
  const double t = mean / std::sqrt(var / kGames);
  // One-sided paired t-test at 95%.
  const double critical = boost::math::quantile(boost::math::students_t(kGames - 1), 0.95);
  std::ostringstream os;
  os.precision(4);
  os << "mean score mcts " << mcts_sum / kGames << " vs random " << random_sum / kGames
     << " over " << kGames << " paired games, paired t = " << t << " (critical " << critical
     << ", r_alpha " << *snapshot.r_alpha << ")";
  return {t > critical, os.str()};
}

// ---------------------------------------------------------------------------
// 6. Short direct-policy training run trends upward.
TrainLoopConfig trend_config() {
  TrainLoopConfig cfg;
  cfg.board = 16;
  cfg.variant = Variant::FiveD;
  cfg.mode = SelfPlayMode::DirectPolicy;
  cfg.iterations = 10;
  cfg.episodes = 20;
  cfg.reward.capacity = 50;
  cfg.stage3_simulations = 100;
  cfg.seed = 606;
  return cfg;
}

Verdict training_trend() {
  const TrainLoopConfig cfg = trend_config();
  std::vector<std::vector<int>> scores;
  TrainLoopHooks hooks;
  hooks.on_iteration = [&](const IterationReport& r) {
    scores.push_back(r.episode_scores);
    std::fprintf(stderr, "  iteration %d: median %.1f max %d loss %.4f stage3 %d\n", r.row.iteration,
                 r.row.median_score, r.row.max_score, r.row.loss, r.row.stage3_score);
  };
  train_loop(cfg, std::nullopt, hooks);
  std::vector<int> early, late;
  for (int i = 0; i < 3; ++i) early.insert(early.end(), scores[i].begin(), scores[i].end());
  for (int i = 7; i < 10; ++i) late.insert(late.end(), scores[i].begin(), scores[i].end());
  const double a = median_of(early), b = median_of(late);
  std::ostringstream os;
  os << "median episode score iterations 1-3 " << a << ", iterations 8-10 " << b;
  return {b >= a, os.str()};
}

// ---------------------------------------------------------------------------
// 7. Interrupted and resumed run reproduces the uninterrupted metrics.
Verdict resume() {
  TrainLoopConfig cfg;
  cfg.board = 16;
  cfg.iterations = 4;
  cfg.episodes = 6;
  cfg.stage3_simulations = 20;
  cfg.seed = 707;
  const fs::path base = fs::temp_directory_path() / "morpion_acceptance_resume";
  fs::remove_all(base);
  const fs::path whole = base / "whole", split = base / "split";
  train_loop(cfg, whole);
  TrainLoopConfig first = cfg;
  first.iterations = 2;
  train_loop(first, split);
  const std::string after_two = detail::read_file(split / "metrics.csv");
  train_loop(cfg, split);  // resumes at iteration 3
  const std::string a = detail::read_file(whole / "metrics.csv");
  const std::string b = detail::read_file(split / "metrics.csv");
  const bool same_model = detail::read_file(whole / "model.ckpt") == detail::read_file(split / "model.ckpt");
  fs::remove_all(base);
  const long rows = std::count(a.begin(), a.end(), '\n') - 1;
  const long rows_two = std::count(after_two.begin(), after_two.end(), '\n') - 1;
  std::ostringstream os;
  os << "metrics CSV " << (a == b ? "identical" : "DIFFERENT") << " (" << rows
     << " rows, interrupted after " << rows_two << "), final model "
     << (same_model ? "identical" : "DIFFERENT");
  return {a == b && rows == 4 && rows_two == 2 && same_model, os.str()};
}

// ---------------------------------------------------------------------------
// 8. Record round trip and the illegal corpus.
struct IllegalCase {
  std::string name;
  SolutionRecord record;
  int step;
  IllegalReason reason;
};

std::vector<IllegalCase> illegal_corpus() {
  std::vector<IllegalCase> out;
  SolutionRecord reuse{Variant::FiveD, 22, 1, {}};
  reuse.moves = {{{6, 9}, Direction::E, {10, 9}}, {{10, 9}, Direction::E, {11, 9}}};
  out.push_back({"5D point reuse", reuse, 2, IllegalReason::PointReuse});

  SolutionRecord overlap{Variant::FiveT, 22, 1, {}};
  overlap.moves = {{{6, 9}, Direction::E, {10, 9}}, {{7, 9}, Direction::E, {11, 9}}};
  out.push_back({"5T segment overlap", overlap, 2, IllegalReason::SegmentOverlap});

  SolutionRecord count{Variant::FiveD, 22, 1, {}};
  count.moves = {{{3, 7}, Direction::E, {4, 7}}};
  out.push_back({"dot-count mismatch", count, 1, IllegalReason::WrongDotCount});

  SolutionRecord oob{Variant::FiveD, 16, 1, {}};
  oob.moves = {{{14, 3}, Direction::E, {14, 3}}};
  out.push_back({"out of bounds", oob, 1, IllegalReason::OutOfBounds});

  // Same faults after legal prefixes, found from seeded random games.
  std::mt19937_64 rng(808);
  for (IllegalReason want : {IllegalReason::PointReuse, IllegalReason::SegmentOverlap,
                             IllegalReason::OutOfBounds, IllegalReason::WrongDotCount}) {
    const Variant v = want == IllegalReason::SegmentOverlap ? Variant::FiveT : Variant::FiveD;
    for (int attempt = 0; attempt < 2000; ++attempt) {
      BoardState b = new_board(22, v);
      testing::random_playout(b, rng, 6);
      if (b.score() != 6) continue;
      std::optional<Move> bad;
      if (want == IllegalReason::OutOfBounds) {
        bad = Move{{20, 20}, Direction::SE, {20, 20}};
      } else {
        for (int i = 0; i < action_count(22) && !bad; ++i) {
          const Line l = index_to_line(i, 22);
          for (int k = 0; k < 5 && !bad; ++k) {
            const Move m{l.origin, l.dir, l.point(k)};
            if (b.check(m) == want) bad = m;
          }
        }
      }
      if (!bad) continue;
      SolutionRecord rec = serialize_record(b);
      rec.moves.push_back(*bad);
      out.push_back({std::string(describe(want, bad->dir)) + " at step 7", rec, 7, want});
      break;
    }
  }
  return out;
}

Verdict record_round_trip() {
  std::mt19937_64 rng(809);
  int round_trips = 0, failures = 0;
  for (int g = 0; g < 1000; ++g) {
    const Variant v = g % 2 ? Variant::FiveT : Variant::FiveD;
    const int n = std::array{16, 20, 22}[g % 3];
    BoardState b = new_board(n, v);
    testing::random_playout(b, rng);
    try {
      const SolutionRecord back = parse_record(to_text(serialize_record(b)));
      if (verify_record(back) == b.score() && replay(back) == b) ++round_trips;
      else ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  const auto corpus = illegal_corpus();
  int rejected = 0;
  std::string wrong;
  for (const auto& c : corpus) {
    try {
      verify_record(parse_record(to_text(c.record)));
      wrong += " [" + c.name + ": accepted]";
    } catch (const IllegalRecordMove& e) {
      const std::string expected = "ILLEGAL step " + std::to_string(c.step) + ": " +
                                   describe(c.reason, c.record.moves[c.step - 1].dir);
      if (e.step() == c.step && e.reason() == c.reason && e.what() == expected) ++rejected;
      else wrong += " [" + c.name + ": " + e.what() + "]";
    }
  }
  std::ostringstream os;
  os << round_trips << "/1000 games round-trip, " << rejected << "/" << corpus.size()
     << " illegal records rejected with the right step and reason" << wrong;
  return {failures == 0 && rejected == static_cast<int>(corpus.size()) && corpus.size() >= 8,
          os.str()};
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 when the criterion has no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "rules oracle equivalence", 60, rules_oracle},
      {2, "5D upper bound and replay", 300, upper_bound},
      {3, "ranked reward", 0, ranked_reward},
      {4, "gradient correctness", 0, gradient},
      {5, "search lift over random play", 600, search_lift},
      {6, "training smoke trend", 1800, training_trend},
      {7, "determinism and resume", 0, resume},
      {8, "record round trip and illegal corpus", 0, record_round_trip},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = v.pass;
    char timing[96];
    if (c.limit_seconds > 0) {
      std::snprintf(timing, sizeof timing, "%.1f s, limit %.0f s", secs, c.limit_seconds);
      if (secs > c.limit_seconds) pass = false;
    } else {
      std::snprintf(timing, sizeof timing, "%.1f s", secs);
    }
    std::printf("%s  %d. %s: %s (%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                timing);
    std::fflush(stdout);
    failed += !pass;
  }
  return failed ? 1 : 0;
}
