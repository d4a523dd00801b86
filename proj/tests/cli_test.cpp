// Runs the built `morpion` binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "morpion/morpion.hpp"
#include "oracle.hpp"

namespace morpion {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out, err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("morpion_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // `env` is prepended verbatim, e.g. "MORPION_SEED=3".
  Outcome run(const std::string& args, const std::string& env = "") const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = "cd '" + dir_.string() + "' && env -u MORPION_SEED " + env + " '" +
                            MORPION_CLI_PATH + "' " + args + " >'" + out + "' 2>'" + err + "'";
    const int status = std::system(cmd.c_str());
    Outcome r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  // A one-iteration run small enough for unit tests.
  static std::string tiny(const std::string& out, int board = 16, int iterations = 1) {
    return "train --board " + std::to_string(board) + " --iterations " + std::to_string(iterations) +
           " --episodes 2 --stage3-simulations 3 --channels 4 --blocks 1 --value-hidden 4"
           " --epochs 1 --out " + out;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpShowsDefaults) {
  const Outcome r = run("train --help");
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"--iterations VALUE [100]", "--episodes VALUE [50]",
                        "--step-threshold VALUE [41]", "--reward-capacity VALUE [200]",
                        "--alpha VALUE [0.75]", "--learning-rate VALUE [0.005]",
                        "--epochs VALUE [5]", "--batch-size VALUE [64]",
                        "--stage3-simulations VALUE [20000]", "--c-puct VALUE [1]",
                        "--retrain-window VALUE [10]", "MORPION_SEED"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  EXPECT_NE(run("search --help").out.find("--simulations INT:POSITIVE [20000]"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("train --no-such-flag 1").code, 2);
  const Outcome bad = run("train --alpha 1.5");
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("--alpha"), std::string::npos);
  const Outcome word = run("train --episodes lots");
  EXPECT_EQ(word.code, 2);
  EXPECT_NE(word.err.find("--episodes"), std::string::npos);
  EXPECT_EQ(run("train --board 8").code, 2);
  EXPECT_EQ(run("train --variant 6X").code, 2);
}

TEST_F(Cli, TrainWritesCheckpointAndMetrics) {
  const Outcome r = run(tiny("run", 13));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "iter,mean_score,median_score,max_score,r_alpha,loss");
  for (const char* f : {"model.ckpt", "metrics.csv", "best_record.txt", "best.svg", "config.txt"})
    EXPECT_TRUE(fs::exists(dir_ / "run" / f)) << f;
  const SolutionRecord best = parse_record(slurp(path("run/best_record.txt")));
  EXPECT_EQ(best.board, 13);
  EXPECT_NE(r.out.find("best " + std::to_string(verify_record(best))), std::string::npos);
}

TEST_F(Cli, ConfigPrecedence) {
  write("cfg.txt", "# test config\nepisodes = 3\nseed = 11\nchannels = 6\n");
  auto echoed = [&](const std::string& key) {
    for (const auto& [k, v] : parse_key_values(slurp(path("a/config.txt"))))
      if (k == key) return v;
    return std::string();
  };
  ASSERT_EQ(run(tiny("a") + " --config cfg.txt").code, 0);
  EXPECT_EQ(echoed("episodes"), "2");  // flag beats file
  EXPECT_EQ(echoed("seed"), "11");
  EXPECT_EQ(echoed("channels"), "4");
  fs::remove_all(dir_ / "a");
  ASSERT_EQ(run("train --config cfg.txt --iterations 1 --stage3-simulations 2 --board 16 --out a",
                "MORPION_SEED=5").code, 0);
  EXPECT_EQ(echoed("episodes"), "3");
  EXPECT_EQ(echoed("channels"), "6");
  EXPECT_EQ(echoed("seed"), "5");  // env beats file
  fs::remove_all(dir_ / "a");
  ASSERT_EQ(run(tiny("a") + " --seed 9", "MORPION_SEED=5").code, 0);
  EXPECT_EQ(echoed("seed"), "9");  // flag beats env
  EXPECT_EQ(run(tiny("b") + " --config missing.txt").code, 3);
  write("bad.txt", "episodes: 3\n");
  EXPECT_EQ(run(tiny("b") + " --config bad.txt").code, 2);
}

TEST_F(Cli, ResumeAndMismatch) {
  ASSERT_EQ(run(tiny("run")).code, 0);
  const Outcome more = run(tiny("run", 16, 2));
  ASSERT_EQ(more.code, 0) << more.err;
  EXPECT_EQ(std::count(more.out.begin(), more.out.end(), '\n'), 3);  // header, iter 2, best
  EXPECT_EQ(more.out.find("\n1,"), std::string::npos);
  const Outcome clash = run(tiny("run", 16, 3) + " --learning-rate 0.1");
  EXPECT_EQ(clash.code, 2);
  EXPECT_NE(clash.err.find("learning_rate"), std::string::npos);
}

TEST_F(Cli, UnwritableOutputIsAnIoError) {
  write("plainfile", "x");
  EXPECT_EQ(run(tiny("plainfile/run")).code, 3);
}

TEST_F(Cli, SearchIsSeededAndHonoursSimulations) {
  ASSERT_EQ(run(tiny("run")).code, 0);
  const Outcome a = run("search --model run --simulations 7 --seed 4 --out a.txt");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("simulations=7"), std::string::npos);
  ASSERT_EQ(run("search --model run --simulations 7 --seed 4 --out b.txt").code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_TRUE(fs::exists(dir_ / "a.txt.svg"));
  const SolutionRecord rec = parse_record(slurp(path("a.txt")));
  EXPECT_NE(a.out.find("score " + std::to_string(verify_record(rec))), std::string::npos);
  // Env seed is the same stream as the flag.
  ASSERT_EQ(run("search --model run --simulations 7 --out c.txt", "MORPION_SEED=4").code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("c.txt")));
}

TEST_F(Cli, SearchErrors) {
  ASSERT_EQ(run(tiny("run")).code, 0);
  EXPECT_EQ(run("search --model run --board 22 --simulations 2").code, 4);
  EXPECT_EQ(run("search --model nowhere.ckpt --simulations 2").code, 4);
  write("junk.ckpt", "MR2CKPT garbage");
  EXPECT_EQ(run("search --model junk.ckpt --simulations 2").code, 4);
  EXPECT_EQ(run("search --simulations 2").code, 2);

  std::mt19937_64 rng(1);
  BoardState done = new_board(16, Variant::FiveD);
  testing::random_playout(done, rng);
  write("done.txt", to_text(serialize_record(done)));
  const Outcome t = run("search --model run --from done.txt --simulations 2");
  EXPECT_EQ(t.code, 1);
  EXPECT_NE(t.err.find("terminal"), std::string::npos);

  BoardState mid = done;
  while (mid.score() > 5) mid.undo();
  write("mid.txt", to_text(serialize_record(mid)));
  const Outcome m = run("search --model run --from mid.txt --simulations 2 --out m.txt");
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_NE(m.out.find("start=5"), std::string::npos);
  const SolutionRecord cont = parse_record(slurp(path("m.txt")));
  ASSERT_GE(cont.moves.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(cont.moves[i], mid.history()[i]);

  write("big.txt", to_text(serialize_record(new_board(22, Variant::FiveD))));
  EXPECT_EQ(run("search --model run --from big.txt --simulations 2").code, 4);
}

TEST_F(Cli, Verify) {
  std::mt19937_64 rng(2);
  BoardState b = new_board(22, Variant::FiveD);
  testing::random_playout(b, rng, 10);
  write("ten.txt", to_text(serialize_record(b)));
  const Outcome ok = run("verify ten.txt");
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "OK 10\n");

  SolutionRecord bad{Variant::FiveD, 22, 1, {}};
  bad.moves.push_back({{6, 9}, Direction::E, {10, 9}});
  bad.moves.push_back({{10, 9}, Direction::E, {11, 9}});
  write("reuse.txt", to_text(bad));
  const Outcome ill = run("verify reuse.txt");
  EXPECT_EQ(ill.code, 1);
  EXPECT_EQ(ill.out, "ILLEGAL step 2: point reuse in direction E\n");

  write("empty.txt", "");
  EXPECT_EQ(run("verify empty.txt").code, 2);
  write("garbled.txt", "morpion-record v1\nvariant=5D board=22\n1 2\n");
  const Outcome g = run("verify garbled.txt");
  EXPECT_EQ(g.code, 2);
  EXPECT_EQ(g.out.rfind("PARSE ERROR line 3", 0), 0u);
  EXPECT_EQ(run("verify missing.txt").code, 2);
}

TEST_F(Cli, Render) {
  std::mt19937_64 rng(3);
  BoardState b = new_board(16, Variant::FiveT);
  testing::random_playout(b, rng, 12);
  write("rec.txt", to_text(serialize_record(b)));
  const Outcome full = run("render rec.txt");
  ASSERT_EQ(full.code, 0);
  EXPECT_EQ(full.out, render_text(b));
  EXPECT_EQ(slurp(path("rec.txt.svg")), render_svg(b));

  const Outcome part = run("render rec.txt --step 4 --svg four.svg");
  ASSERT_EQ(part.code, 0);
  BoardState four = b;
  while (four.score() > 4) four.undo();
  EXPECT_EQ(part.out, render_text(four));
  EXPECT_EQ(slurp(path("four.svg")), render_svg(four));

  EXPECT_EQ(run("render rec.txt --step 13").code, 1);
  EXPECT_EQ(run("render rec.txt --step 12").code, 0);
}

TEST_F(Cli, Bench) {
  const Outcome a = run("bench --games 50 --board 16 --seed 7");
  ASSERT_EQ(a.code, 0);
  const Outcome b = run("bench --games 50 --board 16 --seed 7");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("games 50\n", 0), 0u);
  const auto pos = a.err.find("moves_per_sec ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_GT(std::stod(a.err.substr(pos + 14)), 0.0);
  EXPECT_EQ(run("bench --games 0").code, 2);
}

}  // namespace
}  // namespace morpion
