#pragma once

// Solution records: a textual move list that can be replayed and checked
// against the rules from the initial cross.
//
//   morpion-record v1
//   variant=5D board=22
//   1 12 7 E 9 7
//   ...
//
// Each move line is `<step> <new_x> <new_y> <dir> <origin_x> <origin_y>`.

#include <algorithm>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "morpion/core.hpp"

namespace morpion {

inline constexpr std::string_view kRecordMagic = "morpion-record";
inline constexpr int kRecordVersion = 1;

struct SolutionRecord {
  Variant variant = Variant::FiveD;
  int board = 0;
  int version = kRecordVersion;
  std::vector<Move> moves;

  int score() const { return static_cast<int>(moves.size()); }
  friend bool operator==(const SolutionRecord&, const SolutionRecord&) = default;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  int line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  int line_;
  std::string reason_;
};

class IllegalRecordMove : public Error {
 public:
  IllegalRecordMove(int step, IllegalReason reason, Direction dir)
      : Error("ILLEGAL step " + std::to_string(step) + ": " +
              describe(reason, dir)),
        step_(step),
        reason_(reason) {}
  int step() const { return step_; }
  IllegalReason reason() const { return reason_; }

 private:
  int step_;
  IllegalReason reason_;
};

inline SolutionRecord serialize_record(const BoardState& state) {
  return {state.variant(), state.size(), kRecordVersion, state.history()};
}

inline std::string to_text(const SolutionRecord& rec) {
  std::ostringstream os;
  os << kRecordMagic << " v" << rec.version << '\n';
  os << "variant=" << to_string(rec.variant) << " board=" << rec.board << '\n';
  int step = 1;
  for (const Move& m : rec.moves) {
    os << step++ << ' ' << m.new_dot.x << ' ' << m.new_dot.y << ' '
       << to_string(m.dir) << ' ' << m.origin.x << ' ' << m.origin.y << '\n';
  }
  return os.str();
}

namespace detail {

inline std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_int(std::string_view s, int& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

}  // namespace detail

inline SolutionRecord parse_record(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty()) throw ParseError(1, "empty record");

  const std::string header =
      std::string(kRecordMagic) + " v" + std::to_string(kRecordVersion);
  if (lines[0] != header) throw ParseError(1, "expected '" + header + "'");

  if (lines.size() < 2) throw ParseError(2, "missing variant/board line");
  SolutionRecord rec;
  {
    const auto tok = detail::split_spaces(lines[1]);
    if (tok.size() != 2 || !tok[0].starts_with("variant=") ||
        !tok[1].starts_with("board="))
      throw ParseError(2, "expected 'variant=<5D|5T> board=<N>'");
    const auto v = parse_variant(tok[0].substr(8));
    if (!v) throw ParseError(2, "unknown variant");
    rec.variant = *v;
    if (!detail::parse_int(tok[1].substr(6), rec.board))
      throw ParseError(2, "bad board size");
    if (rec.board < kMinBoardSize || rec.board > kMaxBoardSize)
      throw ParseError(2, "board size out of range");
  }

  for (std::size_t i = 2; i < lines.size(); ++i) {
    const int lineno = static_cast<int>(i) + 1;
    const auto tok = detail::split_spaces(lines[i]);
    if (tok.empty()) {
      if (i + 1 == lines.size()) break;
      throw ParseError(lineno, "blank line");
    }
    if (tok.size() != 6) throw ParseError(lineno, "expected 6 fields");
    int step = 0;
    Move m;
    const auto d = parse_direction(tok[3]);
    if (!detail::parse_int(tok[0], step) ||
        !detail::parse_int(tok[1], m.new_dot.x) ||
        !detail::parse_int(tok[2], m.new_dot.y) || !d ||
        !detail::parse_int(tok[4], m.origin.x) ||
        !detail::parse_int(tok[5], m.origin.y))
      throw ParseError(lineno, "malformed move");
    if (step != rec.score() + 1)
      throw ParseError(lineno, "expected step " + std::to_string(rec.score() + 1));
    m.dir = *d;
    rec.moves.push_back(m);
  }
  return rec;
}

// Replays the first `count` moves (all when count < 0) on a fresh board.
inline BoardState replay(const SolutionRecord& rec, int count = -1) {
  BoardState board(rec.board, rec.variant);
  const int n = count < 0 ? rec.score() : std::min(count, rec.score());
  for (int i = 0; i < n; ++i) {
    const Move& m = rec.moves[i];
    if (auto why = board.check(m)) throw IllegalRecordMove(i + 1, *why, m.dir);
    board.apply(m);
  }
  return board;
}

inline int verify_record(const SolutionRecord& rec) {
  return replay(rec).score();
}

}  // namespace morpion
