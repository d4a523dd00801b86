#pragma once

// Board representation, legality and move generation for Morpion Solitaire
// (5D and 5T variants) on a bounded N x N grid.
//
// Every plane is stored as one uint64_t per row (bit x = column x), so the
// board size is limited to 64. Move generation works a whole row of origins
// at a time: for a direction d and a row of origins, the five words a_k hold
// the occupancy of point origin + k*d for every origin in the row.

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace morpion {

inline constexpr int kMinBoardSize = 12;
inline constexpr int kMaxBoardSize = 64;
inline constexpr int kInitialDots = 36;
inline constexpr int kLineLength = 5;
// Proven maximum length of a 5D game.
inline constexpr int kMaxScore5D = 121;

struct Coord {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Coord, Coord) = default;
};

enum class Direction : std::uint8_t { E = 0, S = 1, SE = 2, NE = 3 };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::E, Direction::S, Direction::SE, Direction::NE};

constexpr int dx(Direction d) {
  constexpr int v[] = {1, 0, 1, 1};
  return v[static_cast<int>(d)];
}
constexpr int dy(Direction d) {
  constexpr int v[] = {0, 1, 1, -1};
  return v[static_cast<int>(d)];
}

inline std::string_view to_string(Direction d) {
  constexpr std::string_view names[] = {"E", "S", "SE", "NE"};
  return names[static_cast<int>(d)];
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  for (Direction d : kDirections)
    if (to_string(d) == s) return d;
  return std::nullopt;
}

enum class Variant : std::uint8_t { FiveD, FiveT };

inline std::string_view to_string(Variant v) {
  return v == Variant::FiveD ? "5D" : "5T";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "5D") return Variant::FiveD;
  if (s == "5T") return Variant::FiveT;
  return std::nullopt;
}

// A line position: the endpoint that is minimal along its direction plus the
// direction. This is the unit of the action space.
struct Line {
  Coord origin;
  Direction dir = Direction::E;

  constexpr Coord point(int k) const {
    return {origin.x + k * dx(dir), origin.y + k * dy(dir)};
  }
  friend constexpr bool operator==(const Line&, const Line&) = default;
};

struct Move {
  Coord origin;
  Direction dir = Direction::E;
  Coord new_dot;

  constexpr Line line() const { return {origin, dir}; }
  constexpr Coord point(int k) const { return line().point(k); }
  friend constexpr bool operator==(const Move&, const Move&) = default;
};

// Why a move is not playable.
enum class IllegalReason : std::uint8_t {
  OutOfBounds,
  NewDotNotOnLine,
  NewDotOccupied,
  WrongDotCount,
  PointReuse,      // 5D: a point already belongs to a line of this direction
  SegmentOverlap,  // 5T: a unit segment is already drawn in this direction
};

inline std::string describe(IllegalReason r, Direction d) {
  switch (r) {
    case IllegalReason::OutOfBounds: return "line out of bounds";
    case IllegalReason::NewDotNotOnLine: return "new dot not on line";
    case IllegalReason::NewDotOccupied: return "new dot already occupied";
    case IllegalReason::WrongDotCount: return "line needs exactly 4 existing dots";
    case IllegalReason::PointReuse:
      return "point reuse in direction " + std::string(to_string(d));
    case IllegalReason::SegmentOverlap:
      return "segment overlap in direction " + std::string(to_string(d));
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoardTooSmall : public Error {
 public:
  explicit BoardTooSmall(int n)
      : Error("board size " + std::to_string(n) + " outside [" +
              std::to_string(kMinBoardSize) + ", " +
              std::to_string(kMaxBoardSize) + "]") {}
};

class IllegalMove : public Error {
 public:
  IllegalMove(IllegalReason reason, Direction dir)
      : Error("illegal move: " + describe(reason, dir)), reason_(reason) {}
  IllegalReason reason() const { return reason_; }

 private:
  IllegalReason reason_;
};

class NothingToUndo : public Error {
 public:
  NothingToUndo() : Error("nothing to undo") {}
};

class InvalidActionIndex : public Error {
 public:
  InvalidActionIndex(int index, int n)
      : Error("action index " + std::to_string(index) +
              " out of range for board " + std::to_string(n)) {}
};

// ---------------------------------------------------------------------------
// Action space

// Number of line positions on an N x N board.
constexpr int action_count(int n) {
  return 2 * n * (n - 4) + 2 * (n - 4) * (n - 4);
}

constexpr bool line_in_bounds(const Line& l, int n) {
  const Coord a = l.point(0), b = l.point(kLineLength - 1);
  return a.x >= 0 && a.y >= 0 && a.x < n && a.y < n && b.x >= 0 &&
         b.y >= 0 && b.x < n && b.y < n;
}

// Layout: E block (y in [0,N), x in [0,N-4)), S block (y in [0,N-4),
// x in [0,N)), SE block (x,y in [0,N-4)), NE block (y in [4,N),
// x in [0,N-4)); each block row-major.
inline int action_index(const Line& l, int n) {
  if (!line_in_bounds(l, n))
    throw Error("action_index: line out of bounds");
  const int w = n - 4;
  const int x = l.origin.x, y = l.origin.y;
  switch (l.dir) {
    case Direction::E: return y * w + x;
    case Direction::S: return n * w + y * n + x;
    case Direction::SE: return 2 * n * w + y * w + x;
    case Direction::NE: return 2 * n * w + w * w + (y - 4) * w + x;
  }
  return -1;
}

inline int action_index(const Move& m, int n) { return action_index(m.line(), n); }

inline Line index_to_line(int i, int n) {
  if (i < 0 || i >= action_count(n)) throw InvalidActionIndex(i, n);
  const int w = n - 4;
  if (i < n * w) return {{i % w, i / w}, Direction::E};
  i -= n * w;
  if (i < n * w) return {{i % n, i / n}, Direction::S};
  i -= n * w;
  if (i < w * w) return {{i % w, i / w}, Direction::SE};
  i -= w * w;
  return {{i % w, i / w + 4}, Direction::NE};
}

// ---------------------------------------------------------------------------
// Board

class BoardState {
 public:
  BoardState(int size, Variant variant) : size_(size), variant_(variant) {
    if (size < kMinBoardSize || size > kMaxBoardSize) throw BoardTooSmall(size);
    planes_.assign(9 * static_cast<std::size_t>(size), 0);
    const int off = (size - 10) / 2;
    for (const Coord c : initial_cross()) set(occ_row(c.y + off), c.x + off);
  }

  // The 36-dot Greek cross in its own 10 x 10 frame.
  static std::vector<Coord> initial_cross() {
    std::vector<Coord> dots;
    auto add = [&](int y, std::initializer_list<int> xs) {
      for (int x : xs) dots.push_back({x, y});
    };
    add(0, {3, 4, 5, 6});
    add(1, {3, 6});
    add(2, {3, 6});
    add(3, {0, 1, 2, 3, 6, 7, 8, 9});
    add(4, {0, 9});
    add(5, {0, 9});
    add(6, {0, 1, 2, 3, 6, 7, 8, 9});
    add(7, {3, 6});
    add(8, {3, 6});
    add(9, {3, 4, 5, 6});
    return dots;
  }

  int size() const { return size_; }
  Variant variant() const { return variant_; }
  int score() const { return static_cast<int>(history_.size()); }
  const std::vector<Move>& history() const { return history_; }
  int cross_offset() const { return (size_ - 10) / 2; }

  bool in_bounds(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < size_ && c.y < size_;
  }
  bool occupied(Coord c) const { return test(occ_row(c.y), c.x); }
  // 5D bookkeeping: c already lies on a line of direction d.
  bool point_used(Direction d, Coord c) const {
    return test(point_row(d, c.y), c.x);
  }
  // 5T bookkeeping: the unit segment from c to c + d is drawn.
  bool segment_used(Direction d, Coord c) const {
    return test(seg_row(d, c.y), c.x);
  }
  // True if c lies on some drawn line of direction d, for either variant.
  bool on_line(Direction d, Coord c) const {
    if (variant_ == Variant::FiveD) return point_used(d, c);
    const Coord prev{c.x - dx(d), c.y - dy(d)};
    return segment_used(d, c) || (in_bounds(prev) && segment_used(d, prev));
  }

  int occupied_count() const {
    int total = 0;
    for (int y = 0; y < size_; ++y) total += std::popcount(occ_row(y));
    return total;
  }

  // Empty when legal, otherwise the first violated rule.
  std::optional<IllegalReason> check(const Move& m) const {
    const Line l = m.line();
    if (!line_in_bounds(l, size_)) return IllegalReason::OutOfBounds;
    int gap = -1;
    for (int k = 0; k < kLineLength; ++k)
      if (l.point(k) == m.new_dot) gap = k;
    if (gap < 0) return IllegalReason::NewDotNotOnLine;
    if (occupied(m.new_dot)) return IllegalReason::NewDotOccupied;
    for (int k = 0; k < kLineLength; ++k)
      if (k != gap && !occupied(l.point(k))) return IllegalReason::WrongDotCount;
    if (variant_ == Variant::FiveD) {
      for (int k = 0; k < kLineLength; ++k)
        if (point_used(l.dir, l.point(k))) return IllegalReason::PointReuse;
    } else {
      for (int k = 0; k + 1 < kLineLength; ++k)
        if (segment_used(l.dir, l.point(k))) return IllegalReason::SegmentOverlap;
    }
    return std::nullopt;
  }

  bool is_legal(const Move& m) const { return !check(m).has_value(); }

  // The move on line l, if l is playable right now.
  std::optional<Move> resolve(const Line& l) const {
    if (!line_in_bounds(l, size_)) return std::nullopt;
    for (int k = 0; k < kLineLength; ++k) {
      const Coord p = l.point(k);
      if (!occupied(p)) {
        Move m{l.origin, l.dir, p};
        if (is_legal(m)) return m;
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  // All legal moves, direction-major then origin row-major (i.e. ascending
  // action index).
  std::vector<Move> legal_moves() const {
    std::vector<Move> out;
    for_each_legal([&](const Move& m) { out.push_back(m); });
    return out;
  }

  bool is_terminal() const {
    bool any = false;
    for_each_legal([&](const Move&) { any = true; });
    return !any;
  }

  // Bitmask over the action space, one byte per action.
  std::vector<std::uint8_t> legal_mask() const {
    std::vector<std::uint8_t> mask(action_count(size_), 0);
    for_each_legal([&](const Move& m) { mask[action_index(m, size_)] = 1; });
    return mask;
  }

  template <typename F>
  void for_each_legal(F&& f) const {
    const int n = size_;
    const std::uint64_t origins4 = low_bits(n - 4);
    const std::uint64_t origins_all = low_bits(n);
    const bool five_d = variant_ == Variant::FiveD;
    for (Direction d : kDirections) {
      int y0 = 0, y1 = n;
      std::uint64_t valid = origins4;
      if (d == Direction::S) {
        y1 = n - 4;
        valid = origins_all;
      } else if (d == Direction::SE) {
        y1 = n - 4;
      } else if (d == Direction::NE) {
        y0 = 4;
      }
      const int sx = dx(d), sy = dy(d);
      for (int y = y0; y < y1; ++y) {
        std::uint64_t a[kLineLength];
        std::uint64_t blocked = 0;
        for (int k = 0; k < kLineLength; ++k) {
          const int row = y + k * sy;
          const int shift = k * sx;
          a[k] = occ_row(row) >> shift;
          if (five_d) {
            blocked |= point_row(d, row) >> shift;
          } else if (k + 1 < kLineLength) {
            blocked |= seg_row(d, row) >> shift;
          }
        }
        std::uint64_t gap_at[kLineLength];
        std::uint64_t any = 0;
        for (int k = 0; k < kLineLength; ++k) {
          std::uint64_t others = ~std::uint64_t{0};
          for (int j = 0; j < kLineLength; ++j)
            if (j != k) others &= a[j];
          gap_at[k] = ~a[k] & others & valid & ~blocked;
          any |= gap_at[k];
        }
        while (any) {
          const int x = std::countr_zero(any);
          any &= any - 1;
          int k = 0;
          while (!((gap_at[k] >> x) & 1)) ++k;
          f(Move{{x, y}, d, {x + k * sx, y + k * sy}});
        }
      }
    }
  }

  void apply(const Move& m) {
    if (auto why = check(m)) throw IllegalMove(*why, m.dir);
    if (variant_ == Variant::FiveD && score() >= kMaxScore5D)
      throw std::logic_error("5D score bound exceeded; engine bug");
    set(occ_row(m.new_dot.y), m.new_dot.x);
    mark(m, true);
    history_.push_back(m);
  }

  void undo() {
    if (history_.empty()) throw NothingToUndo();
    const Move m = history_.back();
    history_.pop_back();
    clear(occ_row(m.new_dot.y), m.new_dot.x);
    mark(m, false);
  }

  friend bool operator==(const BoardState&, const BoardState&) = default;

 private:
  static std::uint64_t low_bits(int count) {
    return count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
  }
  static bool test(std::uint64_t row, int x) { return (row >> x) & 1; }
  static void set(std::uint64_t& row, int x) { row |= std::uint64_t{1} << x; }
  static void clear(std::uint64_t& row, int x) { row &= ~(std::uint64_t{1} << x); }

  // planes_: [occupancy, point_used x4, segment_used x4], each N rows.
  std::uint64_t& occ_row(int y) { return planes_[y]; }
  std::uint64_t occ_row(int y) const { return planes_[y]; }
  std::uint64_t& point_row(Direction d, int y) {
    return planes_[(1 + static_cast<int>(d)) * size_ + y];
  }
  std::uint64_t point_row(Direction d, int y) const {
    return planes_[(1 + static_cast<int>(d)) * size_ + y];
  }
  std::uint64_t& seg_row(Direction d, int y) {
    return planes_[(5 + static_cast<int>(d)) * size_ + y];
  }
  std::uint64_t seg_row(Direction d, int y) const {
    return planes_[(5 + static_cast<int>(d)) * size_ + y];
  }

  void mark(const Move& m, bool on) {
    const Line l = m.line();
    const int last = variant_ == Variant::FiveD ? kLineLength : kLineLength - 1;
    for (int k = 0; k < last; ++k) {
      const Coord p = l.point(k);
      auto& row = variant_ == Variant::FiveD ? point_row(l.dir, p.y)
                                             : seg_row(l.dir, p.y);
      on ? set(row, p.x) : clear(row, p.x);
    }
  }

  int size_;
  Variant variant_;
  std::vector<std::uint64_t> planes_;
  std::vector<Move> history_;
};

inline BoardState new_board(int size, Variant variant) {
  return BoardState(size, variant);
}

}  // namespace morpion
