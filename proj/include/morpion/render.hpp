#pragma once

// Text and SVG drawings of a position. Initial dots are hollow, played dots
// carry their step number, and every drawn line is shown in the SVG.

#include <sstream>
#include <string>

#include "morpion/core.hpp"
#include "morpion/record.hpp"

namespace morpion {

inline std::string render_text(const BoardState& board) {
  const int n = board.size();
  std::vector<int> step_at(static_cast<std::size_t>(n) * n, 0);
  int step = 1;
  for (const Move& m : board.history()) step_at[m.new_dot.y * n + m.new_dot.x] = step++;

  std::ostringstream os;
  os << "variant=" << to_string(board.variant()) << " board=" << n
     << " score=" << board.score() << '\n';
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const int s = step_at[y * n + x];
      std::string cell = ".";
      if (s > 0) {
        cell = std::to_string(s);
      } else if (board.occupied({x, y})) {
        cell = "o";
      }
      os << std::string(4 - cell.size(), ' ') << cell;
    }
    os << '\n';
  }
  return os.str();
}

inline std::string render_svg(const BoardState& board) {
  constexpr int cell = 24;
  constexpr int margin = 16;
  constexpr const char* line_colors[] = {"#c0392b", "#2471a3", "#1e8449", "#7d3c98"};
  const int n = board.size();
  const int extent = 2 * margin + (n - 1) * cell;
  auto px = [&](int v) { return margin + v * cell; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << extent
     << "\" height=\"" << extent << "\" viewBox=\"0 0 " << extent << ' '
     << extent << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << extent << "\" height=\"" << extent
     << "\" fill=\"white\"/>\n";
  os << "<g stroke=\"#e5e5e5\" stroke-width=\"1\">\n";
  for (int i = 0; i < n; ++i) {
    os << "<line x1=\"" << px(i) << "\" y1=\"" << px(0) << "\" x2=\"" << px(i)
       << "\" y2=\"" << px(n - 1) << "\"/>\n";
  }
  for (int i = 0; i < n; ++i) {
    os << "<line x1=\"" << px(0) << "\" y1=\"" << px(i) << "\" x2=\""
       << px(n - 1) << "\" y2=\"" << px(i) << "\"/>\n";
  }
  os << "</g>\n";

  os << "<g stroke-width=\"2\" stroke-linecap=\"round\">\n";
  for (const Move& m : board.history()) {
    const Coord a = m.point(0), b = m.point(kLineLength - 1);
    os << "<line x1=\"" << px(a.x) << "\" y1=\"" << px(a.y) << "\" x2=\""
       << px(b.x) << "\" y2=\"" << px(b.y) << "\" stroke=\""
       << line_colors[static_cast<int>(m.dir)] << "\"/>\n";
  }
  os << "</g>\n";

  const int off = board.cross_offset();
  os << "<g fill=\"white\" stroke=\"black\" stroke-width=\"1.5\">\n";
  for (const Coord c : BoardState::initial_cross()) {
    os << "<circle cx=\"" << px(c.x + off) << "\" cy=\"" << px(c.y + off)
       << "\" r=\"6\"/>\n";
  }
  os << "</g>\n";

  os << "<g font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">\n";
  int step = 1;
  for (const Move& m : board.history()) {
    const int cx = px(m.new_dot.x), cy = px(m.new_dot.y);
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy
       << "\" r=\"8\" fill=\"black\"/>\n";
    os << "<text x=\"" << cx << "\" y=\"" << cy + 3 << "\" fill=\"white\">"
       << step++ << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

inline std::string render_text(const SolutionRecord& rec) { return render_text(replay(rec)); }
inline std::string render_svg(const SolutionRecord& rec) { return render_svg(replay(rec)); }

}  // namespace morpion
