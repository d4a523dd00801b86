#pragma once

// Network input planes, policy masking and the training example type shared
// by the model, the search and the self-play loop.

#include <cstdint>
#include <span>
#include <vector>

#include "morpion/core.hpp"

namespace morpion {

// Plane order: occupancy, on-line for E/S/SE/NE, constant ones.
inline constexpr int kEncodingPlanes = 6;

struct StateEncoding {
  int planes = kEncodingPlanes;
  int size = 0;
  std::vector<std::uint8_t> data;  // planes x size x size, values 0/1

  std::uint8_t at(int plane, int x, int y) const {
    return data[(static_cast<std::size_t>(plane) * size + y) * size + x];
  }
  friend bool operator==(const StateEncoding&, const StateEncoding&) = default;
};

inline StateEncoding encode(const BoardState& board) {
  const int n = board.size();
  StateEncoding enc{kEncodingPlanes, n, {}};
  enc.data.assign(static_cast<std::size_t>(kEncodingPlanes) * n * n, 0);
  auto cell = [&](int plane, int x, int y) -> std::uint8_t& {
    return enc.data[(static_cast<std::size_t>(plane) * n + y) * n + x];
  };
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Coord c{x, y};
      cell(0, x, y) = board.occupied(c);
      for (Direction d : kDirections)
        cell(1 + static_cast<int>(d), x, y) = board.on_line(d, c);
      cell(5, x, y) = 1;
    }
  }
  return enc;
}

class NoLegalActions : public Error {
 public:
  NoLegalActions() : Error("no legal actions to mask against") {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// Zero the illegal entries and renormalize. Falls back to uniform over the
// legal actions when they carry no mass.
template <typename T>
std::vector<T> masked_policy(std::span<const T> raw, std::span<const std::uint8_t> legal) {
  if (raw.size() != legal.size()) throw ShapeMismatch("policy/mask length mismatch");
  std::vector<T> out(raw.size(), T(0));
  T mass = 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < raw.size(); ++a) {
    if (!legal[a]) continue;
    ++count;
    out[a] = raw[a] > T(0) ? raw[a] : T(0);
    mass += out[a];
  }
  if (count == 0) throw NoLegalActions();
  for (std::size_t a = 0; a < raw.size(); ++a) {
    if (!legal[a]) continue;
    out[a] = mass > T(0) ? out[a] / mass : T(1) / static_cast<T>(count);
  }
  return out;
}

template <typename T>
std::vector<T> masked_policy(const std::vector<T>& raw, const std::vector<std::uint8_t>& legal) {
  return masked_policy(std::span<const T>(raw), std::span<const std::uint8_t>(legal));
}

// What a position evaluator hands to the search.
struct Evaluation {
  std::vector<float> policy;  // raw, over the full action space
  float value = 0.0f;
};

struct ActionProb {
  int action = 0;
  float prob = 0.0f;
  friend bool operator==(const ActionProb&, const ActionProb&) = default;
};

// Sparse policy target: only actions with non-zero probability.
using PolicyTarget = std::vector<ActionProb>;

template <typename T>
PolicyTarget sparse_policy(std::span<const T> dense) {
  PolicyTarget out;
  for (std::size_t a = 0; a < dense.size(); ++a)
    if (dense[a] > T(0)) out.push_back({static_cast<int>(a), static_cast<float>(dense[a])});
  return out;
}

struct TrainingExample {
  StateEncoding encoding;
  PolicyTarget pi;
  int z = 0;
  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

}  // namespace morpion
