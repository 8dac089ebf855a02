#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

namespace sar {

// x is the column in [0, width), y the row in [0, height); y grows downward.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

inline int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
inline int chebyshev(Cell a, Cell b) {
  int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return dx > dy ? dx : dy;
}

enum class Terrain : std::uint8_t { kFree, kObstacle };

struct GridMap {
  int width = 0;   // L
  int height = 0;  // W
  std::vector<Terrain> cells;  // row-major, size width * height
  std::vector<Cell> coop_spawns;
  std::vector<Cell> adv_spawns;
  std::vector<Cell> targets;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  int index(Cell c) const { return c.y * width + c.x; }
  Cell cell_at(int index) const { return {index % width, index / width}; }
  bool is_free(Cell c) const { return in_bounds(c) && cells[index(c)] == Terrain::kFree; }
  int cell_count() const { return width * height; }
  int free_count() const;
};

// Throws sar::Error unless every GridMap invariant holds.
void validate(const GridMap& map);

// ASCII grid: '.' free, '#' obstacle, 'C' cooperative spawn, 'A' adversarial
// spawn, 'T' target. Lines starting with ';' are comments.
GridMap load_map(std::string_view text);
GridMap load_map_file(const std::string& path);
std::string dump_map(const GridMap& map);

}  // namespace sar
