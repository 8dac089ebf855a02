#include "sar/grid.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "sar/error.h"

namespace sar {

namespace {

std::string where(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

void check_distinct(const std::vector<Cell>& cells, const char* what) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = i + 1; j < cells.size(); ++j) {
      if (cells[i] == cells[j]) {
        throw Error(Errc::kInvalidMap, std::string("duplicate ") + what + " at " + where(cells[i]));
      }
    }
  }
}

}  // namespace

int GridMap::free_count() const {
  return static_cast<int>(std::count(cells.begin(), cells.end(), Terrain::kFree));
}

void validate(const GridMap& map) {
  if (map.width <= 0 || map.height <= 0) throw Error(Errc::kZeroDimensions, "empty grid");
  if (map.cells.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw Error(Errc::kInvalidMap, "cell array does not match dimensions");
  }
  auto check_free = [&](const std::vector<Cell>& cells, const char* what) {
    for (Cell c : cells) {
      if (!map.in_bounds(c)) throw Error(Errc::kInvalidMap, std::string(what) + " out of bounds at " + where(c));
      if (!map.is_free(c)) throw Error(Errc::kSpawnOnObstacle, std::string(what) + " on obstacle at " + where(c));
    }
  };
  check_free(map.coop_spawns, "cooperative spawn");
  check_free(map.adv_spawns, "adversarial spawn");
  check_free(map.targets, "target");
  check_distinct(map.targets, "target");
  std::vector<Cell> spawns = map.coop_spawns;
  spawns.insert(spawns.end(), map.adv_spawns.begin(), map.adv_spawns.end());
  check_distinct(spawns, "spawn");
}

GridMap load_map(std::string_view text) {
  GridMap map;
  std::vector<std::string_view> rows;
  std::vector<int> row_lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == ';') continue;
    rows.push_back(line);
    row_lines.push_back(line_no);
    if (end == text.size()) break;
  }
  while (!rows.empty() && rows.back().empty()) {
    rows.pop_back();
    row_lines.pop_back();
  }
  if (rows.empty() || rows.front().empty()) throw Error(Errc::kZeroDimensions, "map has no cells");

  map.width = static_cast<int>(rows.front().size());
  map.height = static_cast<int>(rows.size());
  map.cells.assign(static_cast<std::size_t>(map.width) * map.height, Terrain::kFree);
  for (int y = 0; y < map.height; ++y) {
    if (static_cast<int>(rows[y].size()) != map.width) {
      throw Error(Errc::kRaggedRows, "line " + std::to_string(row_lines[y]) + " has " +
                                         std::to_string(rows[y].size()) + " cells, expected " +
                                         std::to_string(map.width));
    }
    for (int x = 0; x < map.width; ++x) {
      Cell c{x, y};
      switch (rows[y][x]) {
        case '.': break;
        case '#': map.cells[map.index(c)] = Terrain::kObstacle; break;
        case 'C': map.coop_spawns.push_back(c); break;
        case 'A': map.adv_spawns.push_back(c); break;
        case 'T': map.targets.push_back(c); break;
        default:
          throw Error(Errc::kUnknownGlyph, "line " + std::to_string(row_lines[y]) + " column " +
                                               std::to_string(x + 1) + ": '" + rows[y][x] + "'");
      }
    }
  }
  validate(map);
  return map;
}

GridMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open map " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

std::string dump_map(const GridMap& map) {
  std::vector<std::string> rows(map.height, std::string(map.width, '.'));
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (map.cells[map.index({x, y})] == Terrain::kObstacle) rows[y][x] = '#';
    }
  }
  for (Cell c : map.coop_spawns) rows[c.y][c.x] = 'C';
  for (Cell c : map.adv_spawns) rows[c.y][c.x] = 'A';
  for (Cell c : map.targets) rows[c.y][c.x] = 'T';
  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace sar
