/*
 * 4-connected grid model and MovingAI .map ingestion.
 *
 * Coordinate convention used everywhere in this library:
 * (x, y) = (column, row), origin (0,0) at the top-left cell, matching the
 * row order of the MovingAI map format.
 */

#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace parmapf {

struct Vertex {
    int x{0};
    int y{0};

    friend bool operator==(const Vertex& a, const Vertex& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator!=(const Vertex& a, const Vertex& b) { return !(a == b); }
    friend bool operator<(const Vertex& a, const Vertex& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

// A timed path: path[t] is the cell occupied at timestep t.
using Path = std::vector<Vertex>;

class MapParseError : public std::runtime_error {
public:
    enum class Kind { MalformedHeader, RowCountMismatch, RowLengthMismatch, UnknownGlyph };

    MapParseError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class GridMap {
public:
    GridMap(int width, int height, std::vector<char> terrain)
        : width_(width), height_(height), terrain_(std::move(terrain)) {
        if (width_ < 1 || height_ < 1)
            throw std::invalid_argument("GridMap: width and height must be >= 1");
        if (terrain_.size() != static_cast<size_t>(width_) * height_)
            throw std::invalid_argument("GridMap: terrain size mismatch");
        passable_.resize(terrain_.size());
        for (size_t i = 0; i < terrain_.size(); ++i)
            passable_[i] = is_passable_glyph(terrain_[i]);
    }

    static GridMap empty(int width, int height) {
        return GridMap(width, height,
                       std::vector<char>(static_cast<size_t>(width) * height, '.'));
    }

    // Test/diagnostic helper: one string per row, MovingAI glyphs.
    static GridMap from_rows(const std::vector<std::string>& rows) {
        if (rows.empty()) throw std::invalid_argument("from_rows: no rows");
        std::vector<char> t;
        for (const auto& r : rows) {
            if (r.size() != rows[0].size())
                throw std::invalid_argument("from_rows: ragged rows");
            for (char c : r) {
                if (!is_known_glyph(c))
                    throw MapParseError(MapParseError::Kind::UnknownGlyph,
                                        std::string("unknown glyph '") + c + "'");
                t.push_back(c);
            }
        }
        return GridMap(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()),
                       std::move(t));
    }

    static GridMap parse(std::istream& in);
    static GridMap parse(const std::string& text) {
        std::istringstream s(text);
        return parse(s);
    }

    std::string serialize() const {
        std::string out = "type octile\nheight " + std::to_string(height_) +
                          "\nwidth " + std::to_string(width_) + "\nmap\n";
        for (int y = 0; y < height_; ++y) {
            out.append(terrain_.begin() + static_cast<size_t>(y) * width_,
                       terrain_.begin() + static_cast<size_t>(y + 1) * width_);
            out.push_back('\n');
        }
        return out;
    }

    int width() const { return width_; }
    int height() const { return height_; }
    size_t num_cells() const { return terrain_.size(); }

    bool in_bounds(Vertex v) const {
        return v.x >= 0 && v.x < width_ && v.y >= 0 && v.y < height_;
    }
    bool passable(Vertex v) const { return in_bounds(v) && passable_[index(v)]; }

    int index(Vertex v) const { return v.y * width_ + v.x; }
    Vertex vertex(int idx) const { return Vertex{idx % width_, idx / width_}; }

    // N(v) = {(x±1,y),(x,y±1)} ∩ passable cells; v itself is never included.
    std::vector<Vertex> neighbors(Vertex v) const {
        if (!passable(v))
            throw std::invalid_argument("neighbors: vertex blocked or out of bounds");
        std::vector<Vertex> out;
        out.reserve(4);
        for (const Vertex& n : neighbor_candidates(v))
            if (passable(n)) out.push_back(n);
        return out;
    }

    static std::array<Vertex, 4> neighbor_candidates(Vertex v) {
        return {Vertex{v.x + 1, v.y}, Vertex{v.x - 1, v.y}, Vertex{v.x, v.y + 1},
                Vertex{v.x, v.y - 1}};
    }

    std::vector<Vertex> passable_cells() const {
        std::vector<Vertex> out;
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x)
                if (passable_[y * width_ + x]) out.push_back(Vertex{x, y});
        return out;
    }

    size_t num_passable() const {
        size_t k = 0;
        for (auto p : passable_) k += p;
        return k;
    }

    static bool is_passable_glyph(char c) { return c == '.' || c == 'G'; }
    static bool is_blocked_glyph(char c) { return c == '@' || c == 'T' || c == 'O'; }
    static bool is_known_glyph(char c) { return is_passable_glyph(c) || is_blocked_glyph(c); }

private:
    int width_;
    int height_;
    std::vector<char> terrain_;
    std::vector<uint8_t> passable_;
};

inline GridMap GridMap::parse(std::istream& in) {
    auto fail_header = [](const std::string& why) -> void {
        throw MapParseError(MapParseError::Kind::MalformedHeader, "malformed header: " + why);
    };

    std::string line;
    if (!std::getline(in, line) || line.rfind("type", 0) != 0)
        fail_header("missing 'type' line");

    // height/width accepted in either order, both required before 'map'.
    int width = -1, height = -1;
    for (int i = 0; i < 2; ++i) {
        if (!std::getline(in, line)) fail_header("truncated before 'map'");
        std::istringstream ls(line);
        std::string key;
        long value = -1;
        ls >> key >> value;
        if (key == "height")
            height = static_cast<int>(value);
        else if (key == "width")
            width = static_cast<int>(value);
        else
            fail_header("expected 'height'/'width', got '" + line + "'");
        if (value < 1) fail_header("non-positive dimension in '" + line + "'");
    }
    if (!std::getline(in, line) || line != "map") fail_header("missing 'map' line");

    std::vector<char> terrain;
    terrain.reserve(static_cast<size_t>(width) * height);
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (rows == height)
            throw MapParseError(MapParseError::Kind::RowCountMismatch,
                                "more than " + std::to_string(height) + " map rows");
        if (static_cast<int>(line.size()) != width)
            throw MapParseError(MapParseError::Kind::RowLengthMismatch,
                                "row " + std::to_string(rows) + " has " +
                                    std::to_string(line.size()) + " cells, expected " +
                                    std::to_string(width));
        for (char c : line) {
            if (!is_known_glyph(c))
                throw MapParseError(MapParseError::Kind::UnknownGlyph,
                                    std::string("unknown glyph '") + c + "' in row " +
                                        std::to_string(rows));
            terrain.push_back(c);
        }
        ++rows;
    }
    if (rows != height)
        throw MapParseError(MapParseError::Kind::RowCountMismatch,
                            "got " + std::to_string(rows) + " map rows, expected " +
                                std::to_string(height));
    return GridMap(width, height, std::move(terrain));
}

// Exact distance-to-goal field from a reverse BFS; the low-level heuristic.
class DistField {
public:
    DistField(const GridMap& map, Vertex goal) : goal_(goal), width_(map.width()) {
        if (!map.passable(goal))
            throw std::invalid_argument("bfs_dist: goal blocked or out of bounds");
        d_.assign(map.num_cells(), kUnreachable);
        d_[map.index(goal)] = 0;
        std::queue<Vertex> q;
        q.push(goal);
        while (!q.empty()) {
            Vertex v = q.front();
            q.pop();
            int32_t dv = d_[map.index(v)];
            for (const Vertex& n : GridMap::neighbor_candidates(v)) {
                if (!map.passable(n)) continue;
                int32_t& dn = d_[map.index(n)];
                if (dn == kUnreachable) {
                    dn = dv + 1;
                    q.push(n);
                }
            }
        }
    }

    Vertex goal() const { return goal_; }

    std::optional<int> at(Vertex v) const {
        int32_t d = d_[idx(v)];
        if (d == kUnreachable) return std::nullopt;
        return d;
    }
    bool reachable(Vertex v) const { return d_[idx(v)] != kUnreachable; }

    // Hot-path accessor; caller must know v is reachable.
    int32_t unchecked(Vertex v) const { return d_[idx(v)]; }

private:
    static constexpr int32_t kUnreachable = -1;
    int idx(Vertex v) const { return v.y * width_ + v.x; }

    Vertex goal_;
    int width_;
    std::vector<int32_t> d_;
};

inline DistField bfs_dist(const GridMap& map, Vertex goal) { return DistField(map, goal); }

}  // namespace parmapf
