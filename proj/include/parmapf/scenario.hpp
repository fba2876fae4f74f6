/*
 * Instance ingestion (MovingAI .scen) and seeded instance generators.
 *
 * All randomness goes through mt19937_64 plus rejection-sampled bounded
 * draws, so generated instances are identical across platforms and
 * standard-library implementations for a fixed seed.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grid.hpp"

namespace parmapf {

class ScenParseError : public std::runtime_error {
public:
    enum class Kind { MissingHeader, MalformedRow, BadCoordinate };

    ScenParseError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct Instance {
    std::shared_ptr<const GridMap> map;
    std::vector<Vertex> starts;
    std::vector<Vertex> goals;

    int num_robots() const { return static_cast<int>(starts.size()); }

    static Instance create(std::shared_ptr<const GridMap> map, std::vector<Vertex> starts,
                           std::vector<Vertex> goals) {
        if (!map) throw std::invalid_argument("Instance: null map");
        if (starts.size() != goals.size() || starts.empty())
            throw std::invalid_argument("Instance: need |starts| = |goals| >= 1");
        auto check = [&](const std::vector<Vertex>& vs, const char* what) {
            for (const Vertex& v : vs)
                if (!map->passable(v))
                    throw std::invalid_argument(std::string("Instance: ") + what + " (" +
                                                std::to_string(v.x) + "," + std::to_string(v.y) +
                                                ") blocked or out of bounds");
            std::vector<Vertex> sorted = vs;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw std::invalid_argument(std::string("Instance: duplicate ") + what);
        };
        check(starts, "start");
        check(goals, "goal");
        return Instance{std::move(map), std::move(starts), std::move(goals)};
    }
};

// Uniform draw from [0, bound) by rejection; unbiased and stable across
// platforms (mt19937_64's output sequence is fixed by the standard).
inline uint64_t bounded_draw(std::mt19937_64& rng, uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("bounded_draw: zero bound");
    const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                           std::numeric_limits<uint64_t>::max() % bound;
    uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % bound;
}

// First n elements of a seeded Fisher-Yates shuffle: a uniform sample of n
// distinct elements, order-sensitive and reproducible.
template <typename T>
std::vector<T> sample_distinct(std::vector<T> pool, size_t n, std::mt19937_64& rng) {
    if (n > pool.size()) throw std::invalid_argument("sample_distinct: n exceeds pool");
    for (size_t i = 0; i < n; ++i) {
        size_t j = i + static_cast<size_t>(bounded_draw(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

inline std::vector<std::pair<Vertex, Vertex>> parse_scen(std::istream& in,
                                                         const GridMap& map) {
    std::string line;
    if (!std::getline(in, line))
        throw ScenParseError(ScenParseError::Kind::MissingHeader, "empty scen file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("version", 0) != 0)
        throw ScenParseError(ScenParseError::Kind::MissingHeader,
                             "scen file must start with a 'version' line");

    std::vector<std::pair<Vertex, Vertex>> pairs;
    int row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        std::istringstream ls(line);
        std::string bucket, map_name, opt;
        int w, h, sx, sy, gx, gy;
        if (!(ls >> bucket >> map_name >> w >> h >> sx >> sy >> gx >> gy >> opt))
            throw ScenParseError(ScenParseError::Kind::MalformedRow,
                                 "scen row " + std::to_string(row) + " malformed: '" + line +
                                     "'");
        std::string extra;
        if (ls >> extra)
            throw ScenParseError(ScenParseError::Kind::MalformedRow,
                                 "scen row " + std::to_string(row) + " has trailing fields");
        Vertex s{sx, sy}, g{gx, gy};
        for (Vertex v : {s, g})
            if (!map.passable(v))
                throw ScenParseError(ScenParseError::Kind::BadCoordinate,
                                     "scen row " + std::to_string(row) + ": cell (" +
                                         std::to_string(v.x) + "," + std::to_string(v.y) +
                                         ") blocked or out of bounds");
        pairs.emplace_back(s, g);
    }
    return pairs;
}

inline std::string serialize_scen(const std::string& map_name, const GridMap& map,
                                  const std::vector<std::pair<Vertex, Vertex>>& pairs) {
    std::string out = "version 1\n";
    for (const auto& [s, g] : pairs) {
        DistField d = bfs_dist(map, g);
        auto dist = d.at(s);
        std::ostringstream row;
        row << 0 << '\t' << map_name << '\t' << map.width() << '\t' << map.height() << '\t'
            << s.x << '\t' << s.y << '\t' << g.x << '\t' << g.y << '\t'
            << (dist ? std::to_string(*dist) + ".0" : std::string("-1.0")) << '\n';
        out += row.str();
    }
    return out;
}

inline Instance gen_uniform_random(std::shared_ptr<const GridMap> map, int n, uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_uniform_random: n must be >= 1");
    std::vector<Vertex> cells = map->passable_cells();
    if (static_cast<size_t>(n) > cells.size())
        throw std::invalid_argument("gen_uniform_random: n exceeds passable cell count");
    std::mt19937_64 rng(seed);
    std::vector<Vertex> starts = sample_distinct(cells, n, rng);
    std::vector<Vertex> goals = sample_distinct(cells, n, rng);
    return Instance::create(std::move(map), std::move(starts), std::move(goals));
}

inline int default_corner_region(int side, int n) {
    int region = static_cast<int>(std::ceil(std::sqrt(2.0 * n)));
    return std::min(std::max(region, 1), side);
}

// Obstacle-free side x side map; starts and goals sampled from the
// region x region square in the lower-left corner (the rearrangement regime).
inline Instance gen_corner_rearrangement(int side, int region, int n, uint64_t seed) {
    if (side < 1 || region < 1 || region > side)
        throw std::invalid_argument("gen_corner_rearrangement: need 1 <= region <= side");
    if (n < 1 || static_cast<int64_t>(n) > static_cast<int64_t>(region) * region)
        throw std::invalid_argument("gen_corner_rearrangement: need 1 <= n <= region^2");
    auto map = std::make_shared<const GridMap>(GridMap::empty(side, side));
    std::vector<Vertex> corner;
    corner.reserve(static_cast<size_t>(region) * region);
    for (int y = side - region; y < side; ++y)
        for (int x = 0; x < region; ++x) corner.push_back(Vertex{x, y});
    std::mt19937_64 rng(seed);
    std::vector<Vertex> starts = sample_distinct(corner, n, rng);
    std::vector<Vertex> goals = sample_distinct(corner, n, rng);
    return Instance::create(std::move(map), std::move(starts), std::move(goals));
}

// Seeded w x h map with ~density random obstacles, then reduced to its
// largest connected passable component so generated instances are solvable.
inline GridMap gen_obstacle_map(int width, int height, double density, uint64_t seed) {
    if (width < 1 || height < 1 || density < 0.0 || density >= 1.0)
        throw std::invalid_argument("gen_obstacle_map: bad parameters");
    std::mt19937_64 rng(seed);
    size_t cells = static_cast<size_t>(width) * height;
    std::vector<char> terrain(cells, '.');
    size_t blocked = static_cast<size_t>(density * cells);
    std::vector<size_t> order(cells);
    for (size_t i = 0; i < cells; ++i) order[i] = i;
    auto picks = sample_distinct(order, blocked, rng);
    for (size_t i : picks) terrain[i] = '@';
    GridMap raw(width, height, std::move(terrain));

    // Flood-fill components; keep the biggest, block the rest.
    std::vector<int> comp(cells, -1);
    int best = -1;
    size_t best_size = 0;
    int ncomp = 0;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Vertex v{x, y};
            if (!raw.passable(v) || comp[raw.index(v)] != -1) continue;
            size_t size = 0;
            std::queue<Vertex> q;
            q.push(v);
            comp[raw.index(v)] = ncomp;
            while (!q.empty()) {
                Vertex u = q.front();
                q.pop();
                ++size;
                for (const Vertex& w : GridMap::neighbor_candidates(u)) {
                    if (raw.passable(w) && comp[raw.index(w)] == -1) {
                        comp[raw.index(w)] = ncomp;
                        q.push(w);
                    }
                }
            }
            if (size > best_size) {
                best_size = size;
                best = ncomp;
            }
            ++ncomp;
        }
    }
    std::vector<char> pruned(cells);
    for (size_t i = 0; i < cells; ++i)
        pruned[i] = (comp[i] == best) ? '.' : '@';
    return GridMap(width, height, std::move(pruned));
}

}  // namespace parmapf
