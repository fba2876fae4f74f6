/*
 * Conflict avoidance table: occupancy of other robots' paths, keyed by
 * (vertex, time) and (directed edge, time), used to break low-level ties
 * toward fewer conflicts and to score bypass candidates.
 *
 * A robot is treated as parked at its path's last cell from arrival onward;
 * parked occupancy is answered by rule rather than materialized, so memory
 * stays O(sum of path lengths).
 */

#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "grid.hpp"

namespace parmapf {

class ConflictAvoidanceTable {
public:
    explicit ConflictAvoidanceTable(const GridMap& map)
        : num_cells_(static_cast<uint64_t>(map.num_cells())), width_(map.width()) {}

    void add_path(int agent, const Path& path) {
        if (path.empty()) throw std::invalid_argument("CAT: empty path");
        const int arrival = static_cast<int>(path.size()) - 1;
        for (int t = 0; t <= arrival; ++t) {
            vertex_occ_[vkey(path[t], t)].push_back(agent);
            if (t > 0 && path[t] != path[t - 1])
                edge_occ_[ekey(path[t - 1], path[t], t)].push_back(agent);
        }
        parked_[idx(path.back())].push_back({agent, arrival});
        if (arrival > horizon_) horizon_ = arrival;
    }

    // Max arrival time over indexed paths.
    int horizon() const { return horizon_; }

    // Robots (other than `exclude`) occupying v at time t, parked included.
    int count_vertex(Vertex v, int t, int exclude = -1) const {
        int n = 0;
        if (auto it = vertex_occ_.find(vkey(v, t)); it != vertex_occ_.end())
            for (int a : it->second)
                if (a != exclude) ++n;
        if (auto it = parked_.find(idx(v)); it != parked_.end())
            for (const auto& [a, arrival] : it->second)
                if (a != exclude && t > arrival) ++n;
        return n;
    }

    // Robots (other than `exclude`) traversing from->to with arrival time t.
    int count_edge(Vertex from, Vertex to, int t, int exclude = -1) const {
        auto it = edge_occ_.find(ekey(from, to, t));
        if (it == edge_occ_.end()) return 0;
        int n = 0;
        for (int a : it->second)
            if (a != exclude) ++n;
        return n;
    }

private:
    int idx(Vertex v) const { return v.y * width_ + v.x; }
    uint64_t vkey(Vertex v, int t) const {
        return static_cast<uint64_t>(t) * num_cells_ + idx(v);
    }
    uint64_t ekey(Vertex from, Vertex to, int t) const {
        return (static_cast<uint64_t>(t) * num_cells_ + idx(from)) * num_cells_ + idx(to);
    }

    uint64_t num_cells_;
    int width_;
    int horizon_{0};
    std::unordered_map<uint64_t, std::vector<int32_t>> vertex_occ_;
    std::unordered_map<uint64_t, std::vector<int32_t>> edge_occ_;
    std::unordered_map<int32_t, std::vector<std::pair<int32_t, int32_t>>> parked_;
};

inline ConflictAvoidanceTable build_cat(const GridMap& map,
                                        const std::vector<const Path*>& paths,
                                        int exclude_agent = -1) {
    ConflictAvoidanceTable cat(map);
    for (size_t i = 0; i < paths.size(); ++i)
        if (static_cast<int>(i) != exclude_agent && paths[i]) cat.add_path(static_cast<int>(i), *paths[i]);
    return cat;
}

// Exact number of (vertex or edge) collisions `path` for agent `self` has
// against the paths indexed in `cat`, including collisions at self's goal
// while it is parked there after arrival.
inline int count_path_conflicts(const Path& path, const ConflictAvoidanceTable& cat,
                                int self) {
    int n = cat.count_vertex(path[0], 0, self);
    for (int t = 1; t < static_cast<int>(path.size()); ++t) {
        n += cat.count_vertex(path[t], t, self);
        if (path[t] != path[t - 1]) n += cat.count_edge(path[t], path[t - 1], t, self);
    }
    for (int t = static_cast<int>(path.size()); t <= cat.horizon(); ++t)
        n += cat.count_vertex(path.back(), t, self);
    return n;
}

}  // namespace parmapf
