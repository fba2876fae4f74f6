/*
 * Single-robot constrained focal search over the time-expanded grid: the
 * ECBS low level. Returns a path with cost <= w * fmin together with fmin,
 * a lower bound on the optimal constrained path cost.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <unordered_set>
#include <vector>

#include "cat.hpp"
#include "grid.hpp"

namespace parmapf {

enum class ConstraintKind : uint8_t { Vertex, Edge };

// Vertex: agent may not occupy `v` at `time`.
// Edge:   agent may not traverse `from` -> `v` arriving at `time`.
struct Constraint {
    int agent{0};
    ConstraintKind kind{ConstraintKind::Vertex};
    Vertex v;
    Vertex from;  // meaningful for Edge only
    int time{0};
};

struct TimedState {
    Vertex vertex;
    int time{0};

    friend bool operator==(const TimedState& a, const TimedState& b) {
        return a.vertex == b.vertex && a.time == b.time;
    }
};

struct PlanResult {
    Path path;  // path[t] = cell at timestep t; ends at first accepted arrival
    int fmin{0};

    int cost() const { return static_cast<int>(path.size()) - 1; }
};

inline bool within_band(int64_t value, double w, int64_t bound) {
    return static_cast<double>(value) <= w * static_cast<double>(bound);
}

namespace detail {

struct LowNode {
    Vertex v;
    int t;
    int f;
    int conflicts;
    uint64_t order;
    const LowNode* parent;
};

struct LowOpenCmp {
    bool operator()(const LowNode* a, const LowNode* b) const {
        if (a->f != b->f) return a->f > b->f;
        return a->order > b->order;
    }
};

struct LowFocalCmp {
    // fewer CAT conflicts, then lower f, then lower h (= f - t), then FIFO.
    bool operator()(const LowNode* a, const LowNode* b) const {
        if (a->conflicts != b->conflicts) return a->conflicts > b->conflicts;
        if (a->f != b->f) return a->f > b->f;
        int ha = a->f - a->t, hb = b->f - b->t;
        if (ha != hb) return ha > hb;
        return a->order > b->order;
    }
};

}  // namespace detail

// Plans a path start -> goal obeying `constraints` (all for this agent).
// Wait moves are legal. The path must stay clear of constraints forever
// after arrival (the agent parks at goal), so arrival at time t is accepted
// only if no vertex constraint on the goal has time >= t. Ties inside the
// focal band prefer fewer collisions against `cat` (self = exclude_agent).
// Returns nullopt when no constrained path exists within the time horizon
// |V| + latest constraint time + number of constraints.
inline std::optional<PlanResult> plan_focal_path(
    const GridMap& map, const DistField& dist, Vertex start, Vertex goal,
    std::span<const Constraint> constraints, const ConflictAvoidanceTable* cat, double w,
    int exclude_agent = -1, const std::chrono::steady_clock::time_point* deadline = nullptr) {
    if (w < 1.0) throw std::invalid_argument("plan_focal_path: w must be >= 1");
    if (!map.passable(start) || !map.passable(goal))
        throw std::invalid_argument("plan_focal_path: start or goal blocked");
    if (!dist.reachable(start)) return std::nullopt;

    int latest_ct = 0;
    int latest_goal_ct = 0;  // latest vertex constraint sitting on the goal
    for (const Constraint& c : constraints) {
        latest_ct = std::max(latest_ct, c.time);
        if (c.kind == ConstraintKind::Vertex && c.v == goal)
            latest_goal_ct = std::max(latest_goal_ct, c.time);
    }
    const int t_max = static_cast<int>(map.num_passable()) + latest_ct +
                      static_cast<int>(constraints.size());
    // Earliest legal arrival given constraints parked on the goal.
    const int goal_floor = latest_goal_ct == 0 ? 0 : latest_goal_ct + 1;

    auto violates = [&](Vertex from, Vertex to, int t) {
        for (const Constraint& c : constraints) {
            if (c.time != t) continue;
            if (c.kind == ConstraintKind::Vertex) {
                if (c.v == to) return true;
            } else if (c.v == to && c.from == from) {
                return true;
            }
        }
        return false;
    };

    auto fvalue = [&](Vertex v, int t) {
        return std::max(t + dist.unchecked(v), goal_floor);
    };

    std::deque<detail::LowNode> arena;
    uint64_t next_order = 0;
    auto make_node = [&](Vertex v, int t, int conflicts, const detail::LowNode* parent) {
        arena.push_back(detail::LowNode{v, t, fvalue(v, t), conflicts, next_order++, parent});
        return &arena.back();
    };

    using OpenQueue = std::priority_queue<const detail::LowNode*,
                                          std::vector<const detail::LowNode*>,
                                          detail::LowOpenCmp>;
    using FocalQueue = std::priority_queue<const detail::LowNode*,
                                           std::vector<const detail::LowNode*>,
                                           detail::LowFocalCmp>;
    OpenQueue open;
    FocalQueue focal;
    std::unordered_set<uint64_t> closed;
    const uint64_t cells = map.num_cells();
    auto key = [&](Vertex v, int t) {
        return static_cast<uint64_t>(t) * cells + static_cast<uint64_t>(map.index(v));
    };
    auto is_closed = [&](const detail::LowNode* n) { return closed.count(key(n->v, n->t)) > 0; };

    const detail::LowNode* root = make_node(start, 0, 0, nullptr);
    open.push(root);
    focal.push(root);
    int fmin = root->f;

    uint64_t pops = 0;
    while (!open.empty()) {
        // Deadline polled sparsely; an aborted probe reports infeasible and
        // the caller's own timeout check fires right after.
        if (deadline && (++pops & 0xFFF) == 0 && std::chrono::steady_clock::now() >= *deadline)
            return std::nullopt;
        while (!open.empty() && is_closed(open.top())) open.pop();
        if (open.empty()) break;

        if (open.top()->f != fmin) {
            // Lower bound rose: rebuild the focal list for the new band.
            fmin = open.top()->f;
            focal = FocalQueue();
            std::vector<const detail::LowNode*> stash;
            while (!open.empty()) {
                const detail::LowNode* top = open.top();
                open.pop();
                if (is_closed(top)) continue;
                stash.push_back(top);
                if (!within_band(top->f, w, fmin)) break;
                focal.push(top);
            }
            for (const detail::LowNode* s : stash) open.push(s);
        }

        const detail::LowNode* n = nullptr;
        while (!focal.empty()) {
            const detail::LowNode* top = focal.top();
            focal.pop();
            if (!is_closed(top)) {
                n = top;
                break;
            }
        }
        if (!n) continue;  // focal exhausted under the current band
        closed.insert(key(n->v, n->t));

        if (n->v == goal && n->t >= goal_floor) {
            Path path(static_cast<size_t>(n->t) + 1);
            for (const detail::LowNode* p = n; p; p = p->parent) path[p->t] = p->v;
            return PlanResult{std::move(path), fmin};
        }

        if (n->t >= t_max) continue;
        const int t2 = n->t + 1;
        auto expand = [&](Vertex v2) {
            if (!map.passable(v2) || !dist.reachable(v2)) return;
            if (closed.count(key(v2, t2))) return;
            if (violates(n->v, v2, t2)) return;
            int dc = 0;
            if (cat) {
                dc = cat->count_vertex(v2, t2, exclude_agent);
                if (v2 != n->v) dc += cat->count_edge(v2, n->v, t2, exclude_agent);
            }
            const detail::LowNode* m = make_node(v2, t2, n->conflicts + dc, n);
            open.push(m);
            if (within_band(m->f, w, fmin)) focal.push(m);
        };
        for (const Vertex& v2 : GridMap::neighbor_candidates(n->v)) expand(v2);
        expand(n->v);  // wait
    }
    return std::nullopt;
}

}  // namespace parmapf
