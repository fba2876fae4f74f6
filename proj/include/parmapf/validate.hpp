/*
 * Solution validator and SOC utilities. Validation replays every feasibility
 * condition: endpoints, per-step adjacency (waits allowed), goal-padded
 * vertex/edge collision freedom, and optionally a constraint set.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cbs_core.hpp"

namespace parmapf {

enum class ViolationKind {
    VertexConflict,
    EdgeConflict,
    Discontinuity,
    WrongStart,
    WrongGoal,
    ConstraintBreach,
};

struct Violation {
    ViolationKind kind;
    int agent{-1};
    int agent2{-1};
    Vertex v;
    Vertex from;
    int time{-1};
    std::string detail;
};

struct ValidationReport {
    bool ok{true};
    std::vector<Violation> violations;
    int64_t soc{0};
    int makespan{0};
};

// Cost of a single path under SOC semantics: the final arrival time at the
// path's last cell (waits there after final arrival are free).
inline int64_t path_cost(const Path& path) {
    int t = static_cast<int>(path.size()) - 1;
    while (t > 0 && path[t - 1] == path.back()) --t;
    return t;
}

inline ValidationReport validate_solution(const Instance& instance,
                                          const std::vector<Path>& paths,
                                          std::span<const Constraint> constraints = {}) {
    if (static_cast<int>(paths.size()) != instance.num_robots())
        throw std::invalid_argument("validate_solution: wrong number of paths");
    const GridMap& map = *instance.map;
    ValidationReport report;
    auto add = [&](Violation v) { report.violations.push_back(std::move(v)); };

    for (int i = 0; i < instance.num_robots(); ++i) {
        const Path& p = paths[i];
        if (p.empty()) {
            add({ViolationKind::Discontinuity, i, -1, {}, {}, 0, "empty path"});
            continue;
        }
        if (p.front() != instance.starts[i])
            add({ViolationKind::WrongStart, i, -1, p.front(), {}, 0, ""});
        if (p.back() != instance.goals[i])
            add({ViolationKind::WrongGoal, i, -1, p.back(), {}, static_cast<int>(p.size()) - 1,
                 ""});
        for (int t = 0; t < static_cast<int>(p.size()); ++t) {
            if (!map.passable(p[t])) {
                add({ViolationKind::Discontinuity, i, -1, p[t], {}, t,
                     "cell blocked or out of bounds"});
                continue;
            }
            if (t > 0 && p[t] != p[t - 1]) {
                int manhattan = std::abs(p[t].x - p[t - 1].x) + std::abs(p[t].y - p[t - 1].y);
                if (manhattan != 1)
                    add({ViolationKind::Discontinuity, i, -1, p[t], p[t - 1], t,
                         "non-adjacent step"});
            }
        }
        report.soc += path_cost(p);
        report.makespan = std::max(report.makespan, static_cast<int>(p.size()) - 1);
    }

    std::vector<const Path*> views(paths.size());
    for (size_t i = 0; i < paths.size(); ++i) views[i] = &paths[i];
    for (const Conflict& c : detect_conflicts_brute(views)) {
        if (c.kind == ConstraintKind::Vertex)
            add({ViolationKind::VertexConflict, c.a1, c.a2, c.v, {}, c.time, ""});
        else
            add({ViolationKind::EdgeConflict, c.a1, c.a2, c.v, c.from, c.time, ""});
    }

    for (const Constraint& c : constraints) {
        if (c.agent < 0 || c.agent >= static_cast<int>(paths.size())) continue;
        const Path& p = paths[c.agent];
        if (p.empty()) continue;
        if (c.kind == ConstraintKind::Vertex) {
            if (padded_at(p, c.time) == c.v)
                add({ViolationKind::ConstraintBreach, c.agent, -1, c.v, {}, c.time,
                     "vertex constraint"});
        } else if (c.time >= 1 && c.time < static_cast<int>(p.size()) &&
                   p[c.time] == c.v && p[c.time - 1] == c.from) {
            add({ViolationKind::ConstraintBreach, c.agent, -1, c.v, c.from, c.time,
                 "edge constraint"});
        }
    }

    report.ok = report.violations.empty();
    return report;
}

// Sum over robots of the unconstrained shortest distance start -> goal;
// the denominator of the suboptimality ratio on instances whose optimum is
// out of reach.
inline int64_t soc_lower_bound(const Instance& instance) {
    int64_t sum = 0;
    for (int i = 0; i < instance.num_robots(); ++i) {
        DistField d(*instance.map, instance.goals[i]);
        auto dist = d.at(instance.starts[i]);
        if (!dist)
            throw std::invalid_argument("soc_lower_bound: goal unreachable for robot " +
                                        std::to_string(i));
        sum += *dist;
    }
    return sum;
}

}  // namespace parmapf
