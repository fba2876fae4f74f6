/*
 * Shared CBS machinery: conflicts and the three detection strategies,
 * high-level nodes, node splitting, disjoint-conflict extraction, and the
 * bypass test.
 *
 * Conflict lists are always kept in canonical order: (time, a1, a2, kind),
 * vertex before edge. Splitting picks the first conflict of that order
 * (earliest time, lowest agent pair).
 */

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cat.hpp"
#include "grid.hpp"
#include "low_level.hpp"
#include "scenario.hpp"

namespace parmapf {

// Vertex conflict: a1 and a2 both at `v` at `time`.
// Edge conflict: a1 traverses from->v while a2 traverses v->from, arriving
// at `time` (a swap; from != v).
struct Conflict {
    int a1{0};
    int a2{0};
    ConstraintKind kind{ConstraintKind::Vertex};
    Vertex v;
    Vertex from;  // meaningful for Edge only
    int time{0};

    friend bool operator==(const Conflict& x, const Conflict& y) {
        return x.a1 == y.a1 && x.a2 == y.a2 && x.kind == y.kind && x.v == y.v &&
               (x.kind == ConstraintKind::Vertex || x.from == y.from) && x.time == y.time;
    }
};

inline bool conflict_order(const Conflict& x, const Conflict& y) {
    if (x.time != y.time) return x.time < y.time;
    if (x.a1 != y.a1) return x.a1 < y.a1;
    if (x.a2 != y.a2) return x.a2 < y.a2;
    return static_cast<int>(x.kind) < static_cast<int>(y.kind);
}

inline Vertex padded_at(const Path& p, int t) {
    return t < static_cast<int>(p.size()) ? p[static_cast<size_t>(t)] : p.back();
}

inline int paths_makespan(const std::vector<const Path*>& paths) {
    int m = 0;
    for (const Path* p : paths) m = std::max(m, static_cast<int>(p->size()) - 1);
    return m;
}

// O(n^2 T): every pair of robots at every timestep, paths padded at their
// goals. The reference detector the other two are checked against.
inline std::vector<Conflict> detect_conflicts_brute(const std::vector<const Path*>& paths) {
    std::vector<Conflict> out;
    const int n = static_cast<int>(paths.size());
    const int makespan = paths_makespan(paths);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            for (int t = 0; t <= makespan; ++t) {
                Vertex pi = padded_at(*paths[i], t);
                Vertex pj = padded_at(*paths[j], t);
                if (pi == pj)
                    out.push_back({i, j, ConstraintKind::Vertex, pi, {}, t});
                if (t >= 1) {
                    Vertex qi = padded_at(*paths[i], t - 1);
                    Vertex qj = padded_at(*paths[j], t - 1);
                    if (qi != pi && qi == pj && qj == pi)
                        out.push_back({i, j, ConstraintKind::Edge, pi, qi, t});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

// O(n * (t_hi - t_lo)) hash-indexed detector for conflicts with
// t in [t_lo, t_hi). Edge conflicts belong to the window containing their
// arrival timestep, so windows partitioning [0, makespan+1) yield exactly
// the brute-force set.
inline std::vector<Conflict> detect_conflicts_windowed(const std::vector<const Path*>& paths,
                                                       int t_lo, int t_hi) {
    if (t_lo < 0 || t_hi < t_lo)
        throw std::invalid_argument("detect_conflicts_windowed: bad window");
    std::vector<Conflict> out;
    const int n = static_cast<int>(paths.size());
    if (n == 0) return out;
    const int makespan = paths_makespan(paths);
    const int end = std::min(t_hi, makespan + 1);

    // Key spaces are disjoint per t; one map per kind suffices.
    std::unordered_map<uint64_t, std::vector<int>> vertex_at;
    std::unordered_map<uint64_t, std::vector<int>> move_at;
    auto vkey = [&](Vertex v, int t) {
        return (static_cast<uint64_t>(t) << 32) ^ (static_cast<uint64_t>(v.y) << 16) ^
               static_cast<uint64_t>(v.x);
    };
    auto mkey = [&](Vertex u, Vertex v, int t) {
        return (static_cast<uint64_t>(t) << 48) ^ (static_cast<uint64_t>(u.y) << 36) ^
               (static_cast<uint64_t>(u.x) << 24) ^ (static_cast<uint64_t>(v.y) << 12) ^
               static_cast<uint64_t>(v.x);
    };

    for (int i = 0; i < n; ++i) {
        for (int t = t_lo; t < end; ++t) {
            Vertex pi = padded_at(*paths[i], t);
            auto& bucket = vertex_at[vkey(pi, t)];
            for (int j : bucket) out.push_back({j, i, ConstraintKind::Vertex, pi, {}, t});
            bucket.push_back(i);
            if (t >= 1) {
                Vertex qi = padded_at(*paths[i], t - 1);
                if (qi != pi) {
                    if (auto it = move_at.find(mkey(pi, qi, t)); it != move_at.end())
                        for (int j : it->second)
                            // j moved pi->qi; i moved qi->pi; a1 = j.
                            out.push_back({j, i, ConstraintKind::Edge, qi, pi, t});
                    move_at[mkey(qi, pi, t)].push_back(i);
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

// O(nT) incremental recount after only `agent`'s path changed: conflicts
// not involving `agent` are kept from `old`, the rest are recomputed.
inline std::vector<Conflict> recount_after_replan(const std::vector<Conflict>& old,
                                                  const std::vector<const Path*>& paths,
                                                  int agent) {
    std::vector<Conflict> out;
    out.reserve(old.size());
    for (const Conflict& c : old)
        if (c.a1 != agent && c.a2 != agent) out.push_back(c);

    const int n = static_cast<int>(paths.size());
    const int makespan = paths_makespan(paths);
    const Path& pa = *paths[agent];
    for (int j = 0; j < n; ++j) {
        if (j == agent) continue;
        const Path& pj = *paths[j];
        const int a1 = std::min(agent, j), a2 = std::max(agent, j);
        for (int t = 0; t <= makespan; ++t) {
            Vertex x = padded_at(pa, t);
            Vertex y = padded_at(pj, t);
            if (x == y) out.push_back({a1, a2, ConstraintKind::Vertex, x, {}, t});
            if (t >= 1) {
                Vertex px = padded_at(pa, t - 1);
                Vertex py = padded_at(pj, t - 1);
                if (px != x && px == y && py == x) {
                    Vertex a1_to = a1 == agent ? x : y;
                    Vertex a1_from = a1 == agent ? px : py;
                    out.push_back({a1, a2, ConstraintKind::Edge, a1_to, a1_from, t});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

// Greedy-maximal subset with pairwise disjoint agent pairs, scanned in
// canonical conflict order.
inline std::vector<Conflict> find_disjoint_conflicts(std::vector<Conflict> conflicts) {
    std::sort(conflicts.begin(), conflicts.end(), conflict_order);
    std::vector<Conflict> out;
    std::unordered_set<int> used;
    for (const Conflict& c : conflicts) {
        if (used.count(c.a1) || used.count(c.a2)) continue;
        used.insert(c.a1);
        used.insert(c.a2);
        out.push_back(c);
    }
    return out;
}

struct HighLevelNode {
    std::vector<std::shared_ptr<const Path>> paths;
    // Per-agent constraint sets, shared with ancestors (copy-on-write).
    std::vector<std::shared_ptr<const std::vector<Constraint>>> constraints;
    std::vector<int32_t> fmins;
    int64_t cost{0};
    int64_t lb{0};
    std::vector<Conflict> conflicts;
    int depth{0};
    uint64_t id{0};
    bool expanded{false};
    bool in_focal{false};

    std::vector<const Path*> paths_view() const {
        std::vector<const Path*> v(paths.size());
        for (size_t i = 0; i < paths.size(); ++i) v[i] = paths[i].get();
        return v;
    }
    std::vector<Constraint> agent_constraints(int agent) const {
        return constraints[agent] ? *constraints[agent] : std::vector<Constraint>{};
    }
};

using NodePtr = std::shared_ptr<HighLevelNode>;

struct SearchCounters {
    uint64_t expanded{0};
    uint64_t generated{0};  // root + every child construction attempt
    uint64_t pruned{0};     // attempts whose replan was infeasible
};

// Read-only per-solve context shared by all workers.
struct PlannerContext {
    const GridMap* map;
    std::vector<Vertex> starts;
    std::vector<Vertex> goals;
    std::vector<DistField> dists;  // per agent, distance-to-goal
    double w{2.0};
    std::chrono::steady_clock::time_point deadline;

    int num_robots() const { return static_cast<int>(starts.size()); }
    bool timed_out() const { return std::chrono::steady_clock::now() >= deadline; }

    static PlannerContext build(const Instance& instance, double w, double timeout_s) {
        if (w < 1.0) throw std::invalid_argument("solve: w must be >= 1");
        if (timeout_s <= 0.0) throw std::invalid_argument("solve: timeout must be > 0");
        PlannerContext ctx;
        ctx.map = instance.map.get();
        ctx.starts = instance.starts;
        ctx.goals = instance.goals;
        ctx.dists.reserve(instance.goals.size());
        for (const Vertex& g : instance.goals) ctx.dists.emplace_back(*instance.map, g);
        ctx.w = w;
        ctx.deadline = std::chrono::steady_clock::now() +
                       std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double>(timeout_s));
        return ctx;
    }
};

// Root node: sequential single-robot focal searches in index order, each
// planned without constraints but against a CAT of the already planned
// robots' paths. Returns nullptr on deadline or an unreachable goal.
inline NodePtr build_root(const PlannerContext& ctx, SearchCounters& counters) {
    const int n = ctx.num_robots();
    auto node = std::make_shared<HighLevelNode>();
    node->paths.resize(n);
    node->constraints.assign(n, nullptr);
    node->fmins.resize(n);
    ConflictAvoidanceTable cat(*ctx.map);
    for (int i = 0; i < n; ++i) {
        if (ctx.timed_out()) return nullptr;
        auto res = plan_focal_path(*ctx.map, ctx.dists[i], ctx.starts[i], ctx.goals[i], {},
                                   &cat, ctx.w, i, &ctx.deadline);
        if (!res) return nullptr;
        node->cost += res->cost();
        node->lb += res->fmin;
        node->fmins[i] = res->fmin;
        cat.add_path(i, res->path);
        node->paths[i] = std::make_shared<const Path>(std::move(res->path));
    }
    node->conflicts = detect_conflicts_windowed(node->paths_view(), 0,
                                                paths_makespan(node->paths_view()) + 1);
    counters.generated += 1;
    return node;
}

inline Constraint constraint_for(const Conflict& c, bool second_agent) {
    if (c.kind == ConstraintKind::Vertex)
        return Constraint{second_agent ? c.a2 : c.a1, ConstraintKind::Vertex, c.v, {}, c.time};
    // a1 traverses from->v; a2 traverses v->from.
    if (!second_agent) return Constraint{c.a1, ConstraintKind::Edge, c.v, c.from, c.time};
    return Constraint{c.a2, ConstraintKind::Edge, c.from, c.v, c.time};
}

// Splits `node` on `conflict`: child k forbids agent k's side of the
// conflict and replans that agent. Children whose replan is infeasible are
// dropped (returned as nullptr). `cat` must index `node`'s paths.
inline std::array<NodePtr, 2> split_node(const PlannerContext& ctx, const NodePtr& node,
                                         const Conflict& conflict,
                                         const ConflictAvoidanceTable& cat,
                                         SearchCounters& counters) {
    std::array<NodePtr, 2> children{nullptr, nullptr};
    for (int k = 0; k < 2; ++k) {
        ++counters.generated;
        const Constraint added = constraint_for(conflict, k == 1);
        const int agent = added.agent;

        auto cset = std::make_shared<std::vector<Constraint>>(node->agent_constraints(agent));
        cset->push_back(added);
        auto res = plan_focal_path(*ctx.map, ctx.dists[agent], ctx.starts[agent],
                                   ctx.goals[agent], *cset, &cat, ctx.w, agent, &ctx.deadline);
        if (!res) {
            ++counters.pruned;
            continue;
        }

        auto child = std::make_shared<HighLevelNode>();
        child->paths = node->paths;
        child->constraints = node->constraints;
        child->constraints[agent] = std::move(cset);
        child->fmins = node->fmins;
        child->depth = node->depth + 1;

        // An added constraint cannot lower the constrained optimum, so the
        // parent's per-agent bound remains valid; taking the max pins the
        // monotone-lb invariant exactly.
        const int32_t fmin = std::max<int32_t>(res->fmin, node->fmins[agent]);
        child->lb = node->lb - node->fmins[agent] + fmin;
        child->fmins[agent] = fmin;
        child->cost = node->cost - (static_cast<int>(node->paths[agent]->size()) - 1) +
                      res->cost();
        child->paths[agent] = std::make_shared<const Path>(std::move(res->path));
        child->conflicts = recount_after_replan(node->conflicts, child->paths_view(), agent);

        if (child->lb < node->lb)
            throw std::logic_error("split_node: child lb fell below parent lb");
        if (!within_band(child->cost, ctx.w, child->lb))
            throw std::logic_error("split_node: child cost exceeds w * lb");
        children[k] = std::move(child);
    }
    return children;
}

struct BypassCandidate {
    int agent{0};
    Path path;
    int old_cost{0};
    int new_cost{0};
};

// Tries each conflicting agent in order (a1 then a2): replan against the
// node's constraints plus a temporary constraint ruling out this conflict,
// with the frozen `cat`. Accepts the first path that keeps the node within
// w * soc_lb, keeps the agent within w * fmin, and strictly reduces the
// agent's collision count against the (frozen) peer paths.
inline std::optional<BypassCandidate> try_bypass(const PlannerContext& ctx,
                                                 const HighLevelNode& node,
                                                 const Conflict& conflict, int64_t soc_lb,
                                                 const ConflictAvoidanceTable& cat) {
    for (int k = 0; k < 2; ++k) {
        const Constraint avoid = constraint_for(conflict, k == 1);
        const int agent = avoid.agent;
        std::vector<Constraint> cset = node.agent_constraints(agent);
        cset.push_back(avoid);
        auto res = plan_focal_path(*ctx.map, ctx.dists[agent], ctx.starts[agent],
                                   ctx.goals[agent], cset, &cat, ctx.w, agent, &ctx.deadline);
        if (!res) continue;

        const int old_cost = static_cast<int>(node.paths[agent]->size()) - 1;
        const int new_cost = res->cost();
        if (!within_band(node.cost - old_cost + new_cost, ctx.w, soc_lb)) continue;
        if (!within_band(new_cost, ctx.w, node.fmins[agent])) continue;
        if (count_path_conflicts(res->path, cat, agent) >=
            count_path_conflicts(*node.paths[agent], cat, agent))
            continue;
        return BypassCandidate{agent, std::move(res->path), old_cost, new_cost};
    }
    return std::nullopt;
}

}  // namespace parmapf
