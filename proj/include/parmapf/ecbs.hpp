/*
 * Serial ECBS: open list ordered by lower bound, focal list holding the
 * nodes whose cost is within w * SOC_LB, ordered by conflict count.
 * Optional single-conflict bypass instead of splitting.
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbs_core.hpp"

namespace parmapf {

struct SolveParams {
    double w{2.0};
    double timeout_s{120.0};
    bool bypass{false};
    uint64_t seed{0};
    // Pinned tie-break policies; identifiers kept for the stats record.
    std::string open_tiebreak{"lb,cost,id"};
    std::string focal_tiebreak{"conflicts,cost,id"};

    void validate() const {
        if (w < 1.0) throw std::invalid_argument("SolveParams: w must be >= 1");
        if (timeout_s <= 0.0) throw std::invalid_argument("SolveParams: timeout must be > 0");
        if (open_tiebreak != "lb,cost,id" || focal_tiebreak != "conflicts,cost,id")
            throw std::invalid_argument("SolveParams: unsupported tie-break policy");
    }
};

enum class SolveStatus { Solved, Timeout };

struct SolveOutcome {
    SolveStatus status{SolveStatus::Timeout};
    std::vector<Path> solution;  // populated when solved
    int64_t soc{0};
    int64_t soc_lb{0};
    uint64_t expansions{0};
    uint64_t generated{0};
    uint64_t pruned{0};
    uint64_t residual_open{0};
    uint64_t residual_buffers{0};
    double wall_time_s{0.0};

    bool solved() const { return status == SolveStatus::Solved; }
};

struct HighOpenCmp {
    bool operator()(const NodePtr& a, const NodePtr& b) const {
        if (a->lb != b->lb) return a->lb > b->lb;
        if (a->cost != b->cost) return a->cost > b->cost;
        return a->id > b->id;
    }
};

struct HighFocalCmp {
    bool operator()(const NodePtr& a, const NodePtr& b) const {
        if (a->conflicts.size() != b->conflicts.size())
            return a->conflicts.size() > b->conflicts.size();
        if (a->cost != b->cost) return a->cost > b->cost;
        return a->id > b->id;
    }
};

using OpenQueue = std::priority_queue<NodePtr, std::vector<NodePtr>, HighOpenCmp>;
using FocalQueue = std::priority_queue<NodePtr, std::vector<NodePtr>, HighFocalCmp>;

namespace detail {

inline void drop_expanded(OpenQueue& open) {
    while (!open.empty() && open.top()->expanded) open.pop();
}

// Push every not-yet-member open node with cost <= w * soc_lb into focal.
// The band only grows, so members never need eviction.
inline void refill_focal(OpenQueue& open, FocalQueue& focal, double w, int64_t soc_lb) {
    std::vector<NodePtr> stash;
    while (!open.empty()) {
        NodePtr top = open.top();
        open.pop();
        if (top->expanded) continue;
        stash.push_back(top);
        if (!within_band(top->lb, w, soc_lb)) break;  // cost >= lb: nothing further fits
        if (!top->in_focal && within_band(top->cost, w, soc_lb)) {
            top->in_focal = true;
            focal.push(top);
        }
    }
    for (NodePtr& s : stash) open.push(std::move(s));
}

inline NodePtr pop_focal(FocalQueue& focal) {
    while (!focal.empty()) {
        NodePtr n = focal.top();
        focal.pop();
        if (!n->expanded) return n;
    }
    return nullptr;
}

inline void push_child(OpenQueue& open, FocalQueue& focal, const NodePtr& child, double w,
                       int64_t soc_lb) {
    if (within_band(child->cost, w, soc_lb)) {
        child->in_focal = true;
        focal.push(child);
    }
    open.push(child);
}

// Node re-evaluated after an accepted bypass: same identity, new paths.
inline NodePtr apply_bypass(const NodePtr& node, BypassCandidate&& cand) {
    auto next = std::make_shared<HighLevelNode>(*node);
    next->expanded = false;
    next->in_focal = false;
    next->cost = node->cost - cand.old_cost + cand.new_cost;
    next->paths[cand.agent] = std::make_shared<const Path>(std::move(cand.path));
    next->conflicts = recount_after_replan(node->conflicts, next->paths_view(), cand.agent);
    return next;
}

inline SolveOutcome finish(SolveStatus status, const NodePtr& solution_node, int64_t soc_lb,
                           const SearchCounters& counters, double w,
                           std::chrono::steady_clock::time_point t0) {
    SolveOutcome out;
    out.status = status;
    out.soc_lb = soc_lb;
    out.expansions = counters.expanded;
    out.generated = counters.generated;
    out.pruned = counters.pruned;
    if (solution_node) {
        out.soc = solution_node->cost;
        out.solution.reserve(solution_node->paths.size());
        for (const auto& p : solution_node->paths) out.solution.push_back(*p);
        if (!within_band(out.soc, w, out.soc_lb))
            throw std::logic_error("solve: suboptimality certificate violated");
    }
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace detail

inline SolveOutcome solve_ecbs(const Instance& instance, const SolveParams& params) {
    params.validate();
    const auto t0 = std::chrono::steady_clock::now();
    PlannerContext ctx = PlannerContext::build(instance, params.w, params.timeout_s);
    SearchCounters counters;

    NodePtr root = build_root(ctx, counters);
    if (!root) return detail::finish(SolveStatus::Timeout, nullptr, 0, counters, params.w, t0);

    uint64_t next_id = 1;
    OpenQueue open;
    FocalQueue focal;
    int64_t soc_lb = root->lb;
    detail::push_child(open, focal, root, params.w, soc_lb);

    while (true) {
        if (ctx.timed_out())
            return detail::finish(SolveStatus::Timeout, nullptr, soc_lb, counters, params.w, t0);

        detail::drop_expanded(open);
        if (open.empty())
            return detail::finish(SolveStatus::Timeout, nullptr, soc_lb, counters, params.w, t0);

        const int64_t head_lb = open.top()->lb;
        if (head_lb < soc_lb) throw std::logic_error("solve_ecbs: SOC_LB decreased");
        if (head_lb != soc_lb) {
            soc_lb = head_lb;
            detail::refill_focal(open, focal, params.w, soc_lb);
        }

        NodePtr n = detail::pop_focal(focal);
        if (!n) {
            // Newly eligible nodes may not have been admitted yet.
            detail::refill_focal(open, focal, params.w, soc_lb);
            n = detail::pop_focal(focal);
            if (!n) throw std::logic_error("solve_ecbs: focal empty with non-empty open");
        }
        n->expanded = true;
        ++counters.expanded;

        if (n->conflicts.empty())
            return detail::finish(SolveStatus::Solved, n, soc_lb, counters, params.w, t0);

        const Conflict conflict = n->conflicts.front();
        ConflictAvoidanceTable cat = build_cat(*ctx.map, n->paths_view());

        if (params.bypass) {
            if (auto cand = try_bypass(ctx, *n, conflict, soc_lb, cat)) {
                NodePtr next = detail::apply_bypass(n, std::move(*cand));
                detail::push_child(open, focal, next, params.w, soc_lb);
                continue;
            }
        }

        for (NodePtr& child : split_node(ctx, n, conflict, cat, counters)) {
            if (!child) continue;
            child->id = next_id++;
            detail::push_child(open, focal, child, params.w, soc_lb);
        }
    }
}

}  // namespace parmapf
