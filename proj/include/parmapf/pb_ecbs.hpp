/*
 * Parallel bypass-augmented ECBS: the serial ECBS loop, with rounds of
 * concurrent bypasses over agent-disjoint conflicts against a frozen CAT
 * whenever a popped node carries at least alpha conflicts. Conflicts are
 * recounted after each round by hash-windowed detection split across
 * workers; the CAT is rebuilt only between rounds.
 */

#pragma once

#include <optional>
#include <set>
#include <thread>
#include <vector>

#include "dp_ecbs.hpp"
#include "ecbs.hpp"

namespace parmapf {

struct PBParams : SolveParams {
    int alpha{0};  // 0 = default to n_workers
    int n_workers{1};
    bool root_only{false};

    PBParams() { bypass = true; }

    int resolved_alpha() const { return alpha > 0 ? alpha : n_workers; }

    void validate_pb() const {
        validate();
        if (n_workers < 1) throw std::invalid_argument("PBParams: n_workers must be >= 1");
        if (alpha < 0) throw std::invalid_argument("PBParams: alpha must be >= 1 (or 0 for default)");
    }
};

namespace detail {

// Contiguous near-equal chunks of [0, total) handed to up to n_workers
// threads. fn(chunk_begin, chunk_end) must be safe to run concurrently.
template <typename Fn>
void parallel_chunks(int total, int n_workers, Fn&& fn) {
    const int used = std::min(n_workers, total);
    if (used <= 1) {
        fn(0, total);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(used);
    for (int k = 0; k < used; ++k) {
        int lo = total * k / used;
        int hi = total * (k + 1) / used;
        threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : threads) th.join();
}

inline std::vector<Conflict> recount_windowed_parallel(const std::vector<const Path*>& paths,
                                                       int n_workers) {
    const int span = paths_makespan(paths) + 1;
    const int used = std::max(1, std::min(n_workers, span));
    std::vector<std::vector<Conflict>> parts(used);
    parallel_chunks(used, used, [&](int lo, int hi) {
        for (int k = lo; k < hi; ++k)
            parts[k] = detect_conflicts_windowed(paths, span * k / used, span * (k + 1) / used);
    });
    std::vector<Conflict> merged;
    for (auto& part : parts)
        merged.insert(merged.end(), part.begin(), part.end());
    // Windows are time-ordered and internally sorted, so `merged` is sorted.
    return merged;
}

}  // namespace detail

// One or more rounds of concurrent bypasses on `node` (entered only when it
// has >= alpha conflicts). Every round freezes the CAT and peer paths,
// attempts a bypass for each conflict of a greedy-maximal disjoint set in
// parallel, commits accepted paths in conflict order under the w * soc_lb
// bound, then recounts conflicts. Rounds repeat while the conflict count
// strictly drops; node.conflicts is exact on exit.
inline void parallel_bp_phase(const PlannerContext& ctx, HighLevelNode& node,
                              const PBParams& params, int64_t soc_lb) {
    const size_t alpha = static_cast<size_t>(params.resolved_alpha());
    if (node.conflicts.size() < alpha) return;

    while (!node.conflicts.empty()) {
        if (ctx.timed_out()) return;
        const size_t before = node.conflicts.size();
        const std::vector<Conflict> disjoint = find_disjoint_conflicts(node.conflicts);
        const ConflictAvoidanceTable cat = build_cat(*ctx.map, node.paths_view());

        std::vector<std::optional<BypassCandidate>> candidates(disjoint.size());
        detail::parallel_chunks(static_cast<int>(disjoint.size()), params.n_workers,
                                [&](int lo, int hi) {
                                    for (int k = lo; k < hi; ++k)
                                        candidates[k] =
                                            try_bypass(ctx, node, disjoint[k], soc_lb, cat);
                                });

        // Deterministic commit in conflict order; the node-level bound is
        // re-checked against the running cost, since individually bounded
        // substitutions can overshoot jointly.
        int64_t running = node.cost;
        std::set<int> written;
        for (auto& cand : candidates) {
            if (!cand) continue;
            if (!written.insert(cand->agent).second)
                throw std::logic_error("parallel_bp_phase: agent written twice in a round");
            if (!within_band(running - cand->old_cost + cand->new_cost, ctx.w, soc_lb))
                continue;
            running += cand->new_cost - cand->old_cost;
            node.paths[cand->agent] = std::make_shared<const Path>(std::move(cand->path));
        }
        node.cost = running;

        node.conflicts = detail::recount_windowed_parallel(node.paths_view(), params.n_workers);
        if (node.conflicts.size() >= before) return;  // stagnated: back to regular search
    }
}

inline SolveOutcome solve_pb(const Instance& instance, const PBParams& params) {
    params.validate_pb();
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
        if (head_lb < soc_lb) throw std::logic_error("solve_pb: SOC_LB decreased");
        if (head_lb != soc_lb) {
            soc_lb = head_lb;
            detail::refill_focal(open, focal, params.w, soc_lb);
        }

        NodePtr n = detail::pop_focal(focal);
        if (!n) {
            detail::refill_focal(open, focal, params.w, soc_lb);
            n = detail::pop_focal(focal);
            if (!n) throw std::logic_error("solve_pb: focal empty with non-empty open");
        }
        n->expanded = true;
        ++counters.expanded;

        if (n->conflicts.empty())
            return detail::finish(SolveStatus::Solved, n, soc_lb, counters, params.w, t0);

        if (!params.root_only || n->id == 0) {
            if (n->conflicts.size() >= static_cast<size_t>(params.resolved_alpha())) {
                // The popped node is re-materialized so stale queue entries
                // keep the keys they were heaped with.
                auto phased = std::make_shared<HighLevelNode>(*n);
                phased->expanded = false;
                phased->in_focal = false;
                parallel_bp_phase(ctx, *phased, params, soc_lb);
                n = std::move(phased);
                if (n->conflicts.empty()) {
                    n->expanded = true;
                    return detail::finish(SolveStatus::Solved, n, soc_lb, counters, params.w,
                                          t0);
                }
                n->expanded = true;
            }
        }

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
