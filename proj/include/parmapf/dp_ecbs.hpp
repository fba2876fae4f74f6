/*
 * Decentralized parallel ECBS: one open/focal pair and one mailbox per
 * worker, a global SOC lower bound assembled from published per-worker
 * bounds, a publish-once incumbent, and two child-distribution strategies
 * (seeded random, or deterministic "one stays, one goes to (j+1) mod N").
 *
 * Soundness of the global bound: a node travelling between workers must be
 * visible to getSocLB at every instant, otherwise the bound can transiently
 * overshoot and the w-certificate breaks. Each mailbox therefore tracks the
 * minimum lb of its contents, and a worker publishes its local bound,
 * settles its mailbox minimum, and reads the global bound inside one short
 * critical section per iteration. Open lists themselves are never shared.
 */

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include "ecbs.hpp"

namespace parmapf {

inline constexpr int64_t kNoBound = std::numeric_limits<int64_t>::max();

enum class DistributionKind { Random, Deterministic };

struct DistributionStrategy {
    DistributionKind kind{DistributionKind::Deterministic};
    uint64_t seed{0};
};

// Worker index a child is routed to. Deterministic: child 0 stays on the
// parent's worker, child 1 goes to (j+1) mod N, so each worker receives at
// least one incoming child. Random: a seeded uniform draw.
inline int destinate_thread(int child_ordinal, int parent_worker, int n_workers,
                            const DistributionStrategy& strategy,
                            std::mt19937_64* route_rng = nullptr) {
    if (strategy.kind == DistributionKind::Deterministic)
        return child_ordinal == 0 ? parent_worker : (parent_worker + 1) % n_workers;
    if (!route_rng) throw std::invalid_argument("destinate_thread: random kind needs an rng");
    return static_cast<int>(bounded_draw(*route_rng, static_cast<uint64_t>(n_workers)));
}

// Minimum of the published per-worker bounds (kNoBound = empty open list).
inline int64_t get_global_soc_lb(const std::vector<std::atomic<int64_t>>& local_lbs) {
    int64_t m = kNoBound;
    for (const auto& lb : local_lbs) m = std::min(m, lb.load(std::memory_order_acquire));
    return m;
}

namespace detail {

// Multi-producer single-consumer mailbox. Producers never block on
// capacity. min_lb() covers the contents so in-flight nodes stay visible
// to the global bound.
class Mailbox {
public:
    void push(NodePtr n) {
        std::lock_guard lock(mu_);
        if (n->lb < min_lb_.load(std::memory_order_relaxed))
            min_lb_.store(n->lb, std::memory_order_release);
        box_.push_back(std::move(n));
    }

    void drain(std::vector<NodePtr>& out) {
        std::lock_guard lock(mu_);
        for (NodePtr& n : box_) out.push_back(std::move(n));
        box_.clear();
    }

    // Recompute min_lb from current contents; call only after the drained
    // nodes are covered by the consumer's published local bound.
    void settle_min() {
        std::lock_guard lock(mu_);
        int64_t m = kNoBound;
        for (const NodePtr& n : box_) m = std::min(m, n->lb);
        min_lb_.store(m, std::memory_order_release);
    }

    int64_t min_lb() const { return min_lb_.load(std::memory_order_acquire); }

    size_t size() const {
        std::lock_guard lock(mu_);
        return box_.size();
    }

private:
    mutable std::mutex mu_;
    std::vector<NodePtr> box_;
    std::atomic<int64_t> min_lb_{kNoBound};
};

struct DpShared {
    std::vector<Mailbox> buffers;
    std::vector<std::atomic<int64_t>> local_lb;
    std::mutex bound_mu;  // serializes publish+settle+read of the global bound
    std::atomic<bool> has_incumbent{false};
    std::mutex incumbent_mu;
    NodePtr incumbent;
    int64_t incumbent_soc_lb{0};  // global bound observed when it was popped
    std::atomic<uint64_t> next_id{1};

    explicit DpShared(int n_workers) : buffers(n_workers), local_lb(n_workers) {
        for (auto& lb : local_lb) lb.store(kNoBound, std::memory_order_relaxed);
    }
};

struct DpWorkerResult {
    SearchCounters counters;
    uint64_t residual_open{0};
    int64_t residual_min_lb{kNoBound};
};

inline void dp_worker(const PlannerContext& ctx, const DistributionStrategy& strategy,
                      DpShared& shared, int id, int n_workers, DpWorkerResult& result) {
    std::mt19937_64 route_rng(strategy.seed + 0x9E3779B97F4A7C15ULL * (id + 1));
    OpenQueue open;
    FocalQueue focal;
    int64_t band_lb = -1;
    std::vector<NodePtr> drained;
    int idle = 0;

    auto backoff = [&idle] {
        if (++idle < 64)
            std::this_thread::yield();
        else
            std::this_thread::sleep_for(std::chrono::microseconds(50));
    };

    while (true) {
        if (shared.has_incumbent.load(std::memory_order_acquire)) break;
        if (ctx.timed_out()) break;

        drained.clear();
        shared.buffers[id].drain(drained);
        for (NodePtr& n : drained) open.push(std::move(n));
        drop_expanded(open);

        int64_t soc_lb;
        {
            std::lock_guard lock(shared.bound_mu);
            shared.local_lb[id].store(open.empty() ? kNoBound : open.top()->lb,
                                      std::memory_order_release);
            shared.buffers[id].settle_min();
            soc_lb = get_global_soc_lb(shared.local_lb);
            for (const Mailbox& b : shared.buffers) soc_lb = std::min(soc_lb, b.min_lb());
        }

        if (open.empty() || soc_lb == kNoBound) {
            backoff();
            continue;
        }

        if (soc_lb != band_lb) {
            band_lb = soc_lb;
            refill_focal(open, focal, ctx.w, soc_lb);
        }
        NodePtr n = pop_focal(focal);
        if (!n) {
            // Our whole open list sits above the global band; some other
            // worker holds the minimum and will advance it.
            backoff();
            continue;
        }
        idle = 0;
        n->expanded = true;
        ++result.counters.expanded;

        if (n->conflicts.empty()) {
            std::lock_guard lock(shared.incumbent_mu);
            if (!shared.incumbent) {  // first publish wins
                shared.incumbent = n;
                shared.incumbent_soc_lb = soc_lb;
                shared.has_incumbent.store(true, std::memory_order_release);
            }
            break;
        }

        ConflictAvoidanceTable cat = build_cat(*ctx.map, n->paths_view());
        auto children = split_node(ctx, n, n->conflicts.front(), cat, result.counters);
        for (int ordinal = 0; ordinal < 2; ++ordinal) {
            if (!children[ordinal]) continue;
            children[ordinal]->id = shared.next_id.fetch_add(1, std::memory_order_relaxed);
            int to = destinate_thread(ordinal, id, n_workers, strategy, &route_rng);
            shared.buffers[to].push(std::move(children[ordinal]));
        }
    }

    // Residual accounting for the node-conservation identity.
    while (!open.empty()) {
        const NodePtr& top = open.top();
        if (!top->expanded) {
            ++result.residual_open;
            result.residual_min_lb = std::min(result.residual_min_lb, top->lb);
        }
        open.pop();
    }
}

}  // namespace detail

inline SolveOutcome solve_dp(const Instance& instance, const SolveParams& params,
                             int n_workers, const DistributionStrategy& strategy) {
    params.validate();
    if (n_workers < 1) throw std::invalid_argument("solve_dp: n_workers must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    PlannerContext ctx = PlannerContext::build(instance, params.w, params.timeout_s);
    SearchCounters root_counters;

    NodePtr root = build_root(ctx, root_counters);
    if (!root)
        return detail::finish(SolveStatus::Timeout, nullptr, 0, root_counters, params.w, t0);
    const int64_t root_lb = root->lb;

    detail::DpShared shared(n_workers);
    shared.buffers[0].push(std::move(root));

    std::vector<detail::DpWorkerResult> results(n_workers);
    {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (int i = 0; i < n_workers; ++i)
            workers.emplace_back(detail::dp_worker, std::cref(ctx), std::cref(strategy),
                                 std::ref(shared), i, n_workers, std::ref(results[i]));
        for (auto& th : workers) th.join();
    }

    // Merge per-worker statistics and drain leftover mailboxes.
    SearchCounters counters = root_counters;
    uint64_t residual_open = 0, residual_buffers = 0;
    int64_t residual_min = kNoBound;
    for (const auto& r : results) {
        counters.expanded += r.counters.expanded;
        counters.generated += r.counters.generated;
        counters.pruned += r.counters.pruned;
        residual_open += r.residual_open;
        residual_min = std::min(residual_min, r.residual_min_lb);
    }
    for (auto& buffer : shared.buffers) {
        std::vector<NodePtr> rest;
        buffer.drain(rest);
        residual_buffers += rest.size();
        for (const NodePtr& n : rest) residual_min = std::min(residual_min, n->lb);
    }

    if (counters.generated !=
        counters.expanded + residual_open + residual_buffers + counters.pruned)
        throw std::logic_error("solve_dp: node accounting identity violated");

    NodePtr incumbent = shared.incumbent;
    int64_t soc_lb;
    if (incumbent) {
        // Theorem contract, in assertable form: the bound recomputed from
        // everything left over (final local bounds are subsumed by the
        // residual nodes) plus the incumbent's own lb still certifies it.
        int64_t recomputed = std::min(residual_min, incumbent->lb);
        if (!within_band(incumbent->cost, params.w, shared.incumbent_soc_lb) ||
            !within_band(incumbent->cost, params.w, recomputed))
            throw std::logic_error("solve_dp: incumbent violates the w-bound");
        soc_lb = std::max(shared.incumbent_soc_lb, recomputed);
    } else {
        soc_lb = std::min(residual_min, root_lb);
        if (soc_lb == kNoBound) soc_lb = root_lb;
    }

    SolveOutcome out = detail::finish(incumbent ? SolveStatus::Solved : SolveStatus::Timeout,
                                      incumbent, soc_lb, counters, params.w, t0);
    out.residual_open = residual_open;
    out.residual_buffers = residual_buffers;
    return out;
}

}  // namespace parmapf
