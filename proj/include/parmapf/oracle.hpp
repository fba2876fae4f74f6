/*
 * Desk-scale optimality oracle: exhaustive least-cost search over the joint
 * configuration space. A timestep contributes cost equal to the number of
 * robots not located at their goals, which lower-bounds SOC and equals it
 * exactly when no robot in the witness leaves its goal after first arrival
 * (the result reports which case holds).
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "scenario.hpp"
#include "validate.hpp"

namespace parmapf {

struct OracleResult {
    int64_t value{0};
    bool soc_exact{false};  // witness never leaves a goal after first arrival
    std::vector<Path> witness;
};

// Returns nullopt when no all-at-goal state is reachable within `horizon`
// timesteps. Intended for tiny inputs (n <= 3, maps <= 4x4, horizon <= 12);
// hard limits below only guard against accidental blowups.
inline std::optional<OracleResult> oracle_optimal_soc(const Instance& instance, int horizon) {
    const GridMap& map = *instance.map;
    const int n = instance.num_robots();
    const uint64_t cells = map.num_cells();
    if (horizon < 0) throw std::invalid_argument("oracle_optimal_soc: negative horizon");
    if (n > 6 || cells > 256 || horizon > 64)
        throw std::invalid_argument("oracle_optimal_soc: input too large for exhaustion");

    std::vector<int> goal_idx(n);
    for (int i = 0; i < n; ++i) goal_idx[i] = map.index(instance.goals[i]);

    auto config_code = [&](const std::vector<int>& pos) {
        uint64_t code = 0;
        for (int i = n - 1; i >= 0; --i) code = code * cells + pos[i];
        return code;
    };
    auto state_key = [&](uint64_t config, int t) {
        return config * static_cast<uint64_t>(horizon + 1) + t;
    };
    auto away = [&](const std::vector<int>& pos) {
        int k = 0;
        for (int i = 0; i < n; ++i) k += pos[i] != goal_idx[i];
        return k;
    };

    struct QEntry {
        int64_t cost;
        uint64_t order;
        uint64_t key;
        std::vector<int> pos;
        int t;
    };
    struct QCmp {
        bool operator()(const QEntry& a, const QEntry& b) const {
            if (a.cost != b.cost) return a.cost > b.cost;
            return a.order > b.order;
        }
    };

    std::vector<int> start(n);
    for (int i = 0; i < n; ++i) start[i] = map.index(instance.starts[i]);

    std::unordered_map<uint64_t, int64_t> best;
    std::unordered_map<uint64_t, uint64_t> parent;  // state key -> predecessor key
    std::unordered_map<uint64_t, std::vector<int>> pos_of;
    std::priority_queue<QEntry, std::vector<QEntry>, QCmp> queue;
    uint64_t order = 0;

    const uint64_t start_key = state_key(config_code(start), 0);
    best[start_key] = away(start);
    pos_of[start_key] = start;
    queue.push({away(start), order++, start_key, start, 0});

    auto options = [&](int idx) {
        std::vector<int> out{idx};
        for (const Vertex& u : GridMap::neighbor_candidates(map.vertex(idx)))
            if (map.passable(u)) out.push_back(map.index(u));
        return out;
    };

    while (!queue.empty()) {
        QEntry e = queue.top();
        queue.pop();
        auto it = best.find(e.key);
        if (it != best.end() && e.cost > it->second) continue;

        if (away(e.pos) == 0) {
            // Reconstruct the witness and classify it.
            std::vector<uint64_t> chain{e.key};
            while (parent.count(chain.back())) chain.push_back(parent[chain.back()]);
            std::reverse(chain.begin(), chain.end());
            OracleResult res;
            res.value = e.cost;
            res.witness.assign(n, Path());
            for (uint64_t key : chain) {
                const std::vector<int>& pos = pos_of[key];
                for (int i = 0; i < n; ++i) res.witness[i].push_back(map.vertex(pos[i]));
            }
            res.soc_exact = true;
            for (int i = 0; i < n && res.soc_exact; ++i) {
                bool arrived = false;
                for (const Vertex& v : res.witness[i]) {
                    bool at_goal = map.index(v) == goal_idx[i];
                    if (arrived && !at_goal) res.soc_exact = false;
                    arrived = arrived || at_goal;
                }
            }
            return res;
        }
        if (e.t >= horizon) continue;

        // Enumerate joint moves: distinct targets, no swaps.
        std::vector<int> next(n);
        std::vector<std::vector<int>> opts(n);
        for (int i = 0; i < n; ++i) opts[i] = options(e.pos[i]);
        std::vector<size_t> pick(n, 0);
        while (true) {
            bool legal = true;
            for (int i = 0; i < n && legal; ++i) {
                next[i] = opts[i][pick[i]];
                for (int j = 0; j < i && legal; ++j) {
                    if (next[i] == next[j]) legal = false;                      // vertex
                    if (next[i] == e.pos[j] && next[j] == e.pos[i] &&
                        e.pos[i] != e.pos[j] && next[i] != e.pos[i])
                        legal = false;                                          // swap
                }
            }
            if (legal) {
                int64_t step = away(next);
                uint64_t key = state_key(config_code(next), e.t + 1);
                int64_t cost = e.cost + step;
                auto bit = best.find(key);
                if (bit == best.end() || cost < bit->second) {
                    best[key] = cost;
                    parent[key] = e.key;
                    pos_of[key] = next;
                    queue.push({cost, order++, key, next, e.t + 1});
                }
            }
            int i = 0;
            while (i < n && ++pick[i] == opts[i].size()) pick[i++] = 0;
            if (i == n) break;
        }
    }
    return std::nullopt;
}

}  // namespace parmapf
