/*
 * Benchmark harness: one BenchRecord per (map, n, seed, algorithm) cell,
 * streamed to CSV so raw records are never lost; aggregation is a separate
 * summarize step. Cells run strictly serially so solver-internal
 * parallelism is measured without interference.
 */

#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "dp_ecbs.hpp"
#include "ecbs.hpp"
#include "pb_ecbs.hpp"
#include "validate.hpp"

namespace parmapf {

struct BenchRecord {
    std::string map_id;
    int agents{0};
    uint64_t seed{0};
    std::string algo;  // ecbs | dp-ecbs | pb-ecbs
    double w{2.0};
    int workers{1};
    std::string strategy;  // random | deterministic | - (not applicable)
    int alpha{0};
    std::string status;  // solved | timeout | error
    double wall_time_s{0.0};
    std::optional<int64_t> soc;
    std::optional<int64_t> soc_lb;
    std::optional<double> ratio;  // soc / sum of individual shortest distances
    uint64_t expansions{0};
    uint64_t generated{0};

    static std::string csv_header() {
        return "map,agents,seed,algo,w,workers,strategy,alpha,status,wall_time,"
               "soc,soc_lb,ratio,expansions,generated";
    }

    std::string to_csv_row() const {
        char wall[32], wbuf[32];
        std::snprintf(wall, sizeof wall, "%.3f", wall_time_s);
        std::snprintf(wbuf, sizeof wbuf, "%.6g", w);
        std::ostringstream out;
        out << map_id << ',' << agents << ',' << seed << ',' << algo << ',' << wbuf << ','
            << workers << ',' << strategy << ',' << alpha << ',' << status << ',' << wall
            << ',';
        if (soc) out << *soc;
        out << ',';
        if (soc_lb) out << *soc_lb;
        out << ',';
        if (ratio) {
            char rbuf[32];
            std::snprintf(rbuf, sizeof rbuf, "%.6f", *ratio);
            out << rbuf;
        }
        out << ',' << expansions << ',' << generated;
        return out.str();
    }

    static BenchRecord from_csv_row(const std::string& row) {
        std::vector<std::string> fields;
        std::string cur;
        for (char c : row) {
            if (c == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.push_back(cur);
        if (fields.size() != 15)
            throw std::runtime_error("bench CSV row has " + std::to_string(fields.size()) +
                                     " fields, expected 15");
        BenchRecord r;
        r.map_id = fields[0];
        r.agents = std::stoi(fields[1]);
        r.seed = std::stoull(fields[2]);
        r.algo = fields[3];
        r.w = std::stod(fields[4]);
        r.workers = std::stoi(fields[5]);
        r.strategy = fields[6];
        r.alpha = std::stoi(fields[7]);
        r.status = fields[8];
        r.wall_time_s = std::stod(fields[9]);
        if (!fields[10].empty()) r.soc = std::stoll(fields[10]);
        if (!fields[11].empty()) r.soc_lb = std::stoll(fields[11]);
        if (!fields[12].empty()) r.ratio = std::stod(fields[12]);
        r.expansions = std::stoull(fields[13]);
        r.generated = std::stoull(fields[14]);
        return r;
    }

    nlohmann::ordered_json to_json(bool include_timing = true) const {
        nlohmann::ordered_json j;
        j["map"] = map_id;
        j["agents"] = agents;
        j["seed"] = seed;
        j["algo"] = algo;
        j["w"] = w;
        j["workers"] = workers;
        j["strategy"] = strategy;
        j["alpha"] = alpha;
        j["status"] = status;
        j["wall_time"] = include_timing ? wall_time_s : 0.0;
        j["soc"] = soc ? nlohmann::ordered_json(*soc) : nlohmann::ordered_json(nullptr);
        j["soc_lb"] = soc_lb ? nlohmann::ordered_json(*soc_lb) : nlohmann::ordered_json(nullptr);
        j["ratio"] = ratio ? nlohmann::ordered_json(*ratio) : nlohmann::ordered_json(nullptr);
        j["expansions"] = expansions;
        j["generated"] = generated;
        return j;
    }
};

struct BenchCell {
    std::string algo;
    int workers{1};
    DistributionStrategy strategy;
    int alpha{0};
    bool root_only{false};
};

// Runs one already-built instance and fills the outcome-dependent fields.
// Timeout rows carry wall_time = the configured timeout.
inline BenchRecord run_cell(const Instance& instance, const std::string& map_id, int agents,
                            uint64_t seed, const SolveParams& base, const BenchCell& cell) {
    BenchRecord r;
    r.map_id = map_id;
    r.agents = agents;
    r.seed = seed;
    r.algo = cell.algo;
    r.w = base.w;
    r.workers = cell.workers;
    r.strategy = cell.algo == "dp-ecbs"
                     ? (cell.strategy.kind == DistributionKind::Random ? "random"
                                                                       : "deterministic")
                     : "-";
    r.alpha = cell.algo == "pb-ecbs" ? (cell.alpha > 0 ? cell.alpha : cell.workers) : 0;

    SolveOutcome outcome;
    if (cell.algo == "ecbs") {
        outcome = solve_ecbs(instance, base);
    } else if (cell.algo == "dp-ecbs") {
        outcome = solve_dp(instance, base, cell.workers, cell.strategy);
    } else if (cell.algo == "pb-ecbs") {
        PBParams pbp;
        static_cast<SolveParams&>(pbp) = base;
        pbp.bypass = true;
        pbp.alpha = cell.alpha;
        pbp.n_workers = cell.workers;
        pbp.root_only = cell.root_only;
        outcome = solve_pb(instance, pbp);
    } else {
        throw std::invalid_argument("unknown algorithm '" + cell.algo + "'");
    }

    r.expansions = outcome.expansions;
    r.generated = outcome.generated;
    if (outcome.solved()) {
        ValidationReport vr = validate_solution(instance, outcome.solution);
        if (!vr.ok) throw std::logic_error("run_cell: solver returned an invalid solution");
        r.status = "solved";
        r.wall_time_s = outcome.wall_time_s;
        r.soc = outcome.soc;
        r.soc_lb = outcome.soc_lb;
        r.ratio = static_cast<double>(outcome.soc) /
                  static_cast<double>(std::max<int64_t>(1, soc_lower_bound(instance)));
    } else {
        r.status = "timeout";
        r.wall_time_s = base.timeout_s;
        r.soc_lb = outcome.soc_lb;
    }
    return r;
}

struct BenchConfig {
    std::vector<std::string> maps;  // .map paths (gen = random) or unused (gen = corner)
    std::vector<int> agents;
    std::vector<uint64_t> seeds;
    std::vector<std::string> algos;
    double w{2.0};
    double timeout_s{120.0};
    bool bypass{false};  // serial ecbs cells
    int workers{1};
    DistributionStrategy strategy;
    int alpha{0};
    std::string gen{"random"};  // random | corner
    int side{60};
    int region{0};  // 0 = default_corner_region
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

inline std::vector<uint64_t> parse_seed_list(const std::string& s) {
    std::vector<uint64_t> seeds;
    for (const std::string& item : split_list(s)) {
        size_t dots = item.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(std::stoull(item));
        } else {
            uint64_t lo = std::stoull(item.substr(0, dots));
            uint64_t hi = std::stoull(item.substr(dots + 2));
            for (uint64_t v = lo; v <= hi; ++v) seeds.push_back(v);
        }
    }
    return seeds;
}

}  // namespace detail

// Key = value lines; '#' comments. Lists are comma-separated; seeds accept
// lo..hi ranges.
inline BenchConfig parse_bench_config(std::istream& in) {
    BenchConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("bench config line " + std::to_string(lineno) +
                                         ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "maps") {
            cfg.maps = detail::split_list(value);
        } else if (key == "agents") {
            for (const auto& v : detail::split_list(value)) cfg.agents.push_back(std::stoi(v));
        } else if (key == "seeds") {
            cfg.seeds = detail::parse_seed_list(value);
        } else if (key == "algos") {
            cfg.algos = detail::split_list(value);
        } else if (key == "w") {
            cfg.w = std::stod(value);
        } else if (key == "timeout") {
            cfg.timeout_s = std::stod(value);
        } else if (key == "bypass") {
            cfg.bypass = value == "true" || value == "1";
        } else if (key == "workers") {
            cfg.workers = std::stoi(value);
        } else if (key == "strategy") {
            if (value == "random")
                cfg.strategy.kind = DistributionKind::Random;
            else if (value == "deterministic")
                cfg.strategy.kind = DistributionKind::Deterministic;
            else
                throw std::runtime_error("bench config: unknown strategy '" + value + "'");
        } else if (key == "alpha") {
            cfg.alpha = std::stoi(value);
        } else if (key == "gen") {
            if (value != "random" && value != "corner")
                throw std::runtime_error("bench config: unknown gen mode '" + value + "'");
            cfg.gen = value;
        } else if (key == "side") {
            cfg.side = std::stoi(value);
        } else if (key == "region") {
            cfg.region = std::stoi(value);
        } else {
            throw std::runtime_error("bench config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (cfg.agents.empty() || cfg.seeds.empty() || cfg.algos.empty())
        throw std::runtime_error("bench config: agents, seeds, and algos are required");
    if (cfg.gen == "random" && cfg.maps.empty())
        throw std::runtime_error("bench config: maps required for gen = random");
    return cfg;
}

inline std::string bench_map_id(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

// One record per cell, streamed through `emit`; per-cell errors become
// status=error rows and never abort the suite.
inline void run_bench(const BenchConfig& cfg,
                      const std::function<void(const BenchRecord&)>& emit) {
    SolveParams base;
    base.w = cfg.w;
    base.timeout_s = cfg.timeout_s;
    base.bypass = cfg.bypass;

    std::vector<std::pair<std::string, std::shared_ptr<const GridMap>>> maps;
    if (cfg.gen == "corner") {
        std::string id = "empty-" + std::to_string(cfg.side) + "x" + std::to_string(cfg.side);
        maps.emplace_back(id, std::make_shared<const GridMap>(GridMap::empty(cfg.side, cfg.side)));
    } else {
        for (const std::string& path : cfg.maps) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("bench: cannot open map '" + path + "'");
            maps.emplace_back(bench_map_id(path),
                              std::make_shared<const GridMap>(GridMap::parse(in)));
        }
    }

    for (const auto& [map_id, map] : maps) {
        for (int n : cfg.agents) {
            for (uint64_t seed : cfg.seeds) {
                std::optional<Instance> instance;
                try {
                    if (cfg.gen == "corner") {
                        int region =
                            cfg.region > 0 ? cfg.region : default_corner_region(cfg.side, n);
                        instance = gen_corner_rearrangement(cfg.side, region, n, seed);
                    } else {
                        instance = gen_uniform_random(map, n, seed);
                    }
                } catch (const std::exception&) {
                    // recorded below as status=error rows, one per algorithm
                }
                for (const std::string& algo : cfg.algos) {
                    BenchCell cell;
                    cell.algo = algo;
                    cell.workers = cfg.workers;
                    cell.strategy = cfg.strategy;
                    cell.alpha = cfg.alpha;
                    BenchRecord r;
                    bool done = false;
                    if (instance) {
                        try {
                            r = run_cell(*instance, map_id, n, seed, base, cell);
                            done = true;
                        } catch (const std::exception&) {
                        }
                    }
                    if (!done) {
                        r = BenchRecord{};
                        r.map_id = map_id;
                        r.agents = n;
                        r.seed = seed;
                        r.algo = algo;
                        r.w = cfg.w;
                        r.workers = cfg.workers;
                        r.status = "error";
                        r.strategy = "-";
                    }
                    emit(r);
                }
            }
        }
    }
}

struct BenchSummary {
    std::string map_id;
    int agents{0};
    std::string algo;
    int cells{0};
    double success_rate{0.0};
    double mean_wall_time_s{0.0};
    double mean_ratio{0.0};  // over solved cells only
    double mean_expansions{0.0};
};

// Aggregates records by (map, agents, algo). Failed cells contribute their
// full timeout to mean runtime but are excluded from the ratio mean.
inline std::vector<BenchSummary> summarize_bench(const std::vector<BenchRecord>& records) {
    std::map<std::tuple<std::string, int, std::string>, std::vector<const BenchRecord*>> groups;
    for (const BenchRecord& r : records)
        groups[{r.map_id, r.agents, r.algo}].push_back(&r);
    std::vector<BenchSummary> out;
    for (const auto& [key, rows] : groups) {
        BenchSummary s;
        std::tie(s.map_id, s.agents, s.algo) = key;
        s.cells = static_cast<int>(rows.size());
        int solved = 0, with_ratio = 0;
        for (const BenchRecord* r : rows) {
            s.mean_wall_time_s += r->wall_time_s;
            s.mean_expansions += static_cast<double>(r->expansions);
            if (r->status == "solved") ++solved;
            if (r->ratio) {
                s.mean_ratio += *r->ratio;
                ++with_ratio;
            }
        }
        s.success_rate = static_cast<double>(solved) / s.cells;
        s.mean_wall_time_s /= s.cells;
        s.mean_expansions /= s.cells;
        s.mean_ratio = with_ratio ? s.mean_ratio / with_ratio : 0.0;
        out.push_back(s);
    }
    return out;
}

inline std::string summary_csv(const std::vector<BenchSummary>& summaries) {
    std::ostringstream out;
    out << "map,agents,algo,cells,success_rate,mean_wall_time,mean_ratio,mean_expansions\n";
    for (const BenchSummary& s : summaries) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%d,%s,%d,%.4f,%.3f,%.6f,%.1f", s.map_id.c_str(),
                      s.agents, s.algo.c_str(), s.cells, s.success_rate, s.mean_wall_time_s,
                      s.mean_ratio, s.mean_expansions);
        out << buf << '\n';
    }
    return out.str();
}

}  // namespace parmapf
