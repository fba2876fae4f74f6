/*
 * Plan file format: '#'-prefixed metadata lines (key value, sorted by key),
 * then one line per robot: the robot index followed by space-separated
 * (x,y) cells. Human-diffable and validator-consumable.
 */

#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace parmapf {

struct PlanFile {
    std::vector<Path> paths;
    std::map<std::string, std::string> meta;
};

inline std::string serialize_plan(const PlanFile& plan) {
    std::ostringstream out;
    for (const auto& [key, value] : plan.meta) out << "# " << key << ' ' << value << '\n';
    for (size_t i = 0; i < plan.paths.size(); ++i) {
        out << i;
        for (const Vertex& v : plan.paths[i]) out << " (" << v.x << ',' << v.y << ')';
        out << '\n';
    }
    return out.str();
}

inline PlanFile parse_plan(std::istream& in) {
    PlanFile plan;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            if (!(ls >> key)) continue;
            std::string value;
            std::getline(ls, value);
            size_t at = value.find_first_not_of(' ');
            plan.meta[key] = at == std::string::npos ? "" : value.substr(at);
            continue;
        }
        std::istringstream ls(line);
        size_t robot;
        if (!(ls >> robot))
            throw std::runtime_error("plan line " + std::to_string(lineno) +
                                     ": expected robot index");
        if (robot != plan.paths.size())
            throw std::runtime_error("plan line " + std::to_string(lineno) +
                                     ": robot indices must be 0,1,2,...");
        Path path;
        std::string cell;
        while (ls >> cell) {
            int x, y;
            char l, comma, r;
            std::istringstream cs(cell);
            if (!(cs >> l >> x >> comma >> y >> r) || l != '(' || comma != ',' || r != ')')
                throw std::runtime_error("plan line " + std::to_string(lineno) +
                                         ": bad cell '" + cell + "'");
            path.push_back(Vertex{x, y});
        }
        if (path.empty())
            throw std::runtime_error("plan line " + std::to_string(lineno) + ": empty path");
        plan.paths.push_back(std::move(path));
    }
    return plan;
}

inline PlanFile parse_plan(const std::string& text) {
    std::istringstream in(text);
    return parse_plan(in);
}

}  // namespace parmapf
