#pragma once
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "kignn/graph.hpp"

namespace kignn {

/* canonical color ids, dense 0..k-1 in order of first appearance */
using Coloring = std::vector<int>;

Coloring label_coloring(const Graph& g);
Coloring color_refine(const Graph& g, const Coloring& init, int rounds);

struct CRSignature {
    std::vector<int> point_colors;  /* rounds 0..stabilization */
    int stabilization_round;
};
CRSignature cr_signature(const PointedGraph& g, int max_rounds = -1);

constexpr int CR_FULL = -1;
bool cr_equivalent(const PointedGraph& g, const PointedGraph& h, int r);

using NodePairs = std::set<std::pair<int, int>>;

/* greatest bisimulation between g and h containing the point pair, or none */
std::optional<NodePairs> bisimilar(const PointedGraph& g, const PointedGraph& h);
bool r_bisimilar(const PointedGraph& g, const PointedGraph& h, int r);

/* maps are node vectors indexed by g's nodes */
bool verify_functional_bisimulation(const PointedGraph& g, const PointedGraph& h,
                                    const std::vector<int>& f);
std::optional<std::vector<int>> find_functional_bisimulation(const PointedGraph& g,
                                                             const PointedGraph& h);

bool verify_covering(const PointedGraph& g, const PointedGraph& h, const std::vector<int>& f);
std::optional<std::vector<int>> find_covering(const PointedGraph& g, const PointedGraph& h);

/* connected double cover: two copies of g with one cycle edge pair swapped
   across the copies; returns the cover and its verified covering map onto g */
std::pair<PointedGraph, std::vector<int>> double_cycle_cover(const PointedGraph& g,
                                                             const std::vector<int>& cycle);

}  // namespace kignn
