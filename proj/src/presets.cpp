#include "diamond/sim.hpp"

namespace diamond {

namespace {

struct PresetNode {
    double x, y;  // unit-square layout, scaled below
};

// Classic 14-node NSFNET T1 backbone (WA, CA1, CA2, UT, CO, TX, NE, IL, PA,
// GA, MI, NY, NJ, MD). Coordinates follow the geographic layout, scaled to a
// desk-scale deployment box so the path-loss model stays in a sane regime.
constexpr PresetNode kNsfnetNodes[14] = {
    {0.05, 0.95}, {0.02, 0.45}, {0.08, 0.15}, {0.22, 0.60}, {0.35, 0.52},
    {0.45, 0.12}, {0.52, 0.58}, {0.62, 0.65}, {0.82, 0.62}, {0.78, 0.20},
    {0.68, 0.78}, {0.90, 0.75}, {0.93, 0.62}, {0.88, 0.50},
};

constexpr int kNsfnetEdges[21][2] = {
    {0, 1}, {0, 2}, {0, 7},  {1, 2},  {1, 3},  {2, 5},   {3, 4},
    {3, 10}, {4, 5}, {4, 6}, {5, 9},  {5, 13}, {6, 7},   {7, 8},
    {8, 9},  {8, 11}, {8, 12}, {10, 11}, {10, 13}, {11, 12}, {12, 13},
};

// 24-node / 37-edge GEANT2 research-network layout as used in the
// network-ML literature; planar coordinates approximate the European
// footprint, scaled like the NSFNET box.
constexpr PresetNode kGeant2Nodes[24] = {
    {0.10, 0.75}, {0.22, 0.62}, {0.06, 0.55}, {0.18, 0.45}, {0.05, 0.35}, {0.28, 0.30},
    {0.35, 0.55}, {0.18, 0.20}, {0.42, 0.38}, {0.45, 0.70}, {0.56, 0.85}, {0.30, 0.08},
    {0.58, 0.55}, {0.62, 0.75}, {0.42, 0.05}, {0.55, 0.12}, {0.68, 0.22}, {0.60, 0.35},
    {0.52, 0.30}, {0.72, 0.60}, {0.50, 0.03}, {0.66, 0.45}, {0.78, 0.38}, {0.85, 0.45},
};

constexpr int kGeant2Edges[37][2] = {
    {0, 1},  {0, 2},  {1, 3},  {1, 6},  {1, 9},   {2, 3},   {2, 4},   {3, 5},
    {3, 6},  {4, 7},  {4, 11}, {5, 8},  {6, 8},   {6, 9},   {7, 8},   {7, 11},
    {8, 12}, {8, 17}, {8, 18}, {9, 10}, {9, 12},  {9, 13},  {10, 13}, {11, 14},
    {11, 20}, {12, 13}, {12, 19}, {12, 21}, {14, 15}, {15, 16}, {16, 17}, {17, 18},
    {18, 21}, {19, 23}, {20, 23}, {21, 22}, {22, 23},
};

constexpr double kPresetScaleX = 2000;  // meters
constexpr double kPresetScaleY = 1200;

template <std::size_t N, std::size_t M>
NetworkGraph build_preset(const PresetNode (&nodes)[N], const int (&edges)[M][2]) {
    NetworkGraph g;
    for (const PresetNode& n : nodes) g.add_node(n.x * kPresetScaleX, n.y * kPresetScaleY);
    for (const auto& e : edges) {
        g.add_link(e[0], e[1], 10.0, 100.0, 1e-3);
        g.add_link(e[1], e[0], 10.0, 100.0, 1e-3);
    }
    return g;
}

}  // namespace

NetworkGraph load_preset(const std::string& name) {
    if (name == "nsfnet") return build_preset(kNsfnetNodes, kNsfnetEdges);
    if (name == "geant2") return build_preset(kGeant2Nodes, kGeant2Edges);
    throw ContractViolation("unknown preset topology: " + name);
}

}  // namespace diamond
