#pragma once
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cfran/channel.hpp"
#include "cfran/scenario.hpp"

namespace cfran {

// RRU -> EDU assignment. groups[m] lists the RRUs of EDU m in ascending
// order; group_of is the inverse map. Every group is non-empty and the groups
// partition {0..L-1} exactly.
struct Partition {
  std::vector<int> group_of;
  std::vector<std::vector<int>> groups;
};

// builds groups from the flat map and checks the partition laws
Partition make_partition(const std::vector<int>& group_of, int num_groups);
void validate_partition(const Partition& p, int num_rrus);

// undirected RRU adjacency: edge iff pairwise distance <= delta * area_side
struct ConflictGraph {
  double delta = 0.0;                  // fraction of area_side used to build
  std::vector<std::vector<int>> adj;   // sorted neighbor lists, no self loops
  int nodes() const { return static_cast<int>(adj.size()); }
  std::size_t edge_count() const;
};

ConflictGraph build_conflict_graph(const Geometry& geometry, double delta_fraction,
                                   double area_side);

struct ColoringResult {
  bool feasible = false;
  std::vector<int> color;   // length L, values in [0, colors)
  int conflicts = 0;        // monochromatic edge count of `color`
};

// Tabucol search for a proper coloring with at most `colors` colors. Restarts
// use sub-streams of `seed`, so the outcome does not depend on evaluation
// order; the first feasible restart (lowest index) wins.
ColoringResult tabu_coloring(const ConflictGraph& graph, int colors,
                             const TabuKnobs& knobs, std::uint64_t seed);

// smallest color count the tabu search can satisfy, probing 1, 2, ... up to
// max_colors; returns max_colors + 1 if everything fails
int achievable_colors(const ConflictGraph& graph, const TabuKnobs& knobs,
                      std::uint64_t seed, int max_colors);

struct GroupingKnobs {
  TabuKnobs tabu;
  double delta_init = 0.25;
  int bisect_max_iters = 30;
};

// bisection on the conflict distance until the graph needs exactly M colors;
// color classes become EDU groups, isolated RRUs are re-attached by the
// distance-sorted repair step; final_delta (if given) receives the accepted
// threshold fraction
Partition graph_color_associate(const Geometry& geometry, double area_side, int num_edus,
                                const GroupingKnobs& knobs, std::uint64_t seed,
                                double* final_delta = nullptr);

// K-means++ seeding plus Lloyd iterations over RRU positions; best of
// `restarts` runs by within-cluster sum of squares
Partition kmeans_pp(const std::vector<Eigen::Vector2d>& points, int num_groups,
                    double area_side, int restarts, std::uint64_t seed);

// round-robin by RRU index: group_of[l] = l mod M
Partition interleaved_partition(int num_rrus, int num_groups);

// dispatch on config.rru_grouping
Partition build_partition(const ScenarioConfig& config, const Geometry& geometry,
                          std::uint64_t seed);

// reciprocal of the summed cross-group RRU distances; larger means the groups
// interleave more tightly
double ga_fitness(const Partition& partition, const std::vector<Eigen::Vector2d>& points);

// UE -> RRU service flags delta_{k,l}; all ones in Full mode
struct AssociationMatrices {
  Eigen::MatrixXi delta;  // K x L
};

AssociationMatrices full_association(int num_ues, int num_rrus);

// per pilot each RRU serves the strongest UE on that pilot; every UE also
// keeps its strongest RRU regardless
AssociationMatrices dcc_associate(const LargeScaleFading& fading,
                                  const std::vector<int>& pilots);

// 0/1 mask over EDU m's stacked antennas selecting the RRUs that serve UE k
Eigen::VectorXd antenna_mask(const AssociationMatrices& assoc, const Partition& partition,
                             int edu, int ue, int antennas_per_rru);

Eigen::Vector2d centroid(const std::vector<Eigen::Vector2d>& points);

}  // namespace cfran
