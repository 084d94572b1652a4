#include "cfran/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cfran/errors.hpp"

namespace cfran {

Partition make_partition(const std::vector<int>& group_of, int num_groups) {
  Partition p;
  p.group_of = group_of;
  p.groups.assign(num_groups, {});
  for (std::size_t l = 0; l < group_of.size(); ++l) {
    int g = group_of[l];
    if (g < 0 || g >= num_groups) {
      throw ConfigError("partition assigns RRU " + std::to_string(l) +
                        " to nonexistent group " + std::to_string(g));
    }
    p.groups[g].push_back(static_cast<int>(l));
  }
  validate_partition(p, static_cast<int>(group_of.size()));
  return p;
}

void validate_partition(const Partition& p, int num_rrus) {
  std::vector<int> seen(num_rrus, 0);
  std::size_t total = 0;
  for (std::size_t m = 0; m < p.groups.size(); ++m) {
    if (p.groups[m].empty()) {
      throw ConfigError("partition group " + std::to_string(m) + " is empty");
    }
    for (int l : p.groups[m]) {
      if (l < 0 || l >= num_rrus || p.group_of[l] != static_cast<int>(m)) {
        throw ConfigError("partition group lists disagree with the group map");
      }
      ++seen[l];
    }
    total += p.groups[m].size();
  }
  if (total != static_cast<std::size_t>(num_rrus)) {
    throw ConfigError("partition group sizes sum to " + std::to_string(total) +
                      " instead of " + std::to_string(num_rrus));
  }
  for (int l = 0; l < num_rrus; ++l) {
    if (seen[l] != 1) {
      throw ConfigError("RRU " + std::to_string(l) + " appears in " +
                        std::to_string(seen[l]) + " groups");
    }
  }
}

std::size_t ConflictGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& nb : adj) twice += nb.size();
  return twice / 2;
}

ConflictGraph build_conflict_graph(const Geometry& geometry, double delta_fraction,
                                   double area_side) {
  const int L = static_cast<int>(geometry.rru_positions.size());
  ConflictGraph g;
  g.delta = delta_fraction;
  g.adj.assign(L, {});
  const double threshold = delta_fraction * area_side;
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      if (geometry.rru_rru_dist(i, j) <= threshold) {
        g.adj[i].push_back(j);
        g.adj[j].push_back(i);
      }
    }
  }
  return g;
}

namespace {

int count_conflicts(const ConflictGraph& graph, const std::vector<int>& color) {
  int conflicts = 0;
  for (int v = 0; v < graph.nodes(); ++v) {
    for (int u : graph.adj[v]) {
      if (u > v && color[u] == color[v]) ++conflicts;
    }
  }
  return conflicts;
}

}  // namespace

ColoringResult tabu_coloring(const ConflictGraph& graph, int colors,
                             const TabuKnobs& knobs, std::uint64_t seed) {
  const int L = graph.nodes();
  ColoringResult best;
  best.conflicts = std::numeric_limits<int>::max();
  if (colors < 1) {
    best.conflicts = static_cast<int>(graph.edge_count()) + 1;
    return best;
  }
  if (colors == 1) {
    // nothing to search: a 1-coloring is proper iff there are no edges
    best.color.assign(L, 0);
    best.conflicts = static_cast<int>(graph.edge_count());
    best.feasible = best.conflicts == 0;
    return best;
  }

  for (int restart = 0; restart < knobs.restarts; ++restart) {
    RngStream stream(derive_seed(seed, restart, "tabu_restart"));
    std::vector<int> color(L);
    for (int v = 0; v < L; ++v) color[v] = static_cast<int>(stream.below(colors));

    // cnt[v][c] = neighbors of v currently colored c
    std::vector<std::vector<int>> cnt(L, std::vector<int>(colors, 0));
    for (int v = 0; v < L; ++v) {
      for (int u : graph.adj[v]) ++cnt[v][color[u]];
    }
    int conflicts = count_conflicts(graph, color);
    std::vector<std::vector<int>> tabu_until(L, std::vector<int>(colors, -1));
    int restart_best = conflicts;

    for (int iter = 0; iter < knobs.max_iters && conflicts > 0; ++iter) {
      // best admissible move among conflicted nodes; ties fall to the first
      // (lowest node, then lowest color) for determinism
      int best_v = -1, best_c = -1, best_delta = std::numeric_limits<int>::max();
      int fallback_v = -1, fallback_c = -1,
          fallback_delta = std::numeric_limits<int>::max();
      for (int v = 0; v < L; ++v) {
        int cur = color[v];
        if (cnt[v][cur] == 0) continue;  // not in conflict
        for (int c = 0; c < colors; ++c) {
          if (c == cur) continue;
          int delta = cnt[v][c] - cnt[v][cur];
          bool tabu = tabu_until[v][c] > iter;
          bool aspires = conflicts + delta < restart_best;
          if (!tabu || aspires) {
            if (delta < best_delta) {
              best_delta = delta;
              best_v = v;
              best_c = c;
            }
          } else if (delta < fallback_delta) {
            fallback_delta = delta;
            fallback_v = v;
            fallback_c = c;
          }
        }
      }
      if (best_v < 0) {
        // every move is tabu; take the least bad one anyway
        best_v = fallback_v;
        best_c = fallback_c;
        best_delta = fallback_delta;
      }
      if (best_v < 0) break;  // no conflicted node has an alternative color

      int old = color[best_v];
      color[best_v] = best_c;
      for (int u : graph.adj[best_v]) {
        --cnt[u][old];
        ++cnt[u][best_c];
      }
      conflicts += best_delta;
      tabu_until[best_v][old] = iter + knobs.tenure;
      restart_best = std::min(restart_best, conflicts);
    }

    if (conflicts < best.conflicts) {
      best.conflicts = conflicts;
      best.color = color;
      best.feasible = conflicts == 0;
    }
    if (best.feasible) break;  // first feasible restart wins
  }
  return best;
}

int achievable_colors(const ConflictGraph& graph, const TabuKnobs& knobs,
                      std::uint64_t seed, int max_colors) {
  for (int c = 1; c <= max_colors; ++c) {
    if (tabu_coloring(graph, c, knobs, seed).feasible) return c;
  }
  return max_colors + 1;
}

namespace {

// relabel groups so that they appear in order of their lowest RRU index;
// output is then independent of color label permutations
Partition canonical_partition(const std::vector<int>& raw_label, int num_groups) {
  std::vector<int> first(num_groups, std::numeric_limits<int>::max());
  for (std::size_t l = 0; l < raw_label.size(); ++l) {
    first[raw_label[l]] = std::min(first[raw_label[l]], static_cast<int>(l));
  }
  std::vector<int> order(num_groups);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return first[a] < first[b]; });
  std::vector<int> relabel(num_groups);
  for (int g = 0; g < num_groups; ++g) relabel[order[g]] = g;
  std::vector<int> group_of(raw_label.size());
  for (std::size_t l = 0; l < raw_label.size(); ++l) group_of[l] = relabel[raw_label[l]];
  return make_partition(group_of, num_groups);
}

// distance from RRU v to the nearest RRU of the group, skipping v itself
double nearest_member_distance(const Geometry& geometry, const std::vector<int>& members,
                               int v) {
  double nearest = std::numeric_limits<double>::infinity();
  for (int u : members) {
    if (u != v) nearest = std::min(nearest, geometry.rru_rru_dist(v, u));
  }
  return nearest;
}

// isolated RRUs (degree 0 at the final delta) got arbitrary colors; re-attach
// them, most isolated first, to the group whose nearest member is farthest
void reattach_isolated(const Geometry& geometry, const ConflictGraph& graph,
                       std::vector<int>& color, int colors) {
  const int L = graph.nodes();
  std::vector<int> isolated;
  for (int v = 0; v < L; ++v) {
    if (graph.adj[v].empty()) isolated.push_back(v);
  }
  if (isolated.empty() || L < 2) return;
  std::vector<double> isolation(L, 0.0);
  for (int v : isolated) {
    double d = std::numeric_limits<double>::infinity();
    for (int u = 0; u < L; ++u) {
      if (u != v) d = std::min(d, geometry.rru_rru_dist(v, u));
    }
    isolation[v] = d;
  }
  std::stable_sort(isolated.begin(), isolated.end(),
                   [&](int a, int b) { return isolation[a] > isolation[b]; });

  std::vector<std::vector<int>> members(colors);
  std::vector<int> size(colors, 0);
  for (int v = 0; v < L; ++v) {
    members[color[v]].push_back(v);
    ++size[color[v]];
  }
  for (int v : isolated) {
    if (size[color[v]] <= 1) continue;  // moving would empty its group
    int best_g = -1;
    double best_d = -1.0;
    for (int g = 0; g < colors; ++g) {
      double d = nearest_member_distance(geometry, members[g], v);
      if (d > best_d) {
        best_d = d;
        best_g = g;
      }
    }
    if (best_g < 0 || best_g == color[v]) continue;
    --size[color[v]];
    auto& old_members = members[color[v]];
    old_members.erase(std::find(old_members.begin(), old_members.end(), v));
    color[v] = best_g;
    members[best_g].push_back(v);
    ++size[best_g];
  }
}

}  // namespace

Partition graph_color_associate(const Geometry& geometry, double area_side, int num_edus,
                                const GroupingKnobs& knobs, std::uint64_t seed,
                                double* final_delta) {
  const int L = static_cast<int>(geometry.rru_positions.size());
  if (final_delta) *final_delta = 0.0;
  if (num_edus < 1 || num_edus > L) {
    throw ConfigError("graph coloring needs 1 <= num_edus <= num_rrus");
  }
  if (num_edus == 1) {
    return make_partition(std::vector<int>(L, 0), 1);
  }
  if (num_edus == L) {
    std::vector<int> singleton(L);
    std::iota(singleton.begin(), singleton.end(), 0);
    return make_partition(singleton, L);
  }

  double lo = 0.0, hi = 1.0;
  // classification of delta by the color demand of its conflict graph:
  // needs > M colors -> too dense; < M (or idle colors) -> too sparse.
  // delta = 0 is sparse by definition (empty graph, one color), so the
  // bracket is valid once some dense delta shows up; until then the upper
  // end 1.0 itself gets probed.
  bool saw_sparse = false, saw_dense = false;
  double sparse_delta = 0.0, dense_delta = 1.0;
  for (int iter = 0; iter < knobs.bisect_max_iters; ++iter) {
    double delta;
    if (iter == 0) delta = knobs.delta_init;
    else if (!saw_dense) delta = hi;
    else delta = 0.5 * (lo + hi);
    ConflictGraph graph = build_conflict_graph(geometry, delta, area_side);
    ColoringResult with_m = tabu_coloring(graph, num_edus, knobs.tabu, seed);
    if (!with_m.feasible) {
      saw_dense = true;
      dense_delta = delta;
      hi = delta;
      continue;
    }
    ColoringResult with_less = tabu_coloring(graph, num_edus - 1, knobs.tabu, seed);
    bool all_used = true;
    if (!with_less.feasible) {
      std::vector<int> used(num_edus, 0);
      for (int c : with_m.color) used[c] = 1;
      all_used = std::accumulate(used.begin(), used.end(), 0) == num_edus;
    }
    if (with_less.feasible || !all_used) {
      saw_sparse = true;
      sparse_delta = delta;
      lo = delta;
      if (delta >= hi) break;  // even the full threshold is too sparse
      continue;
    }
    // exactly M colors demanded and used
    std::vector<int> color = with_m.color;
    reattach_isolated(geometry, graph, color, num_edus);
    if (final_delta) *final_delta = delta;
    return canonical_partition(color, num_edus);
  }
  // report what the nearest probed thresholds can actually support
  std::string detail;
  if (saw_sparse) {
    ConflictGraph g = build_conflict_graph(geometry, sparse_delta, area_side);
    detail += "; delta " + std::to_string(sparse_delta) + " needs only " +
              std::to_string(achievable_colors(g, knobs.tabu, seed, num_edus)) +
              " colors";
  }
  if (saw_dense) {
    int cap = num_edus + 5;
    ConflictGraph g = build_conflict_graph(geometry, dense_delta, area_side);
    int need = achievable_colors(g, knobs.tabu, seed, cap);
    detail += "; delta " + std::to_string(dense_delta) + " needs " +
              (need > cap ? "> " + std::to_string(cap) : std::to_string(need)) +
              " colors";
  }
  throw DegenerateGeometry("conflict-distance bisection found no threshold demanding exactly " +
                           std::to_string(num_edus) + " colors" + detail);
}

Partition kmeans_pp(const std::vector<Eigen::Vector2d>& points, int num_groups,
                    double area_side, int restarts, std::uint64_t seed) {
  const int L = static_cast<int>(points.size());
  if (num_groups < 1 || num_groups > L) {
    throw ConfigError("kmeans needs 1 <= num_groups <= num_points");
  }
  const double tol = 1e-6 * area_side;
  std::vector<int> best_assign;
  double best_wcss = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < restarts; ++restart) {
    RngStream stream(derive_seed(seed, restart, "kmeans_restart"));

    // k-means++ seeding: next centroid chosen proportional to squared
    // distance from the chosen set
    std::vector<Eigen::Vector2d> centers;
    centers.push_back(points[stream.below(L)]);
    std::vector<double> d2(L);
    while (static_cast<int>(centers.size()) < num_groups) {
      double total = 0.0;
      for (int l = 0; l < L; ++l) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) best = std::min(best, (points[l] - c).squaredNorm());
        d2[l] = best;
        total += best;
      }
      int pick = 0;
      if (total > 0.0) {
        double u = stream.uniform() * total;
        double acc = 0.0;
        pick = L - 1;
        for (int l = 0; l < L; ++l) {
          acc += d2[l];
          if (u < acc) {
            pick = l;
            break;
          }
        }
      } else {
        pick = static_cast<int>(stream.below(L));  // all points coincide
      }
      centers.push_back(points[pick]);
    }

    std::vector<int> assign(L, 0);
    for (int lloyd = 0; lloyd < 1000; ++lloyd) {
      for (int l = 0; l < L; ++l) {
        double best = std::numeric_limits<double>::infinity();
        for (int g = 0; g < num_groups; ++g) {
          double d = (points[l] - centers[g]).squaredNorm();
          if (d < best) {
            best = d;
            assign[l] = g;
          }
        }
      }
      std::vector<int> size(num_groups, 0);
      for (int l = 0; l < L; ++l) ++size[assign[l]];
      // repair empty clusters: the largest cluster donates its farthest point
      for (int g = 0; g < num_groups; ++g) {
        if (size[g] > 0) continue;
        int donor = static_cast<int>(std::max_element(size.begin(), size.end()) -
                                     size.begin());
        int moved = -1;
        double farthest = -1.0;
        for (int l = 0; l < L; ++l) {
          if (assign[l] != donor) continue;
          double d = (points[l] - centers[donor]).squaredNorm();
          if (d > farthest) {
            farthest = d;
            moved = l;
          }
        }
        assign[moved] = g;
        --size[donor];
        ++size[g];
      }
      double shift = 0.0;
      std::vector<Eigen::Vector2d> next(num_groups, Eigen::Vector2d::Zero());
      for (int l = 0; l < L; ++l) next[assign[l]] += points[l];
      for (int g = 0; g < num_groups; ++g) {
        next[g] /= size[g];
        shift = std::max(shift, (next[g] - centers[g]).norm());
        centers[g] = next[g];
      }
      if (shift < tol) break;
    }

    double wcss = 0.0;
    for (int l = 0; l < L; ++l) wcss += (points[l] - centers[assign[l]]).squaredNorm();
    if (wcss < best_wcss) {
      best_wcss = wcss;
      best_assign = assign;
    }
  }
  return canonical_partition(best_assign, num_groups);
}

Partition interleaved_partition(int num_rrus, int num_groups) {
  std::vector<int> group_of(num_rrus);
  for (int l = 0; l < num_rrus; ++l) group_of[l] = l % num_groups;
  return make_partition(group_of, num_groups);
}

Partition build_partition(const ScenarioConfig& config, const Geometry& geometry,
                          std::uint64_t seed) {
  switch (config.rru_grouping) {
    case RruGrouping::GraphColoring: {
      GroupingKnobs knobs;
      knobs.tabu = config.tabu;
      knobs.delta_init = config.delta_init;
      knobs.bisect_max_iters = config.bisect_max_iters;
      return graph_color_associate(geometry, config.area_side, config.num_edus, knobs,
                                   seed);
    }
    case RruGrouping::KMeansPp:
      return kmeans_pp(geometry.rru_positions, config.num_edus, config.area_side,
                       config.kmeans_restarts, seed);
    case RruGrouping::Interleaved:
      return interleaved_partition(config.num_rrus, config.num_edus);
    case RruGrouping::Manual: {
      std::vector<int> group_of(config.num_rrus, -1);
      for (std::size_t m = 0; m < config.manual_partition.size(); ++m) {
        for (int l : config.manual_partition[m]) {
          if (l < 0 || l >= config.num_rrus || group_of[l] != -1) {
            throw ConfigError("manual_partition is not a partition of the RRUs");
          }
          group_of[l] = static_cast<int>(m);
        }
      }
      return make_partition(group_of, static_cast<int>(config.manual_partition.size()));
    }
  }
  throw ConfigError("unhandled rru_grouping");
}

double ga_fitness(const Partition& partition, const std::vector<Eigen::Vector2d>& points) {
  if (partition.groups.size() < 2) {
    throw ConfigError("fitness needs at least two groups");
  }
  double denom = 0.0;
  for (std::size_t a = 0; a < partition.groups.size(); ++a) {
    for (std::size_t b = a + 1; b < partition.groups.size(); ++b) {
      for (int i : partition.groups[a]) {
        for (int j : partition.groups[b]) {
          denom += (points[i] - points[j]).norm();
        }
      }
    }
  }
  if (denom == 0.0) {
    throw DegenerateGeometry("all cross-group RRU pairs coincide; fitness undefined");
  }
  return 1.0 / denom;
}

AssociationMatrices full_association(int num_ues, int num_rrus) {
  AssociationMatrices a;
  a.delta = Eigen::MatrixXi::Ones(num_ues, num_rrus);
  return a;
}

AssociationMatrices dcc_associate(const LargeScaleFading& fading,
                                  const std::vector<int>& pilots) {
  const int K = static_cast<int>(fading.beta.rows());
  const int L = static_cast<int>(fading.beta.cols());
  AssociationMatrices a;
  a.delta = Eigen::MatrixXi::Zero(K, L);
  // per (RRU, pilot): serve the strongest UE on that pilot
  for (int l = 0; l < L; ++l) {
    std::vector<int> winner;  // indexed by pilot, lazily grown
    for (int k = 0; k < K; ++k) {
      int t = pilots[k];
      if (t >= static_cast<int>(winner.size())) winner.resize(t + 1, -1);
      if (winner[t] < 0 || fading.beta(k, l) > fading.beta(winner[t], l)) {
        winner[t] = k;
      }
    }
    for (int k : winner) {
      if (k >= 0) a.delta(k, l) = 1;
    }
  }
  // master-RRU guarantee: every UE keeps its strongest RRU
  for (int k = 0; k < K; ++k) {
    int master = 0;
    fading.beta.row(k).maxCoeff(&master);
    a.delta(k, master) = 1;
  }
  return a;
}

Eigen::VectorXd antenna_mask(const AssociationMatrices& assoc, const Partition& partition,
                             int edu, int ue, int antennas_per_rru) {
  const auto& members = partition.groups.at(edu);
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(members.size() * antennas_per_rru);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (assoc.delta(ue, members[i]) != 0) {
      mask.segment(i * antennas_per_rru, antennas_per_rru).setOnes();
    }
  }
  return mask;
}

Eigen::Vector2d centroid(const std::vector<Eigen::Vector2d>& points) {
  if (points.empty()) throw std::domain_error("centroid of an empty point set");
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

}  // namespace cfran
