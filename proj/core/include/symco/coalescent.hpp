#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "symco/ensemble.hpp"
#include "symco/measures.hpp"
#include "symco/random.hpp"

namespace symco {

class LabeledPartition {
 public:
  LabeledPartition() = default;
  // Blocks are canonicalized: sorted labels, blocks ordered by least element.
  explicit LabeledPartition(std::vector<std::vector<int>> blocks);
  static LabeledPartition singletons(int n);

  int block_count() const { return static_cast<int>(blocks_.size()); }
  int label_count() const;
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  // Merge blocks sharing a group label; group_of_block has one entry per block.
  LabeledPartition merged(std::span<const int> group_of_block) const;
  // True iff the blocks partition {1..n}.
  bool is_partition_of(int n) const;
  bool operator==(const LabeledPartition&) const = default;

 private:
  std::vector<std::vector<int>> blocks_;
};

struct EventKind {
  enum class Type { kingman_pair, symmetric, drastic, soft };
  Type type = Type::kingman_pair;
  std::int64_t boxes = 0;  // k for symmetric and drastic events
  int generations = 0;     // g for drastic events
  double duration = 0.0;   // sigma for soft events
  std::string to_string() const;
};

struct EventRecord {
  double time = 0.0;
  EventKind kind;
  int blocks_after = 0;
  LabeledPartition partition_after;  // empty when simulated in counts mode
};

struct TreeStats {
  double length = 0.0;  // total branch length L_n
  double tmrca = 0.0;
  int n_events = 0;
};

struct CoalescentRun {
  std::vector<EventRecord> events;
  TreeStats stats;
};

enum class TrackMode { partitions, counts };

// Group label per block: blocks sharing a box merge. Optionally returns box occupancies.
std::vector<int> paintbox_groups(int blocks, std::int64_t k, Rng& rng);
LabeledPartition paintbox_merge(const LabeledPartition& p, std::int64_t k, Rng& rng,
                                std::vector<int>* occupancies = nullptr);
// One Wright-Fisher generation backwards in a population of size k: same mechanism as paintbox_merge.
LabeledPartition wf_ancestral_step(const LabeledPartition& p, std::int64_t k, Rng& rng);
// Row j (1-based, j = 1..n) holds P(j -> i) for i = 1..n after one generation of size k.
std::vector<std::vector<double>> ancestral_count_matrix(std::int64_t k, int n);

// Number of occupied boxes after throwing `blocks` balls into k boxes.
int paintbox_block_count(int blocks, std::int64_t k, Rng& rng);

// Group labels for b blocks in k boxes, conditioned on at least one shared box.
std::vector<int> conditional_collision_groups(int b, std::int64_t k, Rng& rng);

CoalescentRun simulate_s_coalescent(const CoagulationMeasure& f, int n, Rng& rng,
                                    TrackMode mode = TrackMode::partitions);
CoalescentRun simulate_drastic_bottleneck_coalescent(const DiscreteLaw& f0, const DiscreteLaw& durations,
                                                     double eta, double a, int n, Rng& rng,
                                                     TrackMode mode = TrackMode::partitions);
CoalescentRun simulate_subordinated_kingman(const PositiveLaw& soft_durations, double eta, double a, int n,
                                            Rng& rng, TrackMode mode = TrackMode::partitions);

// Recompute L_n from the event list (interval length times block count).
double recompute_length(const CoalescentRun& run, int n);

Estimate estimate_tree_length(const CoagulationMeasure& f, int n, std::size_t reps, std::uint64_t seed,
                              unsigned workers = 1);

void write_events_jsonl(std::ostream& out, const CoalescentRun& run);

}  // namespace symco
