#include "symco/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "numerics.hpp"
#include "symco/rates.hpp"

namespace symco {

namespace {

// Renumber group labels to 0..r-1 in order of first appearance; returns r.
int normalize_groups(std::vector<int>& groups) {
  std::vector<int> map;
  int next = 0;
  int maxg = 0;
  for (int g : groups) maxg = std::max(maxg, g);
  map.assign(static_cast<std::size_t>(maxg) + 1, -1);
  for (int& g : groups) {
    if (map[g] < 0) map[g] = next++;
    g = map[g];
  }
  return next;
}

int distinct_groups(std::vector<int> groups) { return normalize_groups(groups); }

}  // namespace

LabeledPartition::LabeledPartition(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("LabeledPartition: empty block");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
}

LabeledPartition LabeledPartition::singletons(int n) {
  std::vector<std::vector<int>> b(n);
  for (int i = 0; i < n; ++i) b[i] = {i + 1};
  return LabeledPartition(std::move(b));
}

int LabeledPartition::label_count() const {
  int c = 0;
  for (const auto& b : blocks_) c += static_cast<int>(b.size());
  return c;
}

LabeledPartition LabeledPartition::merged(std::span<const int> group_of_block) const {
  if (group_of_block.size() != blocks_.size()) throw std::invalid_argument("merged: one group label per block required");
  std::vector<int> groups(group_of_block.begin(), group_of_block.end());
  const int r = normalize_groups(groups);
  std::vector<std::vector<int>> out(r);
  for (std::size_t i = 0; i < blocks_.size(); ++i)
    out[groups[i]].insert(out[groups[i]].end(), blocks_[i].begin(), blocks_[i].end());
  return LabeledPartition(std::move(out));
}

bool LabeledPartition::is_partition_of(int n) const {
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  int count = 0;
  for (const auto& b : blocks_) {
    for (int x : b) {
      if (x < 1 || x > n || seen[x]) return false;
      seen[x] = 1;
      ++count;
    }
  }
  return count == n;
}

std::string EventKind::to_string() const {
  switch (type) {
    case Type::kingman_pair:
      return "kingman_pair";
    case Type::symmetric:
      return "symmetric(" + std::to_string(boxes) + ")";
    case Type::drastic:
      return "drastic(" + std::to_string(boxes) + "," + std::to_string(generations) + ")";
    case Type::soft: {
      nlohmann::json j = duration;
      return "soft(" + j.dump() + ")";
    }
  }
  return "unknown";
}

std::vector<int> paintbox_groups(int blocks, std::int64_t k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("paintbox: k must be positive");
  std::vector<int> groups(blocks);
  if (k <= 4 * static_cast<std::int64_t>(blocks) + 16) {
    std::vector<int> box_to_group(static_cast<std::size_t>(k), -1);
    int next = 0;
    for (int i = 0; i < blocks; ++i) {
      const auto box = uniform_index(rng, static_cast<std::uint64_t>(k));
      if (box_to_group[box] < 0) box_to_group[box] = next++;
      groups[i] = box_to_group[box];
    }
    return groups;
  }
  // sparse: occupied boxes are exchangeable, so only the occupied count matters
  int occupied = 0;
  const double kd = static_cast<double>(k);
  for (int i = 0; i < blocks; ++i) {
    if (occupied > 0 && uniform01(rng) * kd < occupied) {
      groups[i] = static_cast<int>(uniform_index(rng, occupied));
    } else {
      groups[i] = occupied++;
    }
  }
  return groups;
}

LabeledPartition paintbox_merge(const LabeledPartition& p, std::int64_t k, Rng& rng, std::vector<int>* occupancies) {
  const auto groups = paintbox_groups(p.block_count(), k, rng);
  if (occupancies) {
    std::vector<int> g = groups;
    const int r = normalize_groups(g);
    occupancies->assign(r, 0);
    for (int x : g) (*occupancies)[x] += 1;
  }
  return p.merged(groups);
}

LabeledPartition wf_ancestral_step(const LabeledPartition& p, std::int64_t k, Rng& rng) {
  return paintbox_merge(p, k, rng);
}

std::vector<std::vector<double>> ancestral_count_matrix(std::int64_t k, int n) {
  if (k < 1 || n < 1) throw std::invalid_argument("ancestral_count_matrix: k and n must be positive");
  const auto table = detail::occupancy_table(static_cast<double>(k), n);
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= j; ++i) m[j - 1][i - 1] = table[j][i];
  return m;
}

namespace {

// Sequential-ball sampler: exact for any k, O(b).
std::vector<int> collision_groups_sequential(int b, double k, int first_collision, Rng& rng) {
  std::vector<int> groups(b);
  int occupied = 0;
  for (int m = 1; m < first_collision; ++m) groups[m - 1] = occupied++;
  groups[first_collision - 1] = static_cast<int>(uniform_index(rng, occupied));
  for (int m = first_collision + 1; m <= b; ++m) {
    if (uniform01(rng) * k < occupied) {
      groups[m - 1] = static_cast<int>(uniform_index(rng, occupied));
    } else {
      groups[m - 1] = occupied++;
    }
  }
  return groups;
}

// Index of the first ball that lands in an occupied box, conditioned on it being <= b.
int first_collision_index(int b, double k, Rng& rng) {
  const double pc = collision_prob_real(k, b);
  const double target = uniform_open(rng) * pc;
  if (k < 2.0 * b || b < 40) {
    // P(first collision at m) = prod_{i<m-1}(1 - i/k) * (m-1)/k
    double survive = 1.0;
    double cum = 0.0;
    for (int m = 2; m <= b; ++m) {
      const double hit = survive * (m - 1) / k;
      cum += hit;
      if (cum >= target) return m;
      survive *= 1.0 - (m - 1) / k;
      if (survive <= 0.0) return m + 1 <= b ? m + 1 : b;
    }
    return b;
  }
  // smallest m with P(collision among first m) >= target
  int lo = 2, hi = b;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (collision_prob_real(k, mid) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

// Number of distinct boxes after placing `remaining` more balls with `occupied` boxes in use.
int occupied_after(int occupied, int remaining, double k, Rng& rng) {
  if (k < 2.0 * (occupied + remaining) || occupied + remaining < 40) {
    for (int t = 0; t < remaining; ++t)
      if (!(uniform01(rng) * k < occupied)) ++occupied;
    return occupied;
  }
  while (remaining > 0) {
    // run length g of fresh boxes: P(g' >= g) = prod_{m=occupied}^{occupied+g-1} (1 - m/k)
    const double log_u = std::log(uniform_open(rng));
    const double base = detail::log_no_collision(k, occupied);
    auto log_survive = [&](int g) { return detail::log_no_collision(k, occupied + g) - base; };
    if (log_survive(remaining) >= log_u) return occupied + remaining;
    int lo = 0, hi = remaining - 1;  // largest g with log_survive(g) >= log_u
    while (lo < hi) {
      const int mid = lo + (hi - lo + 1) / 2;
      if (log_survive(mid) >= log_u) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    occupied += lo;
    remaining -= lo + 1;
  }
  return occupied;
}

}  // namespace

std::vector<int> conditional_collision_groups(int b, std::int64_t k, Rng& rng) {
  if (b < 2) throw std::invalid_argument("conditional_collision_groups: need at least two blocks");
  if (k < 1) throw std::invalid_argument("conditional_collision_groups: k must be positive");
  const double kd = static_cast<double>(k);
  return collision_groups_sequential(b, kd, first_collision_index(b, kd, rng), rng);
}

namespace {

double power_integral(double s, double lo, double hi) {
  if (std::isinf(hi)) return std::pow(lo, 1.0 - s) / (s - 1.0);
  const double lr = std::log(hi / lo);
  if (std::abs(1.0 - s) < 1e-12) return lr;
  return std::pow(lo, 1.0 - s) * std::expm1((1.0 - s) * lr) / (1.0 - s);
}

// Inverse CDF of density proportional to y^{-s} on [lo, hi).
double power_inverse(double s, double lo, double hi, double total, double u) {
  if (std::abs(1.0 - s) < 1e-12) return lo * std::exp(u * std::log(hi / lo));
  const double z = std::log1p(u * total * (1.0 - s) / std::pow(lo, 1.0 - s)) / (1.0 - s);
  return lo * std::exp(z);
}

struct Proposal {
  bool kingman = false;
  double k = 0.0;  // boxes; 0 means rejected
};

// Candidate generator for the effective event process at a fixed block count.
class SymmetricSource {
 public:
  explicit SymmetricSource(const CoagulationMeasure& f) : f_(f) {
    if (f.is_explicit()) {
      atoms_ = f.finite_atoms();
    } else {
      const auto& p = std::get<PowerLawBody>(f.body);
      beta_ = p.beta;
      kmax_ = p.truncation ? static_cast<double>(*p.truncation) : INFINITY;
    }
  }

  void set_blocks(int b) {
    if (b == b_) return;
    b_ = b;
    pairs_ = 0.5 * b * (b - 1.0);
    kingman_rate_ = f_.kingman_atom * pairs_;
    if (f_.is_explicit()) {
      cumulative_.clear();
      detail::CompensatedSum s;
      for (const auto& [k, v] : atoms_) {
        s.add(v * collision_prob_real(static_cast<double>(k), b));
        cumulative_.push_back(s.value());
      }
      body_rate_ = cumulative_.empty() ? 0.0 : cumulative_.back();
      return;
    }
    const double c = pairs_;
    a_hi_ = std::min(c, kmax_);
    kappa_a_ = std::pow(2.0, beta_);
    int_a_ = power_integral(beta_, 1.0, a_hi_ + 1.0);
    mass_a_ = kappa_a_ * int_a_;
    if (kmax_ > c) {
      b_lo_ = c + 1.0;
      b_hi_ = std::isinf(kmax_) ? INFINITY : kmax_ + 1.0;
      kappa_b_ = std::pow(1.0 + 1.0 / (c + 1.0), 1.0 + beta_);
      int_b_ = power_integral(1.0 + beta_, b_lo_, b_hi_);
      mass_b_ = kappa_b_ * c * int_b_;
    } else {
      mass_b_ = 0.0;
    }
    body_rate_ = mass_a_ + mass_b_;
  }

  double rate() const { return kingman_rate_ + body_rate_; }

  Proposal propose(Rng& rng) const {
    const double total = rate();
    double u = uniform01(rng) * total;
    if (u < kingman_rate_) return {true, 0.0};
    u -= kingman_rate_;
    if (f_.is_explicit()) {
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
      return {false, static_cast<double>(atoms_[idx].first)};
    }
    double y, weight_bound;
    if (u < mass_a_) {
      y = power_inverse(beta_, 1.0, a_hi_ + 1.0, int_a_, uniform01(rng));
      const double x = std::min(std::floor(y), a_hi_);
      weight_bound = kappa_a_ * power_integral(beta_, x, x + 1.0);
      y = x;
    } else {
      y = std::isinf(b_hi_) ? b_lo_ * std::pow(1.0 - uniform01(rng), -1.0 / beta_)
                            : power_inverse(1.0 + beta_, b_lo_, b_hi_, int_b_, uniform01(rng));
      if (!(y < 9.0e18)) return {false, 0.0};
      double x = std::max(std::floor(y), b_lo_);
      if (!std::isinf(kmax_)) x = std::min(x, kmax_);
      weight_bound = kappa_b_ * pairs_ * power_integral(1.0 + beta_, x, x + 1.0);
      y = x;
    }
    const double target = std::pow(y, -beta_) * collision_prob_real(y, b_);
    if (uniform01(rng) * weight_bound < target) return {false, y};
    return {false, 0.0};
  }

 private:
  const CoagulationMeasure& f_;
  std::vector<std::pair<std::int64_t, double>> atoms_;
  std::vector<double> cumulative_;
  double beta_ = 1.0;
  double kmax_ = INFINITY;
  int b_ = -1;
  double pairs_ = 0.0;
  double kingman_rate_ = 0.0;
  double body_rate_ = 0.0;
  double a_hi_ = 0.0, kappa_a_ = 0.0, int_a_ = 0.0, mass_a_ = 0.0;
  double b_lo_ = 0.0, b_hi_ = 0.0, kappa_b_ = 0.0, int_b_ = 0.0, mass_b_ = 0.0;
};

std::vector<int> kingman_pair_groups(int b, Rng& rng) {
  std::vector<int> groups(b);
  std::iota(groups.begin(), groups.end(), 0);
  const auto i = static_cast<int>(uniform_index(rng, b));
  auto j = static_cast<int>(uniform_index(rng, b - 1));
  if (j >= i) ++j;
  groups[j] = groups[i];
  return groups;
}

// Shared bookkeeping for all three simulators.
class Recorder {
 public:
  Recorder(int n, TrackMode mode) : mode_(mode), blocks_(n) {
    if (mode == TrackMode::partitions) partition_ = LabeledPartition::singletons(n);
  }
  int blocks() const { return blocks_; }
  TrackMode mode() const { return mode_; }

  void advance(double dt) {
    run_.stats.length += dt * blocks_;
    time_ += dt;
  }
  // Apply a grouping of the current blocks; silent groupings are not recorded.
  void apply_groups(std::vector<int> groups, const EventKind& kind) {
    const int r = mode_ == TrackMode::partitions ? normalize_groups(groups) : distinct_groups(groups);
    if (r == blocks_) return;
    if (mode_ == TrackMode::partitions) partition_ = partition_.merged(groups);
    record(r, kind);
  }
  void apply_count(int r, const EventKind& kind) {
    if (r == blocks_) return;
    record(r, kind);
  }
  CoalescentRun finish() {
    run_.stats.tmrca = time_;
    run_.stats.n_events = static_cast<int>(run_.events.size());
    return std::move(run_);
  }

 private:
  void record(int r, const EventKind& kind) {
    blocks_ = r;
    EventRecord e;
    e.time = time_;
    e.kind = kind;
    e.blocks_after = r;
    if (mode_ == TrackMode::partitions) e.partition_after = partition_;
    run_.events.push_back(std::move(e));
  }

  TrackMode mode_;
  int blocks_;
  double time_ = 0.0;
  LabeledPartition partition_;
  CoalescentRun run_;
};

void check_sample_size(int n) {
  if (n < 2) throw std::invalid_argument("coalescent simulation needs n >= 2");
}

}  // namespace

CoalescentRun simulate_s_coalescent(const CoagulationMeasure& f, int n, Rng& rng, TrackMode mode) {
  require_valid(f);
  check_sample_size(n);
  if (f.kingman_atom == 0.0 && f.is_explicit() && f.finite_atoms().empty())
    throw std::invalid_argument("simulate_s_coalescent: measure has no mass, absorption is never reached");
  SymmetricSource source(f);
  Recorder rec(n, mode);
  while (rec.blocks() > 1) {
    const int b = rec.blocks();
    source.set_blocks(b);
    rec.advance(exponential(rng, source.rate()));
    const Proposal p = source.propose(rng);
    if (p.kingman) {
      if (mode == TrackMode::partitions) {
        rec.apply_groups(kingman_pair_groups(b, rng), {EventKind::Type::kingman_pair});
      } else {
        rec.apply_count(b - 1, {EventKind::Type::kingman_pair});
      }
      continue;
    }
    if (p.k == 0.0) continue;
    EventKind kind{EventKind::Type::symmetric, static_cast<std::int64_t>(p.k)};
    if (mode == TrackMode::partitions) {
      rec.apply_groups(collision_groups_sequential(b, p.k, first_collision_index(b, p.k, rng), rng), kind);
    } else {
      const int m = first_collision_index(b, p.k, rng);
      rec.apply_count(occupied_after(m - 1, b - m, p.k, rng), kind);
    }
  }
  return rec.finish();
}

namespace {

int paintbox_count(int blocks, double k, Rng& rng) { return occupied_after(0, blocks, k, rng); }

}  // namespace

int paintbox_block_count(int blocks, std::int64_t k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("paintbox: k must be positive");
  if (blocks < 0) throw std::invalid_argument("paintbox: negative block count");
  return paintbox_count(blocks, static_cast<double>(k), rng);
}

CoalescentRun simulate_drastic_bottleneck_coalescent(const DiscreteLaw& f0, const DiscreteLaw& durations, double eta,
                                                     double a, int n, Rng& rng, TrackMode mode) {
  check_sample_size(n);
  if (!(eta >= 0.0) || !(a >= 0.0)) throw std::invalid_argument("drastic coalescent: eta and a must be non-negative");
  if (eta == 0.0 && a == 0.0) throw std::invalid_argument("drastic coalescent: no coalescence mechanism");
  Recorder rec(n, mode);
  while (rec.blocks() > 1) {
    const int b = rec.blocks();
    const double kingman = a * 0.5 * b * (b - 1.0);
    rec.advance(exponential(rng, kingman + eta));
    if (uniform01(rng) * (kingman + eta) < kingman) {
      if (mode == TrackMode::partitions) {
        rec.apply_groups(kingman_pair_groups(b, rng), {EventKind::Type::kingman_pair});
      } else {
        rec.apply_count(b - 1, {EventKind::Type::kingman_pair});
      }
      continue;
    }
    const std::int64_t k = f0.sample(rng);
    const auto g = static_cast<int>(durations.sample(rng));
    EventKind kind{EventKind::Type::drastic, k, g};
    if (mode == TrackMode::partitions) {
      std::vector<int> groups = paintbox_groups(b, k, rng);
      int r = normalize_groups(groups);
      for (int step = 1; step < g && r > 1; ++step) {
        auto parents = paintbox_groups(r, k, rng);
        r = normalize_groups(parents);
        for (int& x : groups) x = parents[x];
      }
      rec.apply_groups(std::move(groups), kind);
    } else {
      int r = paintbox_count(b, static_cast<double>(k), rng);
      for (int step = 1; step < g && r > 1; ++step) r = paintbox_count(r, static_cast<double>(k), rng);
      rec.apply_count(r, kind);
    }
  }
  return rec.finish();
}

CoalescentRun simulate_subordinated_kingman(const PositiveLaw& soft_durations, double eta, double a, int n, Rng& rng,
                                            TrackMode mode) {
  check_sample_size(n);
  if (!(eta >= 0.0) || !(a >= 0.0)) throw std::invalid_argument("subordinated Kingman: eta and a must be non-negative");
  if (eta == 0.0 && a == 0.0) throw std::invalid_argument("subordinated Kingman: no coalescence mechanism");
  Recorder rec(n, mode);
  while (rec.blocks() > 1) {
    const int b = rec.blocks();
    const double kingman = a * 0.5 * b * (b - 1.0);
    rec.advance(exponential(rng, kingman + eta));
    if (uniform01(rng) * (kingman + eta) < kingman) {
      if (mode == TrackMode::partitions) {
        rec.apply_groups(kingman_pair_groups(b, rng), {EventKind::Type::kingman_pair});
      } else {
        rec.apply_count(b - 1, {EventKind::Type::kingman_pair});
      }
      continue;
    }
    const double sigma = soft_durations.sample(rng);
    EventKind kind{EventKind::Type::soft, 0, 0, sigma};
    std::vector<int> groups(b);
    std::iota(groups.begin(), groups.end(), 0);
    std::vector<int> reps(groups);  // representative group ids still alive
    double clock = 0.0;
    int r = b;
    while (r > 1) {
      clock += exponential(rng, 0.5 * r * (r - 1.0));
      if (clock > sigma) break;
      if (mode == TrackMode::partitions) {
        const auto i = static_cast<std::size_t>(uniform_index(rng, r));
        auto j = static_cast<std::size_t>(uniform_index(rng, r - 1));
        if (j >= i) ++j;
        const int from = reps[j];
        const int to = reps[i];
        for (int& x : groups)
          if (x == from) x = to;
        reps.erase(reps.begin() + static_cast<std::ptrdiff_t>(j));
      }
      --r;
    }
    if (mode == TrackMode::partitions) {
      rec.apply_groups(std::move(groups), kind);
    } else {
      rec.apply_count(r, kind);
    }
  }
  return rec.finish();
}

double recompute_length(const CoalescentRun& run, int n) {
  double length = 0.0;
  double prev = 0.0;
  int blocks = n;
  for (const auto& e : run.events) {
    length += (e.time - prev) * blocks;
    prev = e.time;
    blocks = e.blocks_after;
  }
  return length;
}

Estimate estimate_tree_length(const CoagulationMeasure& f, int n, std::size_t reps, std::uint64_t seed,
                              unsigned workers) {
  if (reps < 2) throw std::invalid_argument("estimate_tree_length: reps must be >= 2");
  const auto lengths = run_replicates(reps, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    return simulate_s_coalescent(f, n, rng, TrackMode::counts).stats.length;
  });
  return summarize(lengths);
}

void write_events_jsonl(std::ostream& out, const CoalescentRun& run) {
  for (const auto& e : run.events) {
    nlohmann::json j;
    j["t"] = e.time;
    j["kind"] = e.kind.to_string();
    if (e.partition_after.block_count() > 0) {
      j["blocks"] = e.partition_after.blocks();
    } else {
      j["blocks"] = e.blocks_after;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace symco
