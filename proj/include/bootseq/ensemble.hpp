#pragma once

// Bagged reference sets, score vectors and the legitimate-execution store.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "bootseq/aligner.hpp"
#include "bootseq/syscall_trace.hpp"

namespace bootseq {

struct ScoreVector {
  std::vector<double> values;
  bool sorted = false;

  std::size_t size() const noexcept { return values.size(); }
};

enum class BaggingMode { bootstrap, exhaustive };

std::string_view to_string(BaggingMode mode) noexcept;
BaggingMode parse_bagging_mode(std::string_view text);

struct BaggingPlan {
  std::size_t bags = 25;       // m
  std::size_t bag_size = 15;   // n
  std::uint64_t seed = 1;
  BaggingMode mode = BaggingMode::bootstrap;
  std::size_t exhaustive_cap = 5000;

  void validate() const;
};

/// Saturating binomial coefficient; returns `limit + 1` once the value exceeds limit.
std::uint64_t combinations(std::size_t n, std::size_t k, std::uint64_t limit);

/// Bags as indices into a pool of `pool_size` sequences. Bootstrap draws
/// uniformly with replacement from a generator seeded by the plan; exhaustive
/// lists every size-n combination in lexicographic order.
std::vector<std::vector<std::uint32_t>> draw_bags(std::size_t pool_size, const BaggingPlan& plan);

std::vector<std::vector<BootSequence>> bag_reference_sets(std::span<const BootSequence> pool,
                                                          const BaggingPlan& plan);

/// values[i] = score_only(test, subset[i]); unsorted.
ScoreVector score_vector(const BootSequence& test, std::span<const BootSequence> subset,
                         const ScoringScheme& scheme);

/// Sorts each vector, then averages position by position.
ScoreVector aggregate(std::span<const ScoreVector> vectors);

/// Leave-one-out baseline: in each bag every member is scored against the
/// other members and averaged, then the bags are aggregated. Peers are taken
/// positionally, so a member drawn twice counts its duplicate as a peer.
ScoreVector reference_baseline(std::span<const std::vector<BootSequence>> subsets, const ScoringScheme& scheme);

enum class BaselineMode {
  per_bag,      // leave-one-out inside each bag
  whole_store,  // each member's mean against every other pool member
};

std::string_view to_string(BaselineMode mode) noexcept;
BaselineMode parse_baseline_mode(std::string_view text);

/// Bags drawn once over a fixed pool, with the pairwise scores the baseline
/// needs computed up front (in parallel). Test vectors reuse the bags, so a
/// model answers any number of analyses with identical pairing.
///
/// Unlike reference_baseline, peers that are the same pool entry as the member
/// are skipped, since a bootstrap duplicate would contribute a self-alignment.
/// A bag made of a single entry falls back to the positional rule.
class ReferenceModel {
 public:
  ReferenceModel(std::vector<BootSequence> pool, ScoringScheme scheme, BaggingPlan plan,
                 BaselineMode baseline_mode = BaselineMode::per_bag);

  const std::vector<BootSequence>& pool() const noexcept { return pool_; }
  const std::vector<std::vector<std::uint32_t>>& bags() const noexcept { return bags_; }
  const ScoreVector& baseline() const noexcept { return baseline_; }
  const ScoringScheme& scheme() const noexcept { return scheme_; }

  ScoreVector test_vector(const BootSequence& test) const;
  /// Same as calling test_vector on each, with every alignment scheduled together.
  std::vector<ScoreVector> test_vectors(std::span<const BootSequence> tests) const;

 private:
  ScoreVector vector_from_scores(std::span<const Score> pool_scores) const;

  std::vector<BootSequence> pool_;
  ScoringScheme scheme_;
  BaggingPlan plan_;
  BaselineMode baseline_mode_;
  std::vector<std::vector<std::uint32_t>> bags_;
  std::vector<std::uint32_t> used_;  // pool entries that appear in some bag
  ScoreVector baseline_;
};

inline constexpr std::size_t kDefaultStoreCapacity = 150;

/// Per-app FIFO store of verified legitimate sequences. Writers are
/// serialized; readers take copies under a shared lock.
///
/// On disk: <root>/alphabet.txt, and per app <root>/<app>/manifest.json plus
/// one sequence file per entry. The manifest alone defines insertion order.
class ReferenceStore {
 public:
  struct Entry {
    BootSequence sequence;
    std::uint64_t inserted_at = 0;  // monotonic per app
    std::string file;               // name inside the app directory
  };

  explicit ReferenceStore(Alphabet alphabet, std::size_t capacity = kDefaultStoreCapacity);

  ReferenceStore(const ReferenceStore&) = delete;
  ReferenceStore& operator=(const ReferenceStore&) = delete;

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t capacity() const noexcept { return capacity_; }

  /// Admits only preprocessed, verified, legitimate-labelled sequences.
  /// Returns the number of evicted entries (0 or more).
  std::size_t add(BootSequence sequence, bool verified);

  bool contains(const std::string& app_id) const;
  std::size_t size(const std::string& app_id) const;
  std::vector<std::string> apps() const;
  /// Oldest first. Throws NotFound for an app with no entries.
  std::vector<BootSequence> snapshot(const std::string& app_id) const;
  std::vector<Entry> entries(const std::string& app_id) const;

  /// Writes every app. With a root set, add() also persists incrementally.
  void save(const std::filesystem::path& root) const;
  static std::unique_ptr<ReferenceStore> load(const std::filesystem::path& root);
  /// Opens an existing store or creates an empty one with the given alphabet.
  static std::unique_ptr<ReferenceStore> open_or_create(const std::filesystem::path& root, const Alphabet& alphabet,
                                                        std::size_t capacity = kDefaultStoreCapacity);
  void attach(const std::filesystem::path& root) { root_ = root; }

 private:
  struct AppEntries {
    std::vector<Entry> items;
    std::uint64_t next_serial = 0;
  };

  void save_app(const std::filesystem::path& root, const std::string& app_id, const AppEntries& app) const;

  Alphabet alphabet_;
  std::size_t capacity_;
  std::map<std::string, AppEntries> apps_;
  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
};

}  // namespace bootseq
