#include "bootseq/ensemble.hpp"

#include <algorithm>

#include "bootseq/error.hpp"
#include "bootseq/kernels.hpp"
#include "bootseq/rng.hpp"

namespace bootseq {

std::string_view to_string(BaggingMode mode) noexcept {
  return mode == BaggingMode::bootstrap ? "bootstrap" : "exhaustive";
}

BaggingMode parse_bagging_mode(std::string_view text) {
  if (text == "bootstrap") return BaggingMode::bootstrap;
  if (text == "exhaustive") return BaggingMode::exhaustive;
  throw InvalidInput("unknown bagging mode '" + std::string(text) + "'");
}

std::string_view to_string(BaselineMode mode) noexcept {
  return mode == BaselineMode::per_bag ? "per_bag" : "whole_store";
}

BaselineMode parse_baseline_mode(std::string_view text) {
  if (text == "per_bag" || text == "per-bag") return BaselineMode::per_bag;
  if (text == "whole_store" || text == "whole-store") return BaselineMode::whole_store;
  throw InvalidInput("unknown baseline mode '" + std::string(text) + "'");
}

void BaggingPlan::validate() const {
  if (bags < 1) throw InvalidInput("bagging plan needs at least one bag");
  if (bag_size < 1) throw InvalidInput("bag size must be at least 1");
}

std::uint64_t combinations(std::size_t n, std::size_t k, std::uint64_t limit) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // c stays an exact binomial after each step; stop as soon as it passes limit.
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > limit) return limit + 1;
  }
  return static_cast<std::uint64_t>(c);
}

std::vector<std::vector<std::uint32_t>> draw_bags(std::size_t pool_size, const BaggingPlan& plan) {
  plan.validate();
  if (pool_size == 0) throw InvalidInput("reference pool is empty");
  std::vector<std::vector<std::uint32_t>> bags;
  if (plan.mode == BaggingMode::bootstrap) {
    bags.reserve(plan.bags);
    for (std::size_t b = 0; b < plan.bags; ++b) {
      rng::Engine g(rng::mix(plan.seed, b));
      std::vector<std::uint32_t> bag(plan.bag_size);
      for (auto& v : bag) v = static_cast<std::uint32_t>(rng::index(g, pool_size));
      bags.push_back(std::move(bag));
    }
    return bags;
  }
  const std::uint64_t count = combinations(pool_size, plan.bag_size, plan.exhaustive_cap);
  if (count == 0)
    throw InvalidInput("exhaustive bagging needs bag size <= pool size (" + std::to_string(plan.bag_size) + " > " +
                       std::to_string(pool_size) + ")");
  if (count > plan.exhaustive_cap)
    throw InvalidInput("exhaustive bagging would exceed " + std::to_string(plan.exhaustive_cap) +
                       " combinations; use bootstrap mode");
  bags.reserve(count);
  std::vector<std::uint32_t> pick(plan.bag_size);
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = static_cast<std::uint32_t>(i);
  const auto n = static_cast<std::uint32_t>(pool_size);
  const auto k = pick.size();
  while (true) {
    bags.push_back(pick);
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return bags;
}

std::vector<std::vector<BootSequence>> bag_reference_sets(std::span<const BootSequence> pool,
                                                          const BaggingPlan& plan) {
  std::vector<std::vector<BootSequence>> out;
  for (const auto& bag : draw_bags(pool.size(), plan)) {
    auto& set = out.emplace_back();
    set.reserve(bag.size());
    for (auto i : bag) set.push_back(pool[i]);
  }
  return out;
}

ScoreVector score_vector(const BootSequence& test, std::span<const BootSequence> subset,
                         const ScoringScheme& scheme) {
  if (subset.empty()) throw InvalidInput("reference subset is empty");
  ScoreVector v;
  v.values.reserve(subset.size());
  for (const auto& ref : subset) v.values.push_back(score_only(test, ref, scheme));
  return v;
}

ScoreVector aggregate(std::span<const ScoreVector> vectors) {
  if (vectors.empty()) throw InvalidInput("nothing to aggregate");
  const std::size_t n = vectors.front().size();
  std::vector<double> sum(n, 0.0);
  std::vector<double> sorted;
  for (const auto& v : vectors) {
    if (v.size() != n) throw InvalidInput("score vectors differ in length");
    sorted = v.values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < n; ++j) sum[j] += sorted[j];
  }
  ScoreVector out;
  out.values.resize(n);
  const auto m = static_cast<double>(vectors.size());
  for (std::size_t j = 0; j < n; ++j) out.values[j] = sum[j] / m;
  out.sorted = true;
  return out;
}

ScoreVector reference_baseline(std::span<const std::vector<BootSequence>> subsets, const ScoringScheme& scheme) {
  std::vector<ScoreVector> per_bag;
  per_bag.reserve(subsets.size());
  for (const auto& bag : subsets) {
    if (bag.size() < 2) throw InvalidInput("baseline needs bags of at least 2 members");
    ScoreVector v;
    for (std::size_t a = 0; a < bag.size(); ++a) {
      double total = 0.0;
      for (std::size_t b = 0; b < bag.size(); ++b)
        if (b != a) total += score_only(bag[a], bag[b], scheme);
      v.values.push_back(total / static_cast<double>(bag.size() - 1));
    }
    per_bag.push_back(std::move(v));
  }
  return aggregate(per_bag);
}

ReferenceModel::ReferenceModel(std::vector<BootSequence> pool, ScoringScheme scheme, BaggingPlan plan,
                               BaselineMode baseline_mode)
    : pool_(std::move(pool)), scheme_(std::move(scheme)), plan_(plan), baseline_mode_(baseline_mode) {
  scheme_.validate();
  if (pool_.empty()) throw InvalidInput("reference pool is empty");
  for (const auto& s : pool_) require_same_alphabet(pool_.front(), s);
  if (plan_.bag_size < 2) throw InvalidInput("baseline needs bags of at least 2 members");
  bags_ = draw_bags(pool_.size(), plan_);

  const std::size_t p = pool_.size();
  std::vector<char> in_bag(p, 0);
  for (const auto& bag : bags_)
    for (auto i : bag) in_bag[i] = 1;
  for (std::uint32_t i = 0; i < p; ++i)
    if (in_bag[i]) used_.push_back(i);

  // Mark the ordered pairs the baseline reads, then score them in one batch.
  std::vector<char> need(p * p, 0);
  auto distinct = [](const std::vector<std::uint32_t>& bag) {
    return std::any_of(bag.begin(), bag.end(), [&](auto v) { return v != bag.front(); });
  };
  if (baseline_mode_ == BaselineMode::per_bag) {
    for (const auto& bag : bags_) {
      if (!distinct(bag)) {
        need[bag.front() * p + bag.front()] = 1;
        continue;
      }
      for (auto a : bag)
        for (auto b : bag)
          if (a != b) need[a * p + b] = 1;
    }
  } else {
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b)
        if (a != b || p == 1) need[a * p + b] = 1;
  }
  std::vector<kernels::PairIndex> pairs;
  for (std::uint32_t a = 0; a < p; ++a)
    for (std::uint32_t b = 0; b < p; ++b)
      if (need[a * p + b]) pairs.push_back({a, b});
  const auto spans = kernels::spans_of(pool_);
  const auto scores = kernels::score_pairs(spans, spans, pairs, scheme_);
  std::vector<Score> pair_score(p * p, 0);
  for (std::size_t k = 0; k < pairs.size(); ++k) pair_score[pairs[k].test * p + pairs[k].reference] = scores[k];

  std::vector<ScoreVector> per_bag;
  per_bag.reserve(bags_.size());
  if (baseline_mode_ == BaselineMode::per_bag) {
    for (const auto& bag : bags_) {
      ScoreVector v;
      v.values.reserve(bag.size());
      const bool mixed = distinct(bag);
      for (auto a : bag) {
        // A bag holding one entry only has itself as peer, as in the positional rule.
        if (!mixed) {
          v.values.push_back(pair_score[a * p + a]);
          continue;
        }
        double total = 0.0;
        std::size_t count = 0;
        for (auto b : bag) {
          if (a == b) continue;
          total += pair_score[a * p + b];
          ++count;
        }
        v.values.push_back(total / static_cast<double>(count));
      }
      per_bag.push_back(std::move(v));
    }
  } else {
    std::vector<double> member_mean(p);
    for (std::size_t a = 0; a < p; ++a) {
      if (p == 1) {
        member_mean[a] = pair_score[0];
        continue;
      }
      double total = 0.0;
      for (std::size_t b = 0; b < p; ++b)
        if (a != b) total += pair_score[a * p + b];
      member_mean[a] = total / static_cast<double>(p - 1);
    }
    for (const auto& bag : bags_) {
      ScoreVector v;
      for (auto a : bag) v.values.push_back(member_mean[a]);
      per_bag.push_back(std::move(v));
    }
  }
  baseline_ = aggregate(per_bag);
}

ScoreVector ReferenceModel::vector_from_scores(std::span<const Score> pool_scores) const {
  std::vector<ScoreVector> per_bag;
  per_bag.reserve(bags_.size());
  for (const auto& bag : bags_) {
    ScoreVector v;
    v.values.reserve(bag.size());
    for (auto i : bag) v.values.push_back(pool_scores[i]);
    per_bag.push_back(std::move(v));
  }
  return aggregate(per_bag);
}

ScoreVector ReferenceModel::test_vector(const BootSequence& test) const {
  return test_vectors(std::span<const BootSequence>(&test, 1)).front();
}

std::vector<ScoreVector> ReferenceModel::test_vectors(std::span<const BootSequence> tests) const {
  for (const auto& t : tests) require_same_alphabet(t, pool_.front());
  std::vector<kernels::PairIndex> pairs;
  pairs.reserve(tests.size() * used_.size());
  for (std::uint32_t t = 0; t < tests.size(); ++t)
    for (auto r : used_) pairs.push_back({t, r});
  const auto test_spans = kernels::spans_of(tests);
  const auto pool_spans = kernels::spans_of(pool_);
  const auto scores = kernels::score_pairs(test_spans, pool_spans, pairs, scheme_);

  std::vector<ScoreVector> out;
  out.reserve(tests.size());
  std::vector<Score> row(pool_.size(), 0);
  for (std::size_t t = 0; t < tests.size(); ++t) {
    for (std::size_t k = 0; k < used_.size(); ++k) row[used_[k]] = scores[t * used_.size() + k];
    out.push_back(vector_from_scores(row));
  }
  return out;
}

}  // namespace bootseq
