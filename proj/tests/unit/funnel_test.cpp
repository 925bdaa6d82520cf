#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "campaign/errors.hpp"
#include "campaign/funnel.hpp"
#include "support/oracles.hpp"

using namespace campaign;
using namespace campaign::funnel;

namespace {

SyntheticOracleOptions fast_oracles(std::uint64_t seed) {
  SyntheticOracleOptions o;
  o.seed = seed;
  o.esmacs_replicas = 6;
  o.esmacs_frames = 5;
  o.lambda_windows = 5;
  o.ties_replicas = 3;
  o.ties_samples = 4;
  return o;
}

FunnelConfig small_config(std::uint64_t seed) {
  FunnelConfig c;
  c.pool_size = 1000;
  c.dock_keep = 100;
  c.esmacs_keep = 10;
  c.ties_pairs = 3;
  c.seed = seed;
  c.bootstrap_resamples = 200;
  return c;
}

std::vector<CompoundRecord> pool(std::size_t n, std::uint64_t seed) {
  return make_synthetic_pool(n, AffinityLandscape::random(4, seed), seed);
}

std::string csv_of(const IterationReport& r) {
  std::ostringstream out;
  write_iteration_csv(out, r);
  write_iteration_ties_csv(out, r);
  write_scatter_csv(out, r);
  return out.str();
}

class FailingDock final : public FunnelOracles {
 public:
  explicit FailingDock(const FunnelOracles& inner) : inner_(inner) {}
  std::optional<double> dock(const CompoundRecord& c) const override {
    if (c.id.back() == '7') return std::nullopt;
    return inner_.dock(c);
  }
  std::optional<std::vector<fe::ReplicaSeries>> esmacs(const CompoundRecord& c) const override {
    return inner_.esmacs(c);
  }
  std::optional<std::vector<fe::LambdaWindow>> ties(const CompoundRecord& a,
                                                    const CompoundRecord& b) const override {
    return inner_.ties(a, b);
  }

 private:
  const FunnelOracles& inner_;
};

}  // namespace

TEST(Promote, Examples) {
  const std::vector<ScoredId> s{{"a", -3}, {"b", -5}, {"c", -1}};
  EXPECT_EQ(promote(s, 2), (std::vector<std::string>{"b", "a"}));
  const std::vector<ScoredId> tie{{"b", -3}, {"a", -3}};
  EXPECT_EQ(promote(tie, 1), (std::vector<std::string>{"a"}));
  EXPECT_EQ(promote(s, 3).size(), 3u);
  EXPECT_THROW(promote(s, 4), InputError);
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3}, y{1, 3, 2}, twice{2, 4, 6}, neg{-1, -2, -3}, flat{5, 5, 5};
  EXPECT_NEAR(pearson(x, twice), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, neg), -1.0, 1e-15);
  EXPECT_NEAR(pearson(x, y), 0.5, 1e-15);
  EXPECT_THROW(pearson(x, flat), SemanticError);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), InputError);
}

TEST(Pearson, MatchesTwoPassOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(-8.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(2 + rng() % 100), y;
    for (auto& v : x) {
      v = n(rng);
      y.push_back(0.3 * v + n(rng));
    }
    EXPECT_NEAR(pearson(x, y), oracle::pearson(x, y), 1e-12);
  }
}

TEST(Funnel, ConfigValidation) {
  auto c = small_config(1);
  c.dock_keep = 2000;
  EXPECT_THROW(c.validate(), InputError);
  c = small_config(1);
  c.ties_pairs = 10;
  EXPECT_THROW(c.validate(), InputError);
  c = small_config(1);
  c.iterations = 0;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_NO_THROW(small_config(1).validate());
}

TEST(Funnel, ColdStartCountsAndPairs) {
  const SyntheticOracles oracles(fast_oracles(5));
  FunnelCampaign fc(pool(1000, 5), small_config(5), oracles);
  const auto r = fc.run_iteration();
  EXPECT_FALSE(r.surrogate_used);
  EXPECT_EQ(r.candidates, 1000u);
  EXPECT_EQ(r.dock_promoted.size(), 100u);
  EXPECT_EQ(r.esmacs.size(), 100u);
  EXPECT_EQ(r.esmacs_promoted.size(), 10u);
  ASSERT_EQ(r.ties.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.ties[i].from, r.esmacs_promoted[i]);
    EXPECT_EQ(r.ties[i].to, r.esmacs_promoted[i + 1]);
  }
  EXPECT_EQ(r.workload.docking_tasks, 1000u);
  EXPECT_EQ(r.workload.esmacs_simulations, 100u * 6u);
  EXPECT_EQ(r.workload.ties_simulations, 3u * 5u * 3u);
  EXPECT_TRUE(r.mean_true_affinity_promoted);
  EXPECT_TRUE(r.dock_esmacs_correlation);
  EXPECT_TRUE(fc.surrogate().trained());
  EXPECT_EQ(r.training_set_size, 1000u);
}

TEST(Funnel, SecondIterationUsesTheSurrogate) {
  const SyntheticOracles oracles(fast_oracles(6));
  FunnelCampaign fc(pool(1000, 6), small_config(6), oracles);
  fc.run_iteration();
  const auto r = fc.run_iteration();
  EXPECT_TRUE(r.surrogate_used);
  EXPECT_EQ(r.candidates, 500u);
  EXPECT_EQ(r.esmacs.size(), 100u);
  EXPECT_EQ(r.iteration, 2u);
}

TEST(Funnel, PromotionIsMonotoneInScore) {
  const SyntheticOracles oracles(fast_oracles(7));
  FunnelCampaign fc(pool(1000, 7), small_config(7), oracles);
  const auto r = fc.run_iteration();
  std::set<std::string> promoted(r.dock_promoted.begin(), r.dock_promoted.end());
  double worst_promoted = -1e300, best_rejected = 1e300;
  for (const auto& s : r.dock_scores) {
    if (promoted.contains(s.id))
      worst_promoted = std::max(worst_promoted, s.score);
    else
      best_rejected = std::min(best_rejected, s.score);
  }
  EXPECT_LE(worst_promoted, best_rejected);
  for (std::size_t i = 1; i < r.esmacs_promoted.size(); ++i) {
    auto dg = [&](const std::string& id) {
      return std::find_if(r.esmacs.begin(), r.esmacs.end(),
                          [&](const auto& e) { return e.compound_id == id; })
          ->estimate.dg;
    };
    EXPECT_LE(dg(r.esmacs_promoted[i - 1]), dg(r.esmacs_promoted[i]));
  }
}

TEST(Funnel, DeterministicForAFixedSeed) {
  const SyntheticOracles oracles(fast_oracles(8));
  auto cfg = small_config(8);
  cfg.iterations = 2;
  FunnelCampaign a(pool(1000, 8), cfg, oracles), b(pool(1000, 8), cfg, oracles);
  const auto ra = a.run_all(), rb = b.run_all();
  ASSERT_EQ(ra.size(), 2u);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(csv_of(ra[i]), csv_of(rb[i]));
    EXPECT_EQ(ra[i].dock_promoted, rb[i].dock_promoted);
  }
}

TEST(Funnel, FailuresAreFlaggedNotFatal) {
  const SyntheticOracles inner(fast_oracles(9));
  const FailingDock oracles(inner);
  FunnelCampaign fc(pool(1000, 9), small_config(9), oracles);
  const auto r = fc.run_iteration();
  EXPECT_EQ(r.flagged.size(), 100u);
  for (const auto& f : r.flagged) EXPECT_EQ(f.stage, "dock");
  EXPECT_EQ(r.dock_scores.size(), 900u);
  EXPECT_EQ(r.esmacs.size(), 100u);
}

TEST(Funnel, ConstructorRejectsBadPools) {
  const SyntheticOracles oracles(fast_oracles(1));
  EXPECT_THROW(FunnelCampaign({}, small_config(1), oracles), InputError);
  auto dup = pool(200, 1);
  dup[1].id = dup[0].id;
  auto cfg = small_config(1);
  cfg.dock_keep = 10;
  EXPECT_THROW(FunnelCampaign(dup, cfg, oracles), InputError);
}

TEST(Workflow, Emission) {
  IterationReport r;
  EXPECT_TRUE(emit_workflow(r).empty());
  r.esmacs.push_back({"c0", {}, {}, {}});
  r.esmacs.push_back({"c1", {}, {}, {}});
  const auto w = emit_workflow(r);
  ASSERT_EQ(w.pipelines.size(), 2u);
  EXPECT_EQ(w.task_count(), 2u * 26u);
  EXPECT_EQ(w.pipelines[0].stages[0].tasks[0].gpus, 1);

  IterationReport t;
  t.ties.push_back({"c0", "c1", {}});
  const auto wt = emit_workflow(t);
  ASSERT_EQ(wt.pipelines.size(), 1u);
  ASSERT_EQ(wt.pipelines[0].stages.size(), 2u);
  EXPECT_EQ(wt.pipelines[0].stages[0].tasks.size(), 65u);
  EXPECT_EQ(wt.pipelines[0].stages[1].tasks.size(), 1u);
  EXPECT_EQ(wt.pipelines[0].stages[0].tasks[0].gpus, 0);
  EXPECT_TRUE(workload::validate_workflow(wt).ok());
}

TEST(PoolCsv, RoundTrip) {
  auto p = pool(20, 4);
  p[3].dock_score = -7.25;
  p[5].true_affinity.reset();
  std::stringstream s;
  write_pool_csv(s, p);
  const auto back = read_pool_csv(s);
  ASSERT_EQ(back.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(back[i].id, p[i].id);
    EXPECT_EQ(back[i].features, p[i].features);
    EXPECT_EQ(back[i].dock_score, p[i].dock_score);
    EXPECT_EQ(back[i].true_affinity, p[i].true_affinity);
  }
}

TEST(PoolCsv, SyntheticPoolShape) {
  const auto p = pool(1000, 2);
  EXPECT_EQ(p.front().id.size(), p.back().id.size());
  EXPECT_TRUE(std::is_sorted(p.begin(), p.end(), [](auto& a, auto& b) { return a.id < b.id; }));
  for (const auto& c : p) {
    ASSERT_EQ(c.features.size(), 4u);
    for (double x : c.features) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

// Property: every stage promotes a subset of the previous stage's survivors.
TEST(Funnel, StagesNarrowMonotonically) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const SyntheticOracles oracles(fast_oracles(seed));
    auto cfg = small_config(seed);
    cfg.iterations = 2;
    FunnelCampaign fc(pool(1000, seed), cfg, oracles);
    for (const auto& r : fc.run_all()) {
      std::set<std::string> docked, dock_kept(r.dock_promoted.begin(), r.dock_promoted.end()),
          esmacs_kept(r.esmacs_promoted.begin(), r.esmacs_promoted.end());
      for (const auto& s : r.dock_scores) docked.insert(s.id);
      for (const auto& id : r.dock_promoted) EXPECT_TRUE(docked.contains(id));
      for (const auto& e : r.esmacs) EXPECT_TRUE(dock_kept.contains(e.compound_id));
      for (const auto& id : r.esmacs_promoted) EXPECT_TRUE(dock_kept.contains(id));
      for (const auto& t : r.ties) {
        EXPECT_TRUE(esmacs_kept.contains(t.from));
        EXPECT_TRUE(esmacs_kept.contains(t.to));
      }
      EXPECT_LE(r.dock_promoted.size(), r.dock_scores.size());
      EXPECT_LE(r.esmacs_promoted.size(), r.dock_promoted.size());
      EXPECT_LE(r.dock_scores.size(), r.candidates);
    }
  }
}
