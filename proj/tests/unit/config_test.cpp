#include <gtest/gtest.h>

#include "campaign/errors.hpp"
#include "campaign_cli/config.hpp"
#include "campaign_cli/toml_lite.hpp"

using namespace campaign;
using namespace campaign::cli;

TEST(Toml, ScalarsAndTables) {
  const auto d = toml::Document::parse(
      "# comment\n"
      "seed = 3\n"
      "name = \"a # b\"  # trailing\n"
      "[t]\n"
      "x = 1.5\n"
      "flag = true\n"
      "n = -4\n");
  EXPECT_EQ(d.get_int("", "seed"), 3);
  EXPECT_EQ(d.get_string("", "name"), "a # b");
  EXPECT_DOUBLE_EQ(*d.get_double("t", "x"), 1.5);
  EXPECT_DOUBLE_EQ(*d.get_double("t", "n"), -4.0);
  EXPECT_EQ(d.get_bool("t", "flag"), true);
  EXPECT_FALSE(d.get_int("t", "missing"));
}

TEST(Toml, Errors) {
  auto line_of = [](std::string_view text) -> std::size_t {
    try {
      toml::Document::parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of("a = 1\na = 2\n"), 2u);
  EXPECT_EQ(line_of("[t]\n[t]\n"), 2u);
  EXPECT_EQ(line_of("a = [1, 2]\n"), 1u);
  EXPECT_EQ(line_of("a = \"open\n"), 1u);
  EXPECT_EQ(line_of("\n\njust words\n"), 3u);
  const auto d = toml::Document::parse("a = \"s\"\n");
  EXPECT_THROW(d.get_int("", "a"), InputError);
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(
      "seed = 9\n"
      "[cluster]\nnodes = 2\ncores = 8\ngpus = 1\n"
      "[funnel]\npool_size = 50\ndock_keep = 5\nesmacs_keep = 2\nties_pairs = 1\n"
      "[stats]\nlambda_windows = 3\nties_replicas = 2\n");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.funnel.seed, 9u);
  EXPECT_EQ(c.oracles.seed, 9u);
  EXPECT_EQ(c.cluster.node_specs().size(), 2u);
  EXPECT_EQ(c.cluster.node_specs()[1].id, "n1");
  EXPECT_EQ(c.funnel.pool_size, 50u);
  EXPECT_EQ(c.cost.ties_simulations, 6u);
  EXPECT_EQ(c.oracles.lambda_windows, 3u);
  EXPECT_EQ(c.classifier.horizon, 1500u);
  EXPECT_EQ(c.stats.esmacs_replicas, 25u);
}

TEST(Config, SeedOverride) {
  auto c = parse_config("seed = 1\n");
  set_seed(c, 77);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.funnel.seed, 77u);
  EXPECT_EQ(c.oracles.seed, 77u);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("[cluster]\nnodes = 1\n"), InputError);
  EXPECT_THROW(parse_config("seed = 1\nbogus = 2\n"), InputError);
  EXPECT_THROW(parse_config("seed = 1\n[nope]\nx = 1\n"), InputError);
  EXPECT_THROW(parse_config("seed = 1\n[cluster]\ncores = 0\n"), InputError);
  EXPECT_THROW(parse_config("seed = 1\n[funnel]\ndock_keep = 20000\n"), InputError);
  EXPECT_THROW(parse_config("seed = 1\n[cluster]\nnodes = \"four\"\n"), InputError);
  EXPECT_THROW(parse_config("seed = -1\n"), InputError);
}

TEST(Config, FilePathsResolveAgainstConfigDirectory) {
  const auto c = parse_config("seed = 1\n[funnel]\npool_file = \"pool.csv\"\n", "/data/run");
  ASSERT_TRUE(c.pool.pool_file);
  EXPECT_EQ(*c.pool.pool_file, std::filesystem::path("/data/run/pool.csv"));
}

TEST(Config, ShippedConfigLoads) {
  const auto c = load_config(std::string(CAMPAIGN_SOURCE_DIR) + "/docs/campaign.toml");
  EXPECT_EQ(c.cluster.nodes, 4);
  EXPECT_EQ(c.cluster.cores, 42);
  EXPECT_EQ(c.cluster.gpus, 6);
  EXPECT_EQ(c.funnel.pool_size, 10000u);
}
