#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <sstream>

#include "campaign/errors.hpp"
#include "campaign/transitions.hpp"
#include "support/oracles.hpp"

using namespace campaign;
using namespace campaign::tc;

namespace {

constexpr ClassCode G = 0, H = 1, E = 3, C = 7;

ClassSequence seq(std::vector<ClassCode> frames) { return {0, std::move(frames)}; }

TransitionMatrix identity() {
  TransitionMatrix m{};
  for (std::size_t k = 0; k < kClassCount; ++k) m[k][k] = 1.0;
  return m;
}

TransitionMatrix alternation() {
  auto m = identity();
  m[H] = {};
  m[G] = {};
  m[H][G] = 1.0;
  m[G][H] = 1.0;
  return m;
}

ClassSequence alternating(std::size_t n, ClassCode first = H) {
  ClassSequence s;
  for (std::size_t i = 0; i < n; ++i) s.frames.push_back(i % 2 == 0 ? first : (first == H ? G : H));
  return s;
}

TransitionMatrix to_tm(const oracle::Matrix8& m) {
  TransitionMatrix t{};
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 8; ++l) t[k][l] = m[k][l];
  return t;
}

ClassDistribution random_distribution(std::mt19937_64& rng, bool sparse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ClassDistribution d{};
  double s = 0.0;
  for (auto& x : d) {
    x = (sparse && u(rng) < 0.5) ? 0.0 : u(rng);
    s += x;
  }
  if (s == 0.0) {
    d[rng() % 8] = 1.0;
    return d;
  }
  for (auto& x : d) x /= s;
  return d;
}

}  // namespace

TEST(ClassFile, Transposes) {
  const auto r = parse_class_text("HH\nHG\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].frames, (std::vector<ClassCode>{H, H}));
  EXPECT_EQ(r[1].frames, (std::vector<ClassCode>{H, G}));
  EXPECT_EQ(r[1].residue, 1u);
}

TEST(ClassFile, Errors) {
  try {
    parse_class_text("HH\nHX\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_class_text("HH\nHHH\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_class_text(""), InputError);
  EXPECT_THROW(parse_class_text("HH\n\nHH\n"), ParseError);
  EXPECT_NO_THROW(parse_class_text("HH\nGG\n\n\n"));
}

TEST(ClassFile, RoundTrip) {
  const auto r = parse_class_text("GHIEBTSC\nCCCCCCCC\nHHHHEEEE\n");
  std::ostringstream out;
  write_class_file(out, r);
  EXPECT_EQ(out.str(), "GHIEBTSC\nCCCCCCCC\nHHHHEEEE\n");
  EXPECT_EQ(class_letter(3), 'E');
  EXPECT_EQ(class_code('C'), 7);
  EXPECT_FALSE(class_code('X'));
  EXPECT_THROW(class_letter(8), InputError);
}

TEST(Events, FirstChangeOnly) {
  EXPECT_FALSE(detect_event(seq({H, H, H})));
  const auto e = detect_event(seq({H, H, G, G}));
  ASSERT_TRUE(e);
  EXPECT_EQ(e->t_a, 2u);
  EXPECT_EQ(e->initial_class, H);
  const auto f = detect_event(seq({G, H, G, H}));
  ASSERT_TRUE(f);
  EXPECT_EQ(f->t_a, 1u);
  EXPECT_EQ(f->initial_class, G);
}

TEST(Matrix, HandCountedWindow) {
  const auto s = seq({H, G, H, H, G, E, E});
  const auto e = *detect_event(s);
  // Frames G,H,H,G: three transitions.
  const auto m = build_matrix(s, e, 4);
  EXPECT_DOUBLE_EQ(m[G][H], 1.0);
  EXPECT_DOUBLE_EQ(m[H][H], 0.5);
  EXPECT_DOUBLE_EQ(m[H][G], 0.5);
  EXPECT_DOUBLE_EQ(m[E][E], 1.0);
  EXPECT_TRUE(is_row_stochastic(m));
}

TEST(Matrix, ConstantAndAlternatingWindows) {
  const auto c = seq({G, H, H, H});
  const auto m = build_matrix(c, *detect_event(c), 100);
  EXPECT_EQ(m, identity());
  const auto a = alternating(50);
  EXPECT_EQ(build_matrix(a, *detect_event(a), 100), alternation());
}

TEST(Matrix, TooFewFrames) {
  const auto s = seq({H, G});
  EXPECT_THROW(build_matrix(s, *detect_event(s), 100), EstimationError);
  const auto t = seq({H, G, G});
  EXPECT_THROW(build_matrix(t, *detect_event(t), 1), EstimationError);
}

TEST(Matrix, MatchesOracleCounts) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = oracle::mixing_matrix(seed);
    const auto frames = oracle::markov_chain(m, H, 400, seed);
    const ClassSequence s{0, {frames.begin(), frames.end()}};
    const auto e = detect_event(s);
    if (!e) continue;
    const auto built = build_matrix(s, *e, 150);
    const auto expect = oracle::count_transitions(frames, e->t_a, std::min<std::size_t>(e->t_a + 150, 400));
    for (std::size_t k = 0; k < 8; ++k)
      for (std::size_t l = 0; l < 8; ++l) EXPECT_NEAR(built[k][l], expect[k][l], 1e-12);
    EXPECT_TRUE(is_row_stochastic(built));
  }
}

TEST(Predict, Examples) {
  const auto p = predict_occupancy(identity(), E, 37);
  EXPECT_DOUBLE_EQ(p[E], 1.0);
  const auto a = predict_occupancy(alternation(), H, 2);
  EXPECT_DOUBLE_EQ(a[H], 0.5);
  EXPECT_DOUBLE_EQ(a[G], 0.5);
  TransitionMatrix u{};
  for (auto& row : u) row.fill(1.0 / 8.0);
  for (std::size_t h : {1u, 5u, 1500u})
    for (double x : predict_occupancy(u, C, h)) EXPECT_NEAR(x, 1.0 / 8.0, 1e-12);
}

TEST(Predict, Errors) {
  auto bad = identity();
  bad[0][1] = 0.5;
  EXPECT_THROW(predict_occupancy(bad, 0, 3), InputError);
  EXPECT_THROW(predict_occupancy(identity(), 0, 0), InputError);
  EXPECT_THROW(predict_occupancy(identity(), 8, 3), InputError);
}

TEST(Predict, MatchesOracleAndSumsToOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = oracle::mixing_matrix(seed);
    const auto start = static_cast<ClassCode>(seed % 8);
    const std::size_t h = 1 + seed * 37;
    const auto got = predict_occupancy(to_tm(m), start, h);
    const auto want = oracle::occupancy_average(m, start, h);
    double s = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(got[k], want[k], 1e-12);
      EXPECT_GE(got[k], 0.0);
      s += got[k];
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(Observed, Examples) {
  const auto s = seq({H, G, G, G});
  const auto o = observed_occupancy(s, *detect_event(s), 3);
  // Frames after t_a = 1 that exist: 2 and 3.
  EXPECT_DOUBLE_EQ(o[G], 1.0);
  const auto a = alternating(101);
  const auto oa = observed_occupancy(a, *detect_event(a), 40);
  EXPECT_DOUBLE_EQ(oa[H], 0.5);
  EXPECT_DOUBLE_EQ(oa[G], 0.5);
  const auto t = seq({H, G, E, E, E});
  const auto ot = observed_occupancy(t, *detect_event(t), 1000);
  EXPECT_DOUBLE_EQ(ot[E], 1.0);
  const auto end = seq({H, H, G});
  EXPECT_THROW(observed_occupancy(end, *detect_event(end), 10), EstimationError);
}

TEST(Jsd, Examples) {
  const std::vector<double> p{0.3, 0.7}, one{1.0, 0.0}, two{0.0, 1.0}, half{0.5, 0.5};
  EXPECT_DOUBLE_EQ(js_divergence(p, p), 0.0);
  EXPECT_DOUBLE_EQ(js_divergence(one, two), 1.0);
  EXPECT_NEAR(js_divergence(half, one), 0.31128, 1e-4);
}

TEST(Jsd, PropertiesAgainstOracle) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_distribution(rng, i % 2 == 0);
    const auto b = random_distribution(rng, i % 3 == 0);
    const double d = js_divergence(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
    EXPECT_DOUBLE_EQ(d, js_divergence(b, a));
    EXPECT_NEAR(d, oracle::jsd({a.begin(), a.end()}, {b.begin(), b.end()}), 1e-12);
    EXPECT_EQ(js_divergence(a, a), 0.0);
  }
}

TEST(Evaluate, SingleExactEvent) {
  EventOutcome o;
  o.event = {0, 4, H};
  o.predicted[E] = 1.0;
  o.observed[E] = 1.0;
  const auto t = evaluate_transitions(std::span<const EventOutcome>(&o, 1));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].label, "13");
  EXPECT_EQ(t[0].events, 1u);
  EXPECT_DOUBLE_EQ(t[0].js_divergence, 0.0);
}

TEST(Evaluate, SortedAscending) {
  std::vector<EventOutcome> o(3);
  o[0].event = {0, 1, G};
  o[0].predicted[H] = 1.0;
  o[0].observed[E] = 1.0;  // label 03, divergence 1
  o[1].event = {1, 1, H};
  o[1].predicted[G] = 1.0;
  o[1].observed[G] = 1.0;  // label 10, divergence 0
  o[2].event = {2, 1, G};
  o[2].predicted[E] = 1.0;
  o[2].observed[E] = 1.0;  // joins label 03
  const auto t = evaluate_transitions(o);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].label, "10");
  EXPECT_EQ(t[1].label, "03");
  EXPECT_EQ(t[1].events, 2u);
  EXPECT_NEAR(t[1].js_divergence, oracle::jsd({0, 0.5, 0, 0.5, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0, 0, 0}),
              1e-12);
}

TEST(Evaluate, AlternatingChainAtFullHorizon) {
  const std::vector<ClassSequence> r{alternating(2000)};
  const auto run = classify(r, MarkovPredictor(100), {100, 1500});
  ASSERT_EQ(run.table.size(), 1u);
  EXPECT_LE(run.table[0].js_divergence, 1e-3);
}

TEST(Evaluate, ClassifySkipsAndIgnores) {
  const std::vector<ClassSequence> r{seq({H, H, H}), {1, {H, G}}, {2, {H, G, G, G}}};
  const auto run = classify(r, MarkovPredictor(100), {100, 1500});
  EXPECT_EQ(run.skipped, (std::vector<std::size_t>{1}));
  ASSERT_EQ(run.outcomes.size(), 1u);
  EXPECT_EQ(run.outcomes[0].event.residue, 2u);
}

TEST(Evaluate, CsvRoundTripAndValidation) {
  const std::vector<LabelDivergence> rows{{"10", 1, 0.0}, {"03", 2, 0.25}};
  std::stringstream s;
  write_evaluation_csv(s, rows);
  const auto back = read_evaluation_csv(s);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, "03");
  EXPECT_EQ(back[1].js_divergence, 0.25);
  std::istringstream bad("label,js_divergence\n3x,0.1\n");
  EXPECT_THROW(read_evaluation_csv(bad), InputError);
  std::istringstream range("label,js_divergence\n33,1.5\n");
  EXPECT_THROW(read_evaluation_csv(range), InputError);
}

TEST(Generator, DeterministicAndValid) {
  const auto m = to_tm(oracle::mixing_matrix(3));
  const auto a = generate_markov_sequence(m, H, 500, 9);
  const auto b = generate_markov_sequence(m, H, 500, 9);
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.frames.size(), 500u);
  EXPECT_EQ(a.frames[0], H);
  EXPECT_THROW(generate_markov_sequence(m, H, 0, 9), InputError);
  auto bad = m;
  bad[2][2] += 0.5;
  EXPECT_THROW(generate_markov_sequence(bad, H, 10, 9), InputError);
}
