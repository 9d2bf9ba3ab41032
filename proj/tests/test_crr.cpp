#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace findret;
using findret::testing::prefilter_fixture_expected;
using findret::testing::prefilter_fixture_findings;
using findret::testing::prefilter_fixture_query;

namespace {

CrrRefSet refs(std::initializer_list<const char*> xs) {
  std::vector<CrrRef> v;
  for (const char* x : xs) v.push_back(CrrRef::parse(x));
  return make_ref_set(std::move(v));
}

CrrTree tree_of(std::initializer_list<CrrRefSet> sets) {
  CrrTree t;
  for (const auto& s : sets) t.add_all(s);
  return t;
}

}  // namespace

TEST(CrrRef, ParsesPaths) {
  const auto r = parse_crr_ref("182(1)(f)");
  EXPECT_EQ(r.path(), (std::vector<std::string>{"182", "1", "f"}));
  EXPECT_EQ(r.canonical(), "182(1)(f)");
  EXPECT_EQ(r.token(), "CRR_182_1_f");
  EXPECT_EQ(parse_crr_ref("92").path(), std::vector<std::string>{"92"});
  EXPECT_EQ(parse_crr_ref(" 182 (1) (F) ").canonical(), "182(1)(f)");
}

TEST(CrrRef, RejectsMalformed) {
  EXPECT_THROW(parse_crr_ref("abc"), ParseError);
  EXPECT_THROW(parse_crr_ref(""), ParseError);
  EXPECT_THROW(parse_crr_ref("182()"), ParseError);
  EXPECT_THROW(parse_crr_ref("182(1"), ParseError);
  EXPECT_THROW(parse_crr_ref("182(1)x"), ParseError);
}

TEST(CrrRef, CanonicalRoundTrip) {
  for (const char* s : {"92", "181(a)", "182(1)(f)", "429(4)(b)(ii)"}) {
    const auto r = parse_crr_ref(s);
    EXPECT_EQ(parse_crr_ref(r.canonical()), r);
    EXPECT_EQ(CrrRef::from_token(r.token()), r);
  }
}

TEST(CrrRef, AncestorsExcludeRootAndSelf) {
  const auto r = parse_crr_ref("182(1)(f)");
  EXPECT_EQ(r.ancestors(), (std::vector<CrrRef>{parse_crr_ref("182"), parse_crr_ref("182(1)")}));
  EXPECT_TRUE(parse_crr_ref("92").ancestors().empty());
  EXPECT_EQ(*r.parent(), parse_crr_ref("182(1)"));
  EXPECT_FALSE(parse_crr_ref("92").parent().has_value());
}

TEST(CrrRef, NumericAwareOrdering) {
  EXPECT_LT(parse_crr_ref("9"), parse_crr_ref("10"));
  EXPECT_LT(parse_crr_ref("92"), parse_crr_ref("92(1)"));
  EXPECT_LT(parse_crr_ref("92(2)"), parse_crr_ref("92(10)"));
}

TEST(Jaccard, SpecExamples) {
  EXPECT_DOUBLE_EQ(jaccard(refs({"181(a)", "92"}), refs({"181(a)", "92"})), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(refs({"181(a)"}), refs({"92"})), 0.0);
  EXPECT_DOUBLE_EQ(jaccard(refs({"181(a)", "181(b)", "92"}), refs({"181(a)", "92", "95"})), 0.5);
  EXPECT_DOUBLE_EQ(jaccard(CrrRefSet{}, CrrRefSet{}), 0.0);
}

TEST(Jaccard, UnsortedInputIsCanonicalised) {
  const std::vector<CrrRef> a = {parse_crr_ref("95"), parse_crr_ref("92"), parse_crr_ref("92")};
  const std::vector<CrrRef> b = {parse_crr_ref("92")};
  EXPECT_DOUBLE_EQ(jaccard(a, b), 0.5);
}

TEST(Hierarchical, NodeLevelExamples) {
  const auto t = tree_of({refs({"181(a)", "181(b)", "92"})});
  EXPECT_DOUBLE_EQ(hierarchical_sim(parse_crr_ref("181(a)"), parse_crr_ref("181(b)"), t), 1.0);
  EXPECT_DOUBLE_EQ(hierarchical_sim(parse_crr_ref("181(a)"), parse_crr_ref("92"), t), 0.0);
  EXPECT_DOUBLE_EQ(hierarchical_sim(parse_crr_ref("92"), parse_crr_ref("92"), t), 1.0);
  EXPECT_DOUBLE_EQ(hierarchical_sim(parse_crr_ref("181(a)"), parse_crr_ref("181(a)"), t), 1.0);
}

TEST(Hierarchical, SetLevelLift) {
  const auto a = refs({"181(a)", "92(1)"});
  const auto b = refs({"181(b)", "92(2)"});
  const auto t = tree_of({a, b});
  // same parent articles, different leaves
  EXPECT_DOUBLE_EQ(hierarchical_sim(a, b, t), 1.0);
  const auto c = refs({"181(b)", "95(1)"});
  const auto t2 = tree_of({a, c});
  EXPECT_DOUBLE_EQ(hierarchical_sim(a, c, t2), 1.0 / 3.0);
}

TEST(Hierarchical, EmptyAncestorsScoreZeroUnlessIdentical) {
  const auto a = refs({"92"});
  const auto b = refs({"95"});
  const auto t = tree_of({a, b});
  EXPECT_DOUBLE_EQ(hierarchical_sim(a, b, t), 0.0);
  EXPECT_DOUBLE_EQ(hierarchical_sim(a, a, t), 1.0);
  EXPECT_DOUBLE_EQ(hierarchical_sim(CrrRefSet{}, CrrRefSet{}, t), 0.0);
}

TEST(Hierarchical, MissingNodeIsAnError) {
  const auto t = tree_of({refs({"92"})});
  EXPECT_THROW(hierarchical_sim(refs({"92"}), refs({"93"}), t), ValidationError);
  EXPECT_THROW(hierarchical_sim(parse_crr_ref("93"), parse_crr_ref("92"), t), ValidationError);
}

TEST(CrrTree, AddsAncestorsAndRoundTripsArticleList) {
  CrrTree t;
  t.add(parse_crr_ref("182(1)(f)"));
  EXPECT_TRUE(t.contains(parse_crr_ref("182")));
  EXPECT_TRUE(t.contains(parse_crr_ref("182(1)")));
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(*t.parent(parse_crr_ref("182(1)")), parse_crr_ref("182"));
  findret::testing::TempDir dir("tree");
  t.write_article_list(dir.file("articles.txt"));
  const auto back = CrrTree::load_article_list(dir.file("articles.txt"));
  EXPECT_EQ(back.size(), t.size());
  EXPECT_TRUE(back.contains(parse_crr_ref("182(1)(f)")));
}

TEST(CrrTree, ArticleListReportsBadLines) {
  findret::testing::TempDir dir("tree_bad");
  findret::testing::write_file(dir.file("a.txt"), "92\n\nfoo\n");
  EXPECT_THROW(CrrTree::load_article_list(dir.file("a.txt")), ParseError);
  EXPECT_THROW(CrrTree::load_article_list(dir.file("missing.txt")), IoError);
}

class CrrProperties : public ::testing::Test {
 protected:
  std::mt19937_64 rng{99};

  CrrRefSet random_set() {
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_int_distribution<int> art(90, 95);
    std::uniform_int_distribution<int> depth(1, 3);
    std::uniform_int_distribution<int> part(1, 3);
    std::vector<CrrRef> v;
    for (int i = count(rng); i > 0; --i) {
      std::vector<std::string> p{std::to_string(art(rng))};
      const int d = depth(rng);
      if (d >= 2) p.push_back(std::to_string(part(rng)));
      if (d >= 3) p.push_back(std::string(1, static_cast<char>('a' + part(rng))));
      v.emplace_back(p);
    }
    return make_ref_set(std::move(v));
  }
};

TEST_F(CrrProperties, SymmetryBoundsIdentity) {
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = random_set();
    const auto b = random_set();
    const auto t = tree_of({a, b});
    const double jab = jaccard(a, b);
    const double hab = hierarchical_sim(a, b, t);
    EXPECT_DOUBLE_EQ(jab, jaccard(b, a));
    EXPECT_DOUBLE_EQ(hab, hierarchical_sim(b, a, t));
    EXPECT_GE(jab, 0.0);
    EXPECT_LE(jab, 1.0);
    EXPECT_GE(hab, 0.0);
    EXPECT_LE(hab, 1.0);
    if (!a.empty()) {
      EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
      EXPECT_DOUBLE_EQ(hierarchical_sim(a, a, t), 1.0);
    }
  }
}

TEST(Prefilter, HandComputedMembership) {
  const Corpus corpus(prefilter_fixture_findings());
  const auto tree = corpus.crr_tree();
  Finding q = findret::testing::make_finding("Q", "query");
  q.crr_refs = prefilter_fixture_query();
  const auto r = prefilter(q, corpus, tree, PrefilterConfig{});
  EXPECT_FALSE(r.fell_back);
  EXPECT_EQ(r.positions, prefilter_fixture_expected());
}

TEST(Prefilter, EmptyQueryFallsBack) {
  const Corpus corpus(prefilter_fixture_findings());
  const auto q = findret::testing::make_finding("Q", "query");
  const auto r = prefilter(q, corpus, corpus.crr_tree(), PrefilterConfig{});
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.positions.size(), corpus.size());
  PrefilterConfig no_fallback;
  no_fallback.fallback_on_empty = false;
  EXPECT_TRUE(prefilter(q, corpus, corpus.crr_tree(), no_fallback).positions.empty());
}

TEST(Prefilter, ZeroThresholdsKeepEverything) {
  const Corpus corpus(prefilter_fixture_findings());
  Finding q = findret::testing::make_finding("Q", "query", {"999"});
  const auto r = prefilter(q, corpus, corpus.crr_tree(), PrefilterConfig{0.0, 0.0, false});
  EXPECT_EQ(r.positions.size(), corpus.size());
}

TEST(Prefilter, MonotoneShrinkage) {
  const Corpus corpus(prefilter_fixture_findings());
  const CrrMatcher matcher(corpus);
  const auto q = prefilter_fixture_query();
  const std::vector<double> grid = {0.0, 0.2, 1.0 / 3.0, 0.4, 0.5, 0.7, 1.0};
  for (double j1 : grid) {
    for (double h1 : grid) {
      const auto base = matcher.filter(q, PrefilterConfig{j1, h1, false}).positions;
      for (double j2 : grid) {
        for (double h2 : grid) {
          if (j2 < j1 || h2 < h1) continue;
          const auto tighter = matcher.filter(q, PrefilterConfig{j2, h2, false}).positions;
          EXPECT_TRUE(std::includes(base.begin(), base.end(), tighter.begin(), tighter.end()));
        }
      }
    }
  }
}

TEST(Prefilter, SharedRefsPassAnyThreshold) {
  const Corpus corpus(prefilter_fixture_findings());
  const CrrMatcher matcher(corpus);
  const auto r = matcher.filter(corpus[0].crr_refs, PrefilterConfig{1.0, 1.0, false});
  EXPECT_EQ(r.positions, std::vector<std::size_t>{0});
}

TEST(Prefilter, RejectsInvalidThresholds) {
  EXPECT_THROW(PrefilterConfig({1.5, 0.0, true}).validate(), ValidationError);
  EXPECT_THROW(PrefilterConfig({0.0, -0.1, true}).validate(), ValidationError);
}
