#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "support.hpp"

using namespace findret;
using findret::testing::TempDir;
using findret::testing::write_file;

namespace {

std::string line(const std::string& id, const std::string& text, const std::string& refs = "[]") {
  return R"({"id":")" + id + R"(","text":")" + text + R"(","crr_refs":)" + refs + R"(,"measure_ids":["M1"]})" + "\n";
}

std::string error_of(const std::string& path) {
  try {
    load_corpus(path);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::size_t whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::size_t n = 0;
  std::string w;
  while (in >> w) ++n;
  return n;
}

}  // namespace

TEST(LoadCorpus, ReadsAndSortsById) {
  TempDir dir("corpus");
  write_file(dir.file("c.jsonl"), line("F003", "c", R"(["92"])") + line("F001", "a", R"x(["182(1)(f)","92"])x") +
                                      "\n" + line("F002", "b"));
  const auto c = load_corpus(dir.file("c.jsonl"));
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].id, "F001");
  EXPECT_EQ(c[2].id, "F003");
  EXPECT_EQ(c.require_position("F002"), 1u);
  EXPECT_EQ(c[0].crr_refs.size(), 2u);
  EXPECT_EQ(c[0].crr_refs[0].canonical(), "92");
}

TEST(LoadCorpus, DuplicateIdNamesIdAndLines) {
  TempDir dir("dup");
  write_file(dir.file("c.jsonl"),
             line("F000", "x") + line("F001", "a") + line("F002", "b") + line("F003", "c") + line("F001", "d"));
  const auto msg = error_of(dir.file("c.jsonl"));
  EXPECT_NE(msg.find("F001"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lines 2 and 5"), std::string::npos) << msg;
}

TEST(LoadCorpus, MalformedLineReportsLineNumber) {
  TempDir dir("bad");
  write_file(dir.file("c.jsonl"), line("F001", "a") + "{not json\n");
  EXPECT_THROW(load_corpus(dir.file("c.jsonl")), ParseError);
  EXPECT_NE(error_of(dir.file("c.jsonl")).find(":2"), std::string::npos);
}

TEST(LoadCorpus, ValidationErrors) {
  TempDir dir("val");
  write_file(dir.file("empty_text.jsonl"), line("F001", ""));
  EXPECT_THROW(load_corpus(dir.file("empty_text.jsonl")), ValidationError);
  write_file(dir.file("dup_ref.jsonl"), line("F001", "a", R"(["92","92"])"));
  EXPECT_THROW(load_corpus(dir.file("dup_ref.jsonl")), ParseError);
  write_file(dir.file("missing_key.jsonl"), R"({"id":"F001"})" "\n");
  EXPECT_THROW(load_corpus(dir.file("missing_key.jsonl")), ParseError);
  write_file(dir.file("nothing.jsonl"), "\n");
  EXPECT_THROW(load_corpus(dir.file("nothing.jsonl")), ValidationError);
  EXPECT_THROW(load_corpus(dir.file("absent.jsonl")), IoError);
}

TEST(LoadCorpus, MissingFileNamesPath) {
  const auto msg = error_of("/nonexistent/corpus.jsonl");
  EXPECT_NE(msg.find("/nonexistent/corpus.jsonl"), std::string::npos);
}

TEST(Corpus, RoundTrip) {
  const auto sc = generate_synthetic_corpus(60, 11, 6);
  TempDir dir("rt");
  write_corpus(sc.corpus, dir.file("c.jsonl"));
  const auto back = load_corpus(dir.file("c.jsonl"));
  EXPECT_EQ(back, sc.corpus);
  write_corpus(back, dir.file("c2.jsonl"));
  EXPECT_EQ(findret::testing::read_file(dir.file("c.jsonl")), findret::testing::read_file(dir.file("c2.jsonl")));
}

TEST(Corpus, RejectsEmptyAndDuplicates) {
  EXPECT_THROW(Corpus(std::vector<Finding>{}), ValidationError);
  std::vector<Finding> dup = {findret::testing::make_finding("A", "x"), findret::testing::make_finding("A", "y")};
  EXPECT_THROW(Corpus(std::move(dup)), ValidationError);
}

TEST(Measures, RoundTripAndLinkValidation) {
  const auto sc = generate_synthetic_corpus(40, 5, 4);
  TempDir dir("m");
  write_measures(sc.measures, dir.file("m.jsonl"));
  const auto back = load_measures(dir.file("m.jsonl"));
  EXPECT_EQ(back.size(), sc.measures.size());
  EXPECT_NO_THROW(validate_measure_links(sc.corpus, back));
  EXPECT_THROW(validate_measure_links(sc.corpus, std::span<const Measure>(back).subspan(1)), ValidationError);
}

TEST(Synthetic, DeterministicBalancedClusters) {
  const auto a = generate_synthetic_corpus(100, 7, 10);
  const auto b = generate_synthetic_corpus(100, 7, 10);
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.cluster_of, b.cluster_of);
  ASSERT_EQ(a.corpus.size(), 100u);
  std::map<std::size_t, int> sizes;
  for (auto c : a.cluster_of) ++sizes[c];
  EXPECT_EQ(sizes.size(), 10u);
  for (const auto& [_, s] : sizes) EXPECT_EQ(s, 10);
  EXPECT_NE(generate_synthetic_corpus(100, 8, 10).corpus, a.corpus);
}

TEST(Synthetic, LengthProfile) {
  const auto sc = generate_synthetic_corpus(1000, 1, 50);
  std::size_t short_count = 0;
  for (const auto& f : sc.corpus) short_count += whitespace_tokens(f.text) < 512 ? 1 : 0;
  const double frac = static_cast<double>(short_count) / 1000.0;
  EXPECT_GE(frac, 0.80);
  EXPECT_LE(frac, 0.90);
}

TEST(Synthetic, SingletonClusters) {
  const auto sc = generate_synthetic_corpus(10, 3, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(sc.cluster_mates(i).empty());
  EXPECT_THROW(generate_synthetic_corpus(5, 3, 10), ValidationError);
}

TEST(Synthetic, ClusterMatesShareReferences) {
  const auto sc = generate_synthetic_corpus(200, 4, 10);
  const auto tree = sc.corpus.crr_tree();
  for (std::size_t i = 0; i < sc.corpus.size(); i += 17) {
    for (auto j : sc.cluster_mates(i)) {
      EXPECT_GE(jaccard(sc.corpus[i].crr_refs, sc.corpus[j].crr_refs), 1.0 / 3.0);
      EXPECT_GE(hierarchical_sim(sc.corpus[i].crr_refs, sc.corpus[j].crr_refs, tree), 1.0 / 3.0);
    }
  }
}

TEST(Synthetic, MeasureLinksResolve) {
  const auto sc = generate_synthetic_corpus(120, 9, 12);
  EXPECT_NO_THROW(validate_measure_links(sc.corpus, sc.measures));
}
