#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "support.hpp"

using namespace findret;
using findret::testing::TempDir;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Normalize, ThreeFourFive) {
  const auto n = normalize(EmbeddingSet(2, {"a"}, {3.0, 4.0}));
  EXPECT_TRUE(n.normalized());
  EXPECT_DOUBLE_EQ(n.vector(0)[0], 0.6);
  EXPECT_DOUBLE_EQ(n.vector(0)[1], 0.8);
}

TEST(Normalize, IdempotentOnUnitVectors) {
  const auto n = normalize(EmbeddingSet(3, {"a"}, {0.0, 1.0, 0.0}));
  const auto again = normalize(n);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(again.vector(0)[k], n.vector(0)[k], 1e-12);
}

TEST(Normalize, RandomNormsAreOne) {
  std::mt19937_64 rng(1);
  const auto n = normalize(findret::testing::random_embeddings(rng, 100, 16, "e"));
  for (std::size_t r = 0; r < n.size(); ++r) EXPECT_NEAR(std::sqrt(dot(n.vector(r), n.vector(r))), 1.0, 1e-9);
}

TEST(Normalize, ZeroVectorNamesId) {
  const auto msg = error_of([] { normalize(EmbeddingSet(2, {"ok", "F007"}, {1.0, 0.0, 0.0, 0.0})); });
  EXPECT_NE(msg.find("F007"), std::string::npos) << msg;
}

TEST(CosineMatrix, IdentityAndOrthogonality) {
  const auto e = normalize(EmbeddingSet(2, {"x", "y"}, {1.0, 0.0, 0.0, 2.0}));
  const auto m = cosine_matrix(e, e);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 1), 0.0);
  EXPECT_EQ(m.col_ids, e.ids());
}

TEST(CosineMatrix, MatchesPairwiseOracle) {
  std::mt19937_64 rng(42);
  const auto raw_q = findret::testing::random_embeddings(rng, 100, 16, "q");
  const auto raw_c = findret::testing::random_embeddings(rng, 100, 16, "c");
  const auto m = cosine_matrix(normalize(raw_q), normalize(raw_c), 4);
  for (std::size_t q = 0; q < 100; ++q) {
    for (std::size_t c = 0; c < 100; ++c) {
      EXPECT_NEAR(m(q, c), findret::testing::pairwise_cosine(raw_q.vector(q), raw_c.vector(c)), 1e-9);
      EXPECT_LE(std::abs(m(q, c)), 1.0 + 1e-9);
    }
  }
}

TEST(CosineMatrix, SymmetricWithUnitDiagonal) {
  std::mt19937_64 rng(6);
  const auto e = normalize(findret::testing::random_embeddings(rng, 40, 8, "e"));
  const auto m = cosine_matrix(e, e);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_NEAR(m(i, i), 1.0, 1e-9);
    for (std::size_t j = 0; j < 40; ++j) EXPECT_NEAR(m(i, j), m(j, i), 1e-9);
  }
}

TEST(CosineMatrix, ScaleInvariance) {
  std::mt19937_64 rng(9);
  const auto e = findret::testing::random_embeddings(rng, 10, 5, "e");
  std::vector<double> scaled(e.data().begin(), e.data().end());
  for (std::size_t k = 0; k < 5; ++k) scaled[3 * 5 + k] *= 7.5;
  const auto a = cosine_matrix(normalize(e), normalize(e));
  const auto b = cosine_matrix(normalize(EmbeddingSet(5, e.ids(), scaled)), normalize(e));
  for (std::size_t c = 0; c < 10; ++c) EXPECT_NEAR(a(3, c), b(3, c), 1e-12);
}

TEST(CosineMatrix, Preconditions) {
  const auto a = EmbeddingSet(2, {"x"}, {1.0, 0.0});
  const auto b = normalize(EmbeddingSet(3, {"y"}, {1.0, 0.0, 0.0}));
  EXPECT_THROW(cosine_matrix(a, normalize(a)), ValidationError);
  EXPECT_THROW(cosine_matrix(normalize(a), b), ValidationError);
}

TEST(EmbeddingFile, BinaryRoundTripIsBitExact) {
  TempDir dir("emb");
  const auto e = EmbeddingSet(4, {"F001", "F002", "F003"},
                              {0.5, -1.25, 3.0, 0.0, 1.0, 2.0, 3.0, 4.0, -0.125, 0.25, 8.0, 16.0});
  write_embeddings(e, dir.file("e.emb"));
  const auto bytes = findret::testing::read_file(dir.file("e.emb"));
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 3 * (2 + 4 + 4 * 4));
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 4u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3u);
  const std::vector<std::string> ids = {"F001", "F002", "F003"};
  const auto back = load_embeddings(dir.file("e.emb"), ids);
  EXPECT_EQ(back.dim(), 4u);
  EXPECT_FALSE(back.normalized());
  EXPECT_EQ(std::vector<double>(back.data().begin(), back.data().end()),
            std::vector<double>(e.data().begin(), e.data().end()));
  write_embeddings(back, dir.file("e2.emb"));
  EXPECT_EQ(findret::testing::read_file(dir.file("e2.emb")), bytes);
}

TEST(EmbeddingFile, ReordersToExpectedIds) {
  TempDir dir("emb_order");
  write_embeddings(EmbeddingSet(1, {"b", "a", "c"}, {2.0, 1.0, 3.0}), dir.file("e.emb"));
  const std::vector<std::string> ids = {"a", "b"};
  const auto e = load_embeddings(dir.file("e.emb"), ids);
  EXPECT_EQ(e.ids(), ids);
  EXPECT_EQ(e.vector(0)[0], 1.0);
  EXPECT_EQ(e.vector(1)[0], 2.0);
}

TEST(EmbeddingFile, MissingIdNamed) {
  TempDir dir("emb_missing");
  write_embeddings(EmbeddingSet(1, {"F001", "F003"}, {1.0, 2.0}), dir.file("e.emb"));
  const std::vector<std::string> ids = {"F001", "F002", "F003"};
  const auto msg = error_of([&] { load_embeddings(dir.file("e.emb"), ids); });
  EXPECT_NE(msg.find("F002"), std::string::npos) << msg;
}

TEST(EmbeddingFile, JsonlFallback) {
  TempDir dir("emb_jsonl");
  findret::testing::write_file(dir.file("e.jsonl"), "{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[0,0,1]}\n");
  const auto e = read_embedding_file(dir.file("e.jsonl"));
  EXPECT_EQ(e.dim(), 3u);
  EXPECT_EQ(e.size(), 2u);
  findret::testing::write_file(dir.file("bad.jsonl"), "{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[0,1]}\n");
  EXPECT_THROW(read_embedding_file(dir.file("bad.jsonl")), ValidationError);
}

TEST(EmbeddingFile, RejectsCorruptInput) {
  TempDir dir("emb_bad");
  write_embeddings(EmbeddingSet(2, {"a"}, {1.0, 2.0}), dir.file("e.emb"));
  const auto bytes = findret::testing::read_file(dir.file("e.emb"));
  findret::testing::write_file(dir.file("trunc.emb"), bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(read_embedding_file(dir.file("trunc.emb")), ParseError);
  findret::testing::write_file(dir.file("trail.emb"), bytes + "x");
  EXPECT_THROW(read_embedding_file(dir.file("trail.emb")), ParseError);
  findret::testing::write_file(dir.file("magic.emb"), "EMB2" + bytes.substr(4));
  EXPECT_THROW(read_embedding_file(dir.file("magic.emb")), ParseError);
  std::string nan_bytes = bytes;
  const float nan = std::nanf("");
  std::memcpy(nan_bytes.data() + bytes.size() - 4, &nan, 4);
  findret::testing::write_file(dir.file("nan.emb"), nan_bytes);
  EXPECT_THROW(read_embedding_file(dir.file("nan.emb")), ValidationError);
  EXPECT_THROW(read_embedding_file(dir.file("absent.emb")), IoError);
}

TEST(EmbeddingFile, Dimension384Accepted) {
  TempDir dir("emb384");
  std::mt19937_64 rng(384);
  const auto e = findret::testing::random_embeddings(rng, 3, 384, "F");
  write_embeddings(e, dir.file("e.emb"));
  EXPECT_EQ(read_embedding_file(dir.file("e.emb")).dim(), 384u);
}
