#include "breps/corpus_io.hpp"

#include <gtest/gtest.h>

#include <random>

#include "breps/error.hpp"
#include "test_util.hpp"

using namespace breps;

namespace {

std::string sentence(std::mt19937_64& rng, std::size_t words) {
  static const char* vocab[] = {"alpha", "beta", "gamma", "delta", "river", "stone", "cloud", "paper", "light"};
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += vocab[rng() % 9];
  }
  return out + '.';
}

std::vector<CorpusRecord> random_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CorpusRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    const std::size_t sentences = 1 + rng() % 12;
    for (std::size_t s = 0; s < sentences; ++s) text += (s ? " " : "") + sentence(rng, 3 + rng() % 20);
    out.push_back({"doc" + std::to_string(i), text, i % 3 == 0 ? std::optional<std::string>("Title") : std::nullopt});
  }
  return out;
}

IndexOptions fixed_time(std::size_t parallelism) {
  IndexOptions options;
  options.parallelism = parallelism;
  options.created_unix_seconds = 1700000000;
  return options;
}

}  // namespace

TEST(Corpus, ReadsJsonLines) {
  testutil::TempDir dir;
  testutil::write_file(dir / "c.jsonl",
                       "{\"doc_id\":\"a\",\"text\":\"hello world.\"}\n\n"
                       "{\"doc_id\":\"b\",\"text\":\"x\",\"title\":\"T\"}\n");
  const auto corpus = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].full_text(), "hello world.");
  EXPECT_EQ(corpus[1].full_text(), "T x");
}

TEST(Corpus, Errors) {
  testutil::TempDir dir;
  try {
    load_corpus(dir / "missing.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
  testutil::write_file(dir / "bad.jsonl", "{\"doc_id\":\"a\",\"text\":\"x\"}\n{\"doc_id\":1}\n");
  try {
    load_corpus(dir / "bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedLine);
    EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
  }
}

TEST(Queries, AcceptIntegerIds) {
  testutil::TempDir dir;
  testutil::write_file(dir / "q.jsonl", "{\"query_id\":7,\"text\":\"q seven\"}\n{\"query_id\":\"x\",\"text\":\"q\"}\n");
  const auto q = load_queries(dir / "q.jsonl");
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].query_id, "7");
  EXPECT_EQ(q[1].text, "q");
}

TEST(Triplets, Tsv) {
  testutil::TempDir dir;
  testutil::write_file(dir / "t.tsv", "q1\td1\td2\n\nq2\td3\td4\n");
  const auto t = load_triplets(dir / "t.tsv");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].negative_doc_id, "d4");
  testutil::write_file(dir / "bad.tsv", "q1\td1\n");
  EXPECT_THROW(load_triplets(dir / "bad.tsv"), Error);
}

TEST(BuildIndex, StoresEveryDocument) {
  testutil::TempDir dir;
  const auto corpus = random_corpus(30, 1);
  HashingEmbedder embedder(32);
  const auto stats = build_index(corpus, embedder, dir / "s.bin", fixed_time(1));
  const Store store = Store::open(dir / "s.bin");
  EXPECT_EQ(store.doc_count(), 30u);
  EXPECT_EQ(stats.summary.doc_count, 30u);
  EXPECT_EQ(stats.summary.block_count, store.block_count());
  EXPECT_EQ(store.doc_ids().front(), "doc0");
  EXPECT_EQ(store.created_unix_seconds(), 1700000000u);
  EXPECT_GT(stats.modeled_whole_cost, stats.modeled_block_cost);
}

TEST(BuildIndex, ParallelismDoesNotChangePayload) {
  testutil::TempDir dir;
  const auto corpus = random_corpus(200, 2);
  HashingEmbedder embedder(32);
  build_index(corpus, embedder, dir / "p1.bin", fixed_time(1));
  build_index(corpus, embedder, dir / "p8.bin", fixed_time(8));
  EXPECT_EQ(testutil::read_file(dir / "p1.bin"), testutil::read_file(dir / "p8.bin"));
}

TEST(BuildIndex, TruncatesToMaxBlocks) {
  testutil::TempDir dir;
  std::string text;
  for (int i = 0; i < 25; ++i) text += "sentence number " + std::to_string(i) + " ends here. ";
  HashingEmbedder embedder(16);
  IndexOptions options = fixed_time(1);
  options.segmentation.max_block_tokens = 5;
  build_index(std::vector<CorpusRecord>{{"long", text, std::nullopt}}, embedder, dir / "s.bin", options);
  const Store store = Store::open(dir / "s.bin");
  EXPECT_EQ(store.get("long")->block_vectors.size(), 20u);
}

TEST(BuildIndex, DuplicateIdLeavesNoStore) {
  testutil::TempDir dir;
  HashingEmbedder embedder(16);
  const std::vector<CorpusRecord> corpus = {{"a", "one.", std::nullopt}, {"a", "two.", std::nullopt}};
  try {
    build_index(corpus, embedder, dir / "s.bin", fixed_time(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateDocId);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "s.bin"));
}

TEST(BuildIndex, EmptyTextGetsZeroBlocks) {
  testutil::TempDir dir;
  HashingEmbedder embedder(16);
  build_index(std::vector<CorpusRecord>{{"e", "   ", std::nullopt}, {"f", "text.", std::nullopt}}, embedder,
              dir / "s.bin", fixed_time(1));
  const Store store = Store::open(dir / "s.bin");
  EXPECT_TRUE(store.get("e")->block_vectors.empty());
  EXPECT_EQ(store.get("f")->block_vectors.size(), 1u);
}
