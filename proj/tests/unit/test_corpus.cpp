#include <gtest/gtest.h>

#include <random>

#include "agrag/corpus.hpp"
#include "agrag/error.hpp"
#include "agrag/util.hpp"

using namespace agrag;
using namespace agrag::corpus;

namespace {

Document doc_of(std::string text, std::string id = "d") { return Document{std::move(id), std::move(text), 0, {}}; }

// Plain sliding window without boundary snapping.
std::vector<Span> window_oracle(std::size_t n, std::size_t max, std::size_t overlap) {
  std::vector<Span> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = std::min(start + max, n);
    out.push_back({start, end});
    if (end == n) return out;
    start = end - overlap;
  }
}

}  // namespace

TEST(Ingest, ReadsQuotedFieldsAndDefaultIds) {
  const auto r = ingest_csv_text("id,text\n1,\"Hello, \"\"world\"\"\"\n2,\"multi\nline\"\n");
  ASSERT_EQ(r.documents.size(), 2u);
  EXPECT_EQ(r.documents[0].text, "Hello, \"world\"");
  EXPECT_EQ(r.documents[1].text, "multi\nline");
  EXPECT_EQ(r.documents[0].doc_id, "doc-0");
  EXPECT_EQ(r.documents[0].meta.at("id"), "1");
}

TEST(Ingest, IdColumnBecomesDocId) {
  IngestOptions o;
  o.id_column = "id";
  const auto r = ingest_csv_text("id,text\nx7,alpha\ny8,beta\n", o);
  EXPECT_EQ(r.documents[1].doc_id, "y8");
  EXPECT_EQ(r.documents[1].source_row, 1u);
}

TEST(Ingest, MissingColumnIsReported) {
  try {
    ingest_csv_text("id,body\n1,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
  }
}

TEST(Ingest, EmptyCorpusAndEmptyRows) {
  try {
    ingest_csv_text("text\n\"  \"\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyCorpus);
  }
  const auto r = ingest_csv_text("text\n\"  \"\nreal\n");
  EXPECT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.empty_rows_skipped, 1u);
}

TEST(Ingest, MalformedRowsFailOrAreSkipped) {
  const std::string csv = "a,text\n1,ok\n2,\"unterminated\n";
  const std::string wide = "a,text\n1,ok\n2,too,many\n3,fine\n";
  for (const auto& input : {csv, wide}) {
    try {
      ingest_csv_text(input);
      FAIL() << input;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::MalformedRow);
    }
  }
  IngestOptions o;
  o.skip_malformed = true;
  const auto r = ingest_csv_text(wide, o);
  EXPECT_EQ(r.documents.size(), 2u);
  EXPECT_EQ(r.malformed_rows_skipped, 1u);
}

TEST(Ingest, DedupCollapsesExactTexts) {
  const std::string csv = "text\nsame\nother\nsame\n";
  EXPECT_EQ(ingest_csv_text(csv).documents.size(), 3u);
  IngestOptions o;
  o.dedup = true;
  const auto r = ingest_csv_text(csv, o);
  EXPECT_EQ(r.documents.size(), 2u);
  EXPECT_EQ(r.duplicates_collapsed, 1u);
}

TEST(Chunk, ExampleSpans) {
  const auto chunks = chunk(doc_of(std::string(1200, 'a')), {500, 50, false});
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].span, (Span{0, 500}));
  EXPECT_EQ(chunks[1].span, (Span{450, 950}));
  EXPECT_EQ(chunks[2].span, (Span{900, 1200}));
  EXPECT_EQ(chunks[2].chunk_id, "d#2");
}

TEST(Chunk, ShortDocumentIsOneChunk) {
  const auto chunks = chunk(doc_of("short text"), {});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, "short text");
}

TEST(Chunk, RejectsOverlapNotBelowMax) {
  EXPECT_THROW(chunk(doc_of("x"), {10, 10, false}), Error);
}

TEST(Chunk, MatchesSlidingOracleWithoutBoundaries) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 3000;
    const std::size_t max = 2 + rng() % 400;
    const std::size_t overlap = rng() % max;
    std::string text(n, 'x');
    const auto got = chunk(doc_of(text), {max, overlap, false});
    const auto want = window_oracle(n, max, overlap);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].span, want[i]);
  }
}

TEST(Chunk, SpansCoverAndReconstructWithMultibyteText) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> pieces = {"Impfung", " ", "ist", ". ", "sicher", "? ", "\n", "\xc3\xa9t\xc3\xa9",
                                           "\xe2\x9c\x93", "ok!", " "};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    const std::size_t words = 1 + rng() % 400;
    for (std::size_t i = 0; i < words; ++i) text += pieces[rng() % pieces.size()];
    const std::size_t max = 20 + rng() % 200;
    const std::size_t overlap = rng() % 20;
    const Document d = doc_of(text);
    const auto chunks = chunk(d, {max, overlap, true});
    const std::size_t n = utf8::length(text);
    EXPECT_EQ(chunks.front().span.start, 0u);
    EXPECT_EQ(chunks.back().span.end, n);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      const auto& c = chunks[i];
      EXPECT_LE(c.span.length(), max);
      EXPECT_GT(c.span.length(), 0u);
      EXPECT_EQ(c.text, utf8::substr(text, c.span.start, c.span.end));
      if (i > 0) EXPECT_EQ(c.span.start, chunks[i - 1].span.end - overlap);
    }
    EXPECT_EQ(reconstruct(chunks), text);
  }
}

TEST(Chunk, SnapsToSentenceBoundary) {
  const std::string text = "First sentence here. Second one is a bit longer than the first.";
  const auto chunks = chunk(doc_of(text), {30, 5, true});
  EXPECT_EQ(chunks[0].text, "First sentence here.");
  EXPECT_EQ(chunks[0].span.end, 20u);
  EXPECT_EQ(chunks[1].span.start, 15u);
  const auto plain = chunk(doc_of(text), {30, 5, false});
  EXPECT_EQ(plain[0].span.end, 30u);
}

TEST(Chunk, JsonRoundTrip) {
  const auto chunks = chunk(doc_of(std::string(300, 'q'), "z"), {100, 10, false});
  EXPECT_EQ(chunks_from_json(chunks_json(chunks)), chunks);
  const std::vector<Document> docs = {doc_of(std::string(300, 'q'), "z")};
  const auto m = manifest_json(docs, chunks);
  EXPECT_EQ(m["document_count"], 1);
  EXPECT_EQ(m["chunk_count"], chunks.size());
}
