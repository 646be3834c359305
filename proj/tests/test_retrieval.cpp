#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "kgr/retrieval.hpp"

using namespace kgr;

namespace {

FactSentence fact_of(std::int64_t id, const std::vector<std::string>& stems) {
    FactSentence f;
    f.fact_id = id;
    f.stem_tokens = stems;
    f.stems.insert(stems.begin(), stems.end());
    f.length = stems.size();
    for (const auto& s : stems) f.text += (f.text.empty() ? "" : " ") + s;
    return f;
}

// Independent score-sort-truncate oracle.
std::vector<RetrievalResult> brute_force_top_k(const Bm25Index& index,
                                               const std::vector<FactSentence>& corpus,
                                               const std::vector<std::string>& query,
                                               std::size_t k) {
    std::vector<RetrievalResult> all;
    for (const auto& f : corpus) {
        double s = 0.0;
        for (const auto& stem : query) s += index.idf(stem) * index.term_score(stem, f.fact_id);
        all.push_back({f.fact_id, s, 0});
    }
    std::sort(all.begin(), all.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fact_id < b.fact_id;
    });
    if (all.size() > k) all.resize(k);
    for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = i + 1;
    return all;
}

std::vector<FactSentence> random_corpus(std::mt19937& rng, std::size_t max_facts,
                                        std::size_t max_stems) {
    std::uniform_int_distribution<std::size_t> n_facts(1, max_facts);
    std::uniform_int_distribution<std::size_t> n_stems(1, max_stems);
    std::uniform_int_distribution<int> vocab(0, 40);
    std::vector<FactSentence> corpus;
    std::size_t n = n_facts(rng);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> stems;
        std::size_t len = n_stems(rng);
        for (std::size_t j = 0; j < len; ++j) stems.push_back("w" + std::to_string(vocab(rng)));
        corpus.push_back(fact_of(static_cast<std::int64_t>(i), stems));
    }
    return corpus;
}

std::vector<std::string> random_query(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> n_stems(0, 6);
    std::uniform_int_distribution<int> vocab(0, 45);
    std::vector<std::string> query;
    std::size_t len = n_stems(rng);
    for (std::size_t j = 0; j < len; ++j) query.push_back("w" + std::to_string(vocab(rng)));
    return query;
}

}  // namespace

TEST_CASE("build_index statistics") {
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog", "has", "part", "whisker"}),
                                            fact_of(1, {"cat", "has", "part", "whisker"})};
    auto index = Bm25Index::build(corpus);
    CHECK(index.fact_count() == 2);
    CHECK(index.doc_freq("whisker") == 2);
    CHECK(index.doc_freq("dog") == 1);
    CHECK(index.doc_freq("absent") == 0);
    CHECK(index.avg_doc_len() == 4.0);

    auto empty = Bm25Index::build({});
    CHECK(empty.fact_count() == 0);
    CHECK(empty.avg_doc_len() == 0.0);
}

TEST_CASE("build_index doc_freq table matches a hand count") {
    auto corpus = std::vector<FactSentence>{
        fact_of(0, {"a", "b", "b"}), fact_of(1, {"b", "c"}), fact_of(2, {"a"}),
        fact_of(3, {"c", "c", "d"})};
    auto index = Bm25Index::build(corpus);
    CHECK(index.doc_freq("a") == 2);
    CHECK(index.doc_freq("b") == 2);
    CHECK(index.doc_freq("c") == 2);
    CHECK(index.doc_freq("d") == 1);
}

TEST_CASE("build_index rejects duplicate fact ids") {
    auto corpus = std::vector<FactSentence>{fact_of(0, {"a"}), fact_of(0, {"b"})};
    CHECK_THROWS(Bm25Index::build(corpus));
}

TEST_CASE("idf closed form") {
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog"}), fact_of(1, {"cat"}),
                                            fact_of(2, {"owl"})};
    auto index = Bm25Index::build(corpus);
    CHECK(index.idf("dog") == doctest::Approx(std::log(2.5 / 1.5)).epsilon(1e-12));

    auto tiny = Bm25Index::build({fact_of(0, {"dog"})});
    CHECK(tiny.idf("dog") == doctest::Approx(std::log(0.5 / 1.5)).epsilon(1e-12));
    CHECK(tiny.idf("dog") < 0.0);

    std::vector<FactSentence> ten;
    for (int i = 0; i < 10; ++i) ten.push_back(fact_of(i, {"x"}));
    auto index10 = Bm25Index::build(ten);
    CHECK(index10.idf("absent") == doctest::Approx(std::log(10.5 / 0.5)).epsilon(1e-12));

    CHECK_THROWS(Bm25Index::build({}).idf("dog"));
}

TEST_CASE("idf strictly decreases in doc frequency") {
    std::vector<FactSentence> corpus;
    for (int i = 0; i < 20; ++i) {
        std::vector<std::string> stems;
        for (int j = 0; j <= i; ++j) stems.push_back("s" + std::to_string(j));
        corpus.push_back(fact_of(i, stems));
    }
    // s0 appears in all 20 facts, s19 in exactly one
    auto index = Bm25Index::build(corpus);
    double prev = index.idf("s0");
    for (int j = 1; j < 20; ++j) {
        double cur = index.idf("s" + std::to_string(j));
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("term_score") {
    // One fact of length 4 and one of length 12: avg length 8.
    std::vector<std::string> short_stems = {"dog", "dog", "cat", "owl"};
    std::vector<std::string> long_stems(12, "filler");
    auto corpus = std::vector<FactSentence>{fact_of(0, short_stems), fact_of(1, long_stems)};
    auto index = Bm25Index::build(corpus, 1.2, 0.75);

    CHECK(index.term_score("absent", 0) == 0.0);
    // tf=2, doc_len=4, avg=8: 2*2.2 / (2 + 1.2*(1 - 0.75 + 0.75*0.5)) = 4.4/2.75
    CHECK(index.term_score("dog", 0) == doctest::Approx(1.6).epsilon(1e-12));
    CHECK_THROWS(index.term_score("dog", 99));

    // length-neutral doc: tf=1, doc_len == avg_doc_len
    auto neutral = Bm25Index::build(
        {fact_of(0, {"a", "b", "c"}), fact_of(1, {"d", "e", "f"})}, 1.2, 0.75);
    CHECK(neutral.term_score("a", 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("term_score increases in tf and is bounded by k1+1") {
    double k1 = 1.2;
    std::vector<FactSentence> corpus;
    for (int tf = 1; tf <= 8; ++tf) {
        std::vector<std::string> stems(8, "pad");
        for (int j = 0; j < tf; ++j) stems[j] = "hit";
        corpus.push_back(fact_of(tf - 1, stems));
    }
    auto index = Bm25Index::build(corpus, k1, 0.75);
    double prev = 0.0;
    for (int tf = 1; tf <= 8; ++tf) {
        double s = index.term_score("hit", tf - 1);
        CHECK(s > prev);
        CHECK(s < k1 + 1.0);
        prev = s;
    }
}

TEST_CASE("score sums per query occurrence") {
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog", "bone"}), fact_of(1, {"cat"})};
    auto index = Bm25Index::build(corpus);
    CHECK(index.score({}, 0) == 0.0);
    CHECK(index.score({"dog"}, 1) == 0.0);
    CHECK(index.score({"dog", "dog"}, 0) ==
          doctest::Approx(2.0 * index.score({"dog"}, 0)).epsilon(1e-12));

    // additivity over concatenation
    std::vector<std::string> q1 = {"dog"}, q2 = {"bone", "cat"}, q12 = {"dog", "bone", "cat"};
    CHECK(index.score(q12, 0) ==
          doctest::Approx(index.score(q1, 0) + index.score(q2, 0)).epsilon(1e-12));
}

TEST_CASE("retrieve_top_k basics") {
    // "dog" in 2 of 5 docs: idf = ln(3.5/2.5) > 0
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog"}), fact_of(1, {"dog"}),
                                            fact_of(2, {"cat"}), fact_of(3, {"owl"}),
                                            fact_of(4, {"elk"})};
    auto index = Bm25Index::build(corpus);

    auto all = index.retrieve_top_k({"dog"}, 10);
    CHECK(all.size() == 5);  // k larger than corpus returns everything ranked

    // equal scores: lower fact_id first
    CHECK(all[0].fact_id == 0);
    CHECK(all[1].fact_id == 1);
    CHECK(all[0].score == all[1].score);
    CHECK(all[0].score > 0.0);
    CHECK(all[0].rank == 1);
    CHECK(all[2].fact_id == 2);  // zero-score tail also ordered by id
    CHECK(all[2].score == 0.0);
}

TEST_CASE("negative idf is kept, pushing over-common stems below the zero line") {
    // "dog" in 2 of 3 docs: idf = ln(1.5/2.5) < 0
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog"}), fact_of(1, {"dog"}),
                                            fact_of(2, {"cat"})};
    auto index = Bm25Index::build(corpus);
    CHECK(index.idf("dog") < 0.0);
    auto all = index.retrieve_top_k({"dog"}, 3);
    CHECK(all[0].fact_id == 2);  // the non-matching doc outranks the matches
    CHECK(all[0].score == 0.0);
    CHECK(all[1].score < 0.0);
}

TEST_CASE("retrieve_top_k matches the brute-force oracle on a fixed fixture") {
    auto corpus = std::vector<FactSentence>{
        fact_of(0, {"dog", "has", "part", "whisker"}), fact_of(1, {"cat", "has", "part", "tail"}),
        fact_of(2, {"dog", "dog", "bark"}),            fact_of(3, {"owl", "fli"}),
        fact_of(4, {"dog", "cat", "friend"}),          fact_of(5, {"whisker"})};
    auto index = Bm25Index::build(corpus);
    std::vector<std::string> query = {"dog", "whisker"};
    auto got = index.retrieve_top_k(query, 3);
    auto want = brute_force_top_k(index, corpus, query, 3);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].fact_id == want[i].fact_id);
        CHECK(got[i].score == want[i].score);
        CHECK(got[i].rank == want[i].rank);
    }
}

TEST_CASE("retrieve_top_k matches the brute-force oracle on random corpora") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        auto corpus = random_corpus(rng, 60, 10);
        auto index = Bm25Index::build(corpus);
        for (int q = 0; q < 10; ++q) {
            auto query = random_query(rng);
            std::uniform_int_distribution<std::size_t> k_dist(1, corpus.size() + 3);
            std::size_t k = k_dist(rng);
            auto got = index.retrieve_top_k(query, k);
            auto want = brute_force_top_k(index, corpus, query, k);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                REQUIRE(got[i].fact_id == want[i].fact_id);
                REQUIRE(got[i].score == want[i].score);
            }
        }
    }
}

TEST_CASE("index save/load round trip preserves scores bit-for-bit") {
    std::mt19937 rng(13);
    auto corpus = random_corpus(rng, 80, 12);
    auto index = Bm25Index::build(corpus, 1.4, 0.6);
    index.save("index_roundtrip.bin");
    auto loaded = Bm25Index::load("index_roundtrip.bin");
    CHECK(loaded == index);
    for (int q = 0; q < 100; ++q) {
        auto query = random_query(rng);
        auto a = index.retrieve_top_k(query, 10);
        auto b = loaded.retrieve_top_k(query, 10);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].fact_id == b[i].fact_id);
            REQUIRE(a[i].score == b[i].score);
        }
    }
}

TEST_CASE("load rejects truncated and foreign files") {
    auto corpus = std::vector<FactSentence>{fact_of(0, {"dog"}), fact_of(1, {"cat", "dog"})};
    auto index = Bm25Index::build(corpus);
    index.save("index_trunc.bin");
    {
        std::ifstream in("index_trunc.bin", std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        std::ofstream out("index_trunc.bin", std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    }
    CHECK_THROWS(Bm25Index::load("index_trunc.bin"));

    {
        std::ofstream out("index_magic.bin", std::ios::binary);
        out << "NOTANIDX and some more bytes";
    }
    CHECK_THROWS_AS(Bm25Index::load("index_magic.bin"), std::runtime_error);
}

TEST_CASE("build then query is deterministic") {
    std::mt19937 rng(99);
    auto corpus = random_corpus(rng, 50, 8);
    auto a = Bm25Index::build(corpus);
    auto b = Bm25Index::build(corpus);
    auto qa = a.retrieve_top_k({"w1", "w2", "w3"}, 10);
    auto qb = b.retrieve_top_k({"w1", "w2", "w3"}, 10);
    REQUIRE(qa.size() == qb.size());
    for (std::size_t i = 0; i < qa.size(); ++i) {
        CHECK(qa[i].fact_id == qb[i].fact_id);
        CHECK(qa[i].score == qb[i].score);
    }
}
