#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgr/verbalizer.hpp"

namespace kgr {

struct RetrievalResult {
    std::int64_t fact_id = 0;
    double score = 0.0;
    std::size_t rank = 0;  // 1-based
};

/// Stem-keyed inverted index over fact sentences with Okapi BM25
/// document-side weighting.
class Bm25Index {
  public:
    struct Posting {
        std::int64_t fact_id;
        std::uint32_t term_frequency;
        bool operator==(const Posting&) const = default;
    };

    Bm25Index() = default;

    static Bm25Index build(const std::vector<FactSentence>& corpus, double k1 = 1.2,
                           double b = 0.75);

    std::size_t fact_count() const { return doc_len_.size(); }
    double avg_doc_len() const { return avg_doc_len_; }
    double k1() const { return k1_; }
    double b() const { return b_; }

    std::size_t doc_freq(const std::string& stem) const;

    /// ln((N - n + 0.5) / (n + 0.5)) scaled by idf_scale; stems absent from
    /// the index use n = 0. Throws if the index is empty.
    double idf(const std::string& stem) const;

    /// Document-side BM25 term: tf (k1+1) / (tf + k1 (1 - b + b len/avglen)).
    double term_score(const std::string& stem, std::int64_t fact_id) const;

    /// Eq-style query score: sum over query stem occurrences of
    /// idf(s) * term_score(s, fact). Duplicated query stems count again.
    double score(const std::vector<std::string>& query, std::int64_t fact_id) const;

    /// Top-k facts by score descending, ties by ascending fact_id.
    /// Zero-score facts fill remaining slots only when fewer than k facts
    /// score above zero.
    std::vector<RetrievalResult> retrieve_top_k(const std::vector<std::string>& query,
                                                std::size_t k) const;

    /// Uniform positive rescaling of all IDF values (a change of log base).
    /// Rankings are invariant under it.
    void set_idf_scale(double scale);
    double idf_scale() const { return idf_scale_; }

    /// Versioned binary container; round-trips bit-identical scores.
    void save(const std::string& path) const;
    static Bm25Index load(const std::string& path);

    bool operator==(const Bm25Index&) const = default;

  private:
    std::uint32_t tf(const std::string& stem, std::int64_t fact_id) const;

    std::unordered_map<std::string, std::vector<Posting>> postings_;
    std::unordered_map<std::int64_t, std::uint32_t> doc_len_;
    double avg_doc_len_ = 0.0;
    double k1_ = 1.2;
    double b_ = 0.75;
    double idf_scale_ = 1.0;
};

}  // namespace kgr
