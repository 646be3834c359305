#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kgr/stemming.hpp"
#include "kgr/verbalizer.hpp"

namespace kgr {

/// One ground-truth answer with the number of annotators who gave it.
struct AnswerEntry {
    std::string text;
    std::size_t annotators = 1;
    bool operator==(const AnswerEntry&) const = default;
};

struct AnswerSet {
    std::vector<AnswerEntry> entries;
    std::size_t total_annotators = 10;
};

struct VqaExample {
    std::string example_id;
    std::string question;
    std::string caption;
    std::string ocr_text;
    AnswerSet answers;
};

/// Textual image representation: OCR text then caption.
struct ImageText {
    std::string text;
};

/// Ordered stem sequence: image-derived prefix (duplicate-free) followed
/// by the question stems kept verbatim.
struct StemQuery {
    std::vector<std::string> stems;
    std::size_t image_prefix_len = 0;

    std::size_t length() const { return stems.size(); }
};

struct ReaderContexts {
    std::string background;
    std::string knowledge;
    std::size_t background_tokens = 0;  // L_b
    std::size_t knowledge_tokens = 0;   // L_k
    std::size_t facts_kept = 0;
    bool budget_exhausted = false;  // true when not even the top fact fit
};

enum class AttentionMode { Joint, Separate };

ImageText image_text(const std::string& ocr, const std::string& caption);

StemQuery build_stem_query(const std::string& question, const ImageText& v_text,
                           const StopWordPolicy& policy);

/// Background: "question: <q> context: <v>". Knowledge: "fact: " followed by
/// the rank-ordered fact texts joined with ". "; whole facts are dropped
/// from the lowest rank until the whitespace-token count fits the budget.
ReaderContexts assemble_contexts(const std::string& question, const ImageText& v_text,
                                 const std::vector<std::string>& fact_texts,
                                 std::size_t budget);

/// Self-attention token-pair count: joint (L_b+L_k)^2 vs separate
/// L_b^2 + L_k^2 encoding.
std::uint64_t attention_pair_count(std::uint64_t l_b, std::uint64_t l_k, AttentionMode mode);

/// JSON-lines dataset: {example_id, question, caption, ocr, answers}.
/// answers is a list of strings or of [string, count] pairs.
std::vector<VqaExample> load_dataset(const std::string& path);

/// Stem-frequency lexicon over questions, answers, captions and OCR text.
VqaCorpus build_vqa_corpus(const std::vector<VqaExample>& dataset,
                           const StopWordPolicy& policy);

}  // namespace kgr
