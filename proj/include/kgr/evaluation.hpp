#pragma once

#include <map>
#include <string>
#include <vector>

#include "kgr/query.hpp"
#include "kgr/stemming.hpp"

namespace kgr {

struct Prediction {
    std::string example_id;
    std::string ans;
};

struct ExampleScores {
    std::string example_id;
    double em = 0.0;
    double inc = 0.0;
    double stem = 0.0;
};

struct MetricReport {
    std::vector<ExampleScores> per_example;
    double em_mean = 0.0;    // percentages
    double inc_mean = 0.0;
    double stem_mean = 0.0;
};

struct RecallReport {
    std::map<std::size_t, double> recall_at_k;
};

/// Ranked fact ids for one example, as produced by the retrieve command.
struct RetrievalRow {
    std::string example_id;
    std::vector<std::pair<std::int64_t, double>> ranked;
};

std::vector<std::string> normalize_answer(const std::string& text, const StopWordPolicy& policy);

/// Eq-5 style accuracy for one matched ground-truth answer count.
double answer_score(std::size_t annotators);

bool em_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt);

/// Contiguous token-subsequence containment in either direction. Empty
/// answers never match.
bool inc_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt);

bool stem_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt);

/// Max over matching ground-truth answers of min(1, annotators/3);
/// 0 when nothing matches.
double score_against_answers(const std::vector<std::string>& ans_tokens, const AnswerSet& answers,
                             const StopWordPolicy& policy,
                             bool (*match)(const std::vector<std::string>&,
                                           const std::vector<std::string>&));

MetricReport evaluate_answers(const std::vector<Prediction>& predictions,
                              const std::vector<VqaExample>& dataset,
                              const StopWordPolicy& policy);

/// Fraction of examples whose top-K fact texts contain at least one stem
/// of at least one ground-truth answer.
RecallReport inc_recall_at_k(const std::vector<RetrievalRow>& dump,
                             const std::vector<VqaExample>& dataset,
                             const std::vector<FactSentence>& facts,
                             const StopWordPolicy& policy,
                             const std::vector<std::size_t>& ks);

std::vector<Prediction> load_predictions(const std::string& path);
std::vector<RetrievalRow> load_retrieval_dump(const std::string& path);

}  // namespace kgr
