#include "kgr/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace kgr {
namespace {

bool is_contiguous_subsequence(const std::vector<std::string>& needle,
                               const std::vector<std::string>& haystack) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t start = 0; start + needle.size() <= haystack.size(); ++start) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + start)) return true;
    }
    return false;
}

std::unordered_set<std::string> stem_set(const std::vector<std::string>& tokens) {
    std::unordered_set<std::string> stems;
    for (const auto& tok : tokens) stems.insert(porter_stem(tok));
    return stems;
}

}  // namespace

std::vector<std::string> normalize_answer(const std::string& text, const StopWordPolicy& policy) {
    std::vector<std::string> out;
    for (auto& tok : normalize_text(text)) {
        if (policy.is_stopped(tok)) continue;
        out.push_back(std::move(tok));
    }
    return out;
}

double answer_score(std::size_t annotators) {
    return std::min(1.0, static_cast<double>(annotators) / 3.0);
}

bool em_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt) {
    return !ans.empty() && ans == gt;
}

bool inc_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt) {
    if (ans.empty() || gt.empty()) return false;
    return is_contiguous_subsequence(ans, gt) || is_contiguous_subsequence(gt, ans);
}

bool stem_match(const std::vector<std::string>& ans, const std::vector<std::string>& gt) {
    if (ans.empty() || gt.empty()) return false;
    auto ans_stems = stem_set(ans);
    for (const auto& tok : gt) {
        if (ans_stems.count(porter_stem(tok))) return true;
    }
    return false;
}

double score_against_answers(const std::vector<std::string>& ans_tokens, const AnswerSet& answers,
                             const StopWordPolicy& policy,
                             bool (*match)(const std::vector<std::string>&,
                                           const std::vector<std::string>&)) {
    double best = 0.0;
    for (const auto& entry : answers.entries) {
        auto gt_tokens = normalize_answer(entry.text, policy);
        if (match(ans_tokens, gt_tokens)) best = std::max(best, answer_score(entry.annotators));
    }
    return best;
}

MetricReport evaluate_answers(const std::vector<Prediction>& predictions,
                              const std::vector<VqaExample>& dataset,
                              const StopWordPolicy& policy) {
    std::unordered_map<std::string, const VqaExample*> by_id;
    for (const auto& ex : dataset) by_id[ex.example_id] = &ex;

    std::vector<std::string> missing;
    for (const auto& pred : predictions)
        if (!by_id.count(pred.example_id)) missing.push_back(pred.example_id);
    if (!missing.empty()) {
        std::string ids;
        for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
        throw std::runtime_error("predictions reference unknown example ids: " + ids);
    }

    MetricReport report;
    for (const auto& pred : predictions) {
        const VqaExample& ex = *by_id.at(pred.example_id);
        auto tokens = normalize_answer(pred.ans, policy);
        ExampleScores scores;
        scores.example_id = pred.example_id;
        scores.em = score_against_answers(tokens, ex.answers, policy, em_match);
        scores.inc = score_against_answers(tokens, ex.answers, policy, inc_match);
        scores.stem = score_against_answers(tokens, ex.answers, policy, stem_match);
        report.per_example.push_back(scores);
    }
    if (!report.per_example.empty()) {
        double em = 0, inc = 0, stem = 0;
        for (const auto& s : report.per_example) {
            em += s.em;
            inc += s.inc;
            stem += s.stem;
        }
        double n = static_cast<double>(report.per_example.size());
        report.em_mean = 100.0 * em / n;
        report.inc_mean = 100.0 * inc / n;
        report.stem_mean = 100.0 * stem / n;
    }
    return report;
}

RecallReport inc_recall_at_k(const std::vector<RetrievalRow>& dump,
                             const std::vector<VqaExample>& dataset,
                             const std::vector<FactSentence>& facts,
                             const StopWordPolicy& policy,
                             const std::vector<std::size_t>& ks) {
    std::unordered_map<std::string, const RetrievalRow*> rows;
    for (const auto& row : dump) rows[row.example_id] = &row;
    std::unordered_map<std::int64_t, const FactSentence*> by_fact;
    for (const auto& f : facts) by_fact[f.fact_id] = &f;

    std::vector<std::string> missing;
    for (const auto& ex : dataset)
        if (!rows.count(ex.example_id)) missing.push_back(ex.example_id);
    if (!missing.empty()) {
        std::string ids;
        for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
        throw std::runtime_error("retrieval dump missing rows for example ids: " + ids);
    }

    RecallReport report;
    for (std::size_t k : ks) {
        std::size_t hits = 0;
        for (const auto& ex : dataset) {
            std::unordered_set<std::string> answer_stems;
            for (const auto& entry : ex.answers.entries) {
                for (const auto& tok : normalize_answer(entry.text, policy))
                    answer_stems.insert(porter_stem(tok));
            }
            const auto& ranked = rows.at(ex.example_id)->ranked;
            bool hit = false;
            for (std::size_t i = 0; i < ranked.size() && i < k && !hit; ++i) {
                auto it = by_fact.find(ranked[i].first);
                if (it == by_fact.end())
                    throw std::runtime_error("retrieval dump references unknown fact_id " +
                                             std::to_string(ranked[i].first));
                for (const auto& stem : it->second->stems) {
                    if (answer_stems.count(stem)) {
                        hit = true;
                        break;
                    }
                }
            }
            if (hit) ++hits;
        }
        report.recall_at_k[k] =
            dataset.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(dataset.size());
    }
    return report;
}

std::vector<Prediction> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open predictions: " + path);
    std::vector<Prediction> predictions;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("predictions line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
        Prediction pred;
        const auto& id = row.at("example_id");
        pred.example_id =
            id.is_string() ? id.get<std::string>() : std::to_string(id.get<std::int64_t>());
        pred.ans = row.at("ans").get<std::string>();
        predictions.push_back(std::move(pred));
    }
    return predictions;
}

std::vector<RetrievalRow> load_retrieval_dump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open retrieval dump: " + path);
    std::vector<RetrievalRow> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("retrieval dump line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
        RetrievalRow row;
        const auto& id = obj.at("query_id");
        row.example_id =
            id.is_string() ? id.get<std::string>() : std::to_string(id.get<std::int64_t>());
        for (const auto& pair : obj.at("ranked"))
            row.ranked.emplace_back(pair.at(0).get<std::int64_t>(), pair.at(1).get<double>());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace kgr
