#include "kgr/query.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace kgr {
namespace {

std::size_t whitespace_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::size_t n = 0;
    while (in >> tok) ++n;
    return n;
}

std::string id_to_string(const nlohmann::json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<std::int64_t>());
    throw std::runtime_error("example_id must be a string or integer");
}

}  // namespace

ImageText image_text(const std::string& ocr, const std::string& caption) {
    ImageText v;
    if (ocr.empty()) {
        v.text = caption;
    } else if (caption.empty()) {
        v.text = ocr;
    } else {
        v.text = ocr + " " + caption;
    }
    return v;
}

StemQuery build_stem_query(const std::string& question, const ImageText& v_text,
                           const StopWordPolicy& policy) {
    StemQuery query;
    std::unordered_set<std::string> seen;
    for (auto& stem : stems_of(v_text.text, policy)) {
        if (seen.insert(stem).second) query.stems.push_back(std::move(stem));
    }
    query.image_prefix_len = query.stems.size();
    for (auto& stem : stems_of(question, policy)) query.stems.push_back(std::move(stem));
    return query;
}

ReaderContexts assemble_contexts(const std::string& question, const ImageText& v_text,
                                 const std::vector<std::string>& fact_texts,
                                 std::size_t budget) {
    ReaderContexts ctx;
    ctx.background = "question: " + question + " context: " + v_text.text;
    ctx.background_tokens = whitespace_tokens(ctx.background);

    auto knowledge_of = [](const std::vector<std::string>& facts, std::size_t count) {
        std::string text = "fact:";
        for (std::size_t i = 0; i < count; ++i) {
            text += (i == 0) ? " " : ". ";
            text += facts[i];
        }
        return text;
    };

    std::size_t kept = fact_texts.size();
    std::string knowledge = knowledge_of(fact_texts, kept);
    while (kept > 0 && whitespace_tokens(knowledge) > budget) {
        --kept;
        knowledge = knowledge_of(fact_texts, kept);
    }
    ctx.knowledge = knowledge;
    ctx.knowledge_tokens = whitespace_tokens(knowledge);
    ctx.facts_kept = kept;
    ctx.budget_exhausted = kept == 0 && !fact_texts.empty();
    return ctx;
}

std::uint64_t attention_pair_count(std::uint64_t l_b, std::uint64_t l_k, AttentionMode mode) {
    if (mode == AttentionMode::Joint) {
        std::uint64_t total = l_b + l_k;
        return total * total;
    }
    return l_b * l_b + l_k * l_k;
}

std::vector<VqaExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::vector<VqaExample> examples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        VqaExample ex;
        if (!row.contains("example_id"))
            throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                     ": missing example_id");
        ex.example_id = id_to_string(row.at("example_id"));
        if (!row.contains("question") || !row.at("question").is_string() ||
            row.at("question").get<std::string>().empty())
            throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                     ": missing or empty question");
        ex.question = row.at("question").get<std::string>();
        ex.caption = row.value("caption", std::string());
        ex.ocr_text = row.value("ocr", std::string());

        if (row.contains("answers")) {
            for (const auto& item : row.at("answers")) {
                if (item.is_string()) {
                    auto text = item.get<std::string>();
                    bool merged = false;
                    for (auto& entry : ex.answers.entries) {
                        if (entry.text == text) {
                            ++entry.annotators;
                            merged = true;
                            break;
                        }
                    }
                    if (!merged) ex.answers.entries.push_back({text, 1});
                } else if (item.is_array() && item.size() == 2) {
                    ex.answers.entries.push_back(
                        {item.at(0).get<std::string>(), item.at(1).get<std::size_t>()});
                } else {
                    throw std::runtime_error("dataset line " + std::to_string(lineno) +
                                             ": answers must be strings or [string, count]");
                }
            }
        }
        examples.push_back(std::move(ex));
    }
    return examples;
}

VqaCorpus build_vqa_corpus(const std::vector<VqaExample>& dataset,
                           const StopWordPolicy& policy) {
    VqaCorpus corpus;
    for (const auto& ex : dataset) {
        corpus.add(stems_of(ex.question, policy));
        for (const auto& entry : ex.answers.entries) corpus.add(stems_of(entry.text, policy));
        corpus.add(stems_of(ex.caption, policy));
        corpus.add(stems_of(ex.ocr_text, policy));
    }
    return corpus;
}

}  // namespace kgr
