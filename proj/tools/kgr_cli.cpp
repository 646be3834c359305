// kgr: knowledge-graph retrieval and VQA evaluation toolkit, batch CLI.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgr/evaluation.hpp"
#include "kgr/kg.hpp"
#include "kgr/query.hpp"
#include "kgr/retrieval.hpp"
#include "kgr/signal.hpp"
#include "kgr/stemming.hpp"
#include "kgr/verbalizer.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string fnv1a_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input for digest: " + path);
    std::uint64_t hash = 1469598103934665603ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

void write_manifest(const std::string& command, const std::vector<std::string>& inputs,
                    const nlohmann::json& params, const std::string& out_path) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["tool_version"] = kToolVersion;
    manifest["params"] = params;
    nlohmann::json digests = nlohmann::json::object();
    for (const auto& path : inputs) digests[path] = fnv1a_digest(path);
    manifest["inputs"] = digests;
    std::ofstream out(out_path + ".manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + out_path + ".manifest.json");
    out << manifest.dump(2) << '\n';
}

std::vector<kgr::SourceSpec> load_source_specs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sources config: " + path);
    nlohmann::json config;
    in >> config;
    std::vector<kgr::SourceSpec> specs;
    for (const auto& entry : config) {
        kgr::SourceSpec spec;
        spec.source = entry.at("source").get<std::string>();
        spec.path = entry.at("path").get<std::string>();
        spec.has_confidence = entry.value("has_confidence", false);
        if (entry.contains("max_triples_by_confidence")) {
            auto cap = entry.at("max_triples_by_confidence").get<std::int64_t>();
            if (cap <= 0) throw std::runtime_error("max_triples_by_confidence must be positive");
            spec.max_triples_by_confidence = static_cast<std::size_t>(cap);
        }
        if (entry.contains("relation_blocklist")) {
            for (const auto& rel : entry.at("relation_blocklist"))
                spec.relation_blocklist.insert(rel.get<std::string>());
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

std::vector<std::size_t> parse_ks(const std::string& ks_flag) {
    std::vector<std::size_t> ks;
    std::stringstream in(ks_flag);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) ks.push_back(std::stoull(item));
    }
    if (ks.empty()) throw std::runtime_error("--ks must list at least one cutoff");
    return ks;
}

struct FactCorpusArgs {
    std::string kg_path;
    std::string templates_path;
    std::string dict_path;
    std::string stopwords_path;
};

void add_fact_corpus_flags(CLI::App* cmd, FactCorpusArgs& args) {
    cmd->add_option("--kg", args.kg_path, "KG snapshot TSV")->required();
    cmd->add_option("--templates", args.templates_path, "manual template TSV")->required();
    cmd->add_option("--dict", args.dict_path, "relation segmentation word list")->required();
    cmd->add_option("--stopwords", args.stopwords_path, "stop-word policy file")->required();
}

std::vector<kgr::FactSentence> build_facts(const FactCorpusArgs& args) {
    auto kg = kgr::load_snapshot(args.kg_path);
    auto registry = kgr::TemplateRegistry::load(args.templates_path, args.dict_path);
    auto policy = kgr::StopWordPolicy::load(args.stopwords_path);
    return kgr::build_fact_corpus(kg, registry, policy);
}

int run(int argc, char** argv) {
    CLI::App app{"knowledge-graph retrieval and VQA evaluation toolkit"};
    app.require_subcommand(1);

    // build-corpus
    auto* corpus_cmd = app.add_subcommand("build-corpus", "build the stem-frequency lexicon");
    std::string corpus_dataset, corpus_stopwords, corpus_out;
    corpus_cmd->add_option("--dataset", corpus_dataset)->required();
    corpus_cmd->add_option("--stopwords", corpus_stopwords)->required();
    corpus_cmd->add_option("--out", corpus_out)->required();

    // build-kg
    auto* kg_cmd = app.add_subcommand("build-kg", "ingest and filter triple sources");
    std::string kg_sources, kg_corpus, kg_out;
    std::size_t kg_threshold = 10000;
    kg_cmd->add_option("--sources", kg_sources, "JSON list of source specs")->required();
    kg_cmd->add_option("--corpus", kg_corpus, "VQA corpus TSV")->required();
    kg_cmd->add_option("--threshold", kg_threshold, "frequent-relation threshold");
    kg_cmd->add_option("--out", kg_out)->required();

    // index
    auto* index_cmd = app.add_subcommand("index", "verbalize the KG and build the BM25 index");
    FactCorpusArgs index_args;
    add_fact_corpus_flags(index_cmd, index_args);
    double k1 = 1.2, b = 0.75;
    std::string index_out, facts_out;
    index_cmd->add_option("--k1", k1)->check(CLI::NonNegativeNumber);
    index_cmd->add_option("--b", b)->check(CLI::Range(0.0, 1.0));
    index_cmd->add_option("--out", index_out)->required();
    index_cmd->add_option("--facts-out", facts_out, "also dump the fact corpus TSV");

    // retrieve
    auto* retrieve_cmd = app.add_subcommand("retrieve", "run stem BM25 over a dataset");
    std::string ret_index, ret_dataset, ret_stopwords, ret_out;
    std::size_t ret_k = 10;
    retrieve_cmd->add_option("--index", ret_index)->required();
    retrieve_cmd->add_option("--dataset", ret_dataset)->required();
    retrieve_cmd->add_option("--stopwords", ret_stopwords)->required();
    retrieve_cmd->add_option("--k", ret_k)->check(CLI::PositiveNumber);
    retrieve_cmd->add_option("--out", ret_out)->required();

    // contexts
    auto* ctx_cmd = app.add_subcommand("contexts", "assemble reader contexts");
    FactCorpusArgs ctx_args;
    add_fact_corpus_flags(ctx_cmd, ctx_args);
    std::string ctx_retrieval, ctx_dataset, ctx_out;
    std::size_t ctx_budget = 130;
    ctx_cmd->add_option("--retrieval", ctx_retrieval, "retrieval dump JSONL")->required();
    ctx_cmd->add_option("--dataset", ctx_dataset)->required();
    ctx_cmd->add_option("--budget", ctx_budget, "knowledge token budget");
    ctx_cmd->add_option("--out", ctx_out)->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score predictions with EM/Inc/Stem");
    std::string eval_predictions, eval_dataset, eval_stopwords, eval_out;
    eval_cmd->add_option("--predictions", eval_predictions)->required();
    eval_cmd->add_option("--dataset", eval_dataset)->required();
    eval_cmd->add_option("--stopwords", eval_stopwords)->required();
    eval_cmd->add_option("--out", eval_out)->required();

    // recall
    auto* recall_cmd = app.add_subcommand("recall", "Inc-based Recall@K over a retrieval dump");
    FactCorpusArgs recall_args;
    add_fact_corpus_flags(recall_cmd, recall_args);
    std::string recall_retrieval, recall_dataset, recall_ks = "1,5,10", recall_out;
    recall_cmd->add_option("--retrieval", recall_retrieval)->required();
    recall_cmd->add_option("--dataset", recall_dataset)->required();
    recall_cmd->add_option("--ks", recall_ks, "comma-separated K cutoffs");
    recall_cmd->add_option("--out", recall_out)->required();

    // signal
    auto* signal_cmd = app.add_subcommand("signal", "retriever-training signal and KL loss");
    std::string sig_attention, sig_embeddings, sig_layers = "full", sig_agg = "max", sig_out;
    double sig_bias = 0.0;
    signal_cmd->add_option("--attention", sig_attention, "attention record JSON")->required();
    signal_cmd->add_option("--embeddings", sig_embeddings, "embeddings JSONL")->required();
    signal_cmd->add_option("--layers", sig_layers)->check(CLI::IsMember({"full", "half"}));
    signal_cmd->add_option("--agg", sig_agg)->check(CLI::IsMember({"max", "mean", "tophalf"}));
    signal_cmd->add_option("--bias", sig_bias, "score bias for answer-bearing facts");
    signal_cmd->add_option("--out", sig_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*corpus_cmd) {
        auto policy = kgr::StopWordPolicy::load(corpus_stopwords);
        auto dataset = kgr::load_dataset(corpus_dataset);
        auto corpus = kgr::build_vqa_corpus(dataset, policy);
        corpus.save(corpus_out);
        write_manifest("build-corpus", {corpus_dataset, corpus_stopwords},
                       nlohmann::json::object(), corpus_out);
        return 0;
    }

    if (*kg_cmd) {
        auto specs = load_source_specs(kg_sources);
        auto corpus = kgr::VqaCorpus::load(kg_corpus);
        std::vector<kgr::Triple> merged;
        bool had_errors = false;
        std::vector<std::string> input_paths = {kg_sources, kg_corpus};
        for (const auto& spec : specs) {
            auto result = kgr::ingest_source_file(spec);
            for (const auto& err : result.errors) {
                std::cerr << spec.path << ":" << err.line << ": " << err.message << '\n';
                had_errors = true;
            }
            merged.insert(merged.end(), result.triples.begin(), result.triples.end());
            input_paths.push_back(spec.path);
        }
        if (had_errors) return 1;
        auto filtered = kgr::filter_by_corpus(merged, corpus);
        auto stats = kgr::compute_relation_frequencies(filtered, kg_threshold);
        auto deduped = kgr::dedup_frequent_relations(filtered, stats);
        auto snapshot = kgr::kg_stats(std::move(deduped));
        kgr::save_snapshot(snapshot, kg_out);
        write_manifest("build-kg", input_paths, {{"threshold", kg_threshold}}, kg_out);
        std::cerr << "kg: " << snapshot.triple_count << " triples, " << snapshot.entity_count
                  << " entities, " << snapshot.relation_count << " relations\n";
        return 0;
    }

    if (*index_cmd) {
        auto facts = build_facts(index_args);
        auto index = kgr::Bm25Index::build(facts, k1, b);
        index.save(index_out);
        if (!facts_out.empty()) kgr::save_fact_corpus(facts, facts_out);
        write_manifest("index",
                       {index_args.kg_path, index_args.templates_path, index_args.dict_path,
                        index_args.stopwords_path},
                       {{"k1", k1}, {"b", b}}, index_out);
        std::cerr << "index: " << index.fact_count() << " facts, avg_doc_len "
                  << index.avg_doc_len() << '\n';
        return 0;
    }

    if (*retrieve_cmd) {
        auto index = kgr::Bm25Index::load(ret_index);
        auto policy = kgr::StopWordPolicy::load(ret_stopwords);
        auto dataset = kgr::load_dataset(ret_dataset);
        std::ofstream out(ret_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write retrieval dump: " + ret_out);
        for (const auto& ex : dataset) {
            auto v = kgr::image_text(ex.ocr_text, ex.caption);
            auto query = kgr::build_stem_query(ex.question, v, policy);
            auto results = index.retrieve_top_k(query.stems, ret_k);
            out << "{\"query_id\":" << nlohmann::json(ex.example_id).dump() << ",\"ranked\":[";
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (i) out << ',';
                out << '[' << results[i].fact_id << ',' << format_score(results[i].score) << ']';
            }
            out << "]}\n";
        }
        write_manifest("retrieve", {ret_index, ret_dataset, ret_stopwords}, {{"k", ret_k}},
                       ret_out);
        return 0;
    }

    if (*ctx_cmd) {
        auto facts = build_facts(ctx_args);
        std::unordered_map<std::int64_t, const kgr::FactSentence*> by_id;
        for (const auto& f : facts) by_id[f.fact_id] = &f;
        auto dump = kgr::load_retrieval_dump(ctx_retrieval);
        std::unordered_map<std::string, const kgr::RetrievalRow*> rows;
        for (const auto& row : dump) rows[row.example_id] = &row;
        auto dataset = kgr::load_dataset(ctx_dataset);
        std::ofstream out(ctx_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write context dump: " + ctx_out);
        for (const auto& ex : dataset) {
            auto row_it = rows.find(ex.example_id);
            if (row_it == rows.end())
                throw std::runtime_error("retrieval dump has no row for example " +
                                         ex.example_id);
            std::vector<std::string> texts;
            for (const auto& [fact_id, score] : row_it->second->ranked) {
                auto fact_it = by_id.find(fact_id);
                if (fact_it == by_id.end())
                    throw std::runtime_error("retrieval dump references unknown fact_id " +
                                             std::to_string(fact_id));
                texts.push_back(fact_it->second->text);
            }
            auto v = kgr::image_text(ex.ocr_text, ex.caption);
            auto ctx = kgr::assemble_contexts(ex.question, v, texts, ctx_budget);
            nlohmann::json obj = {{"example_id", ex.example_id},
                                  {"background", ctx.background},
                                  {"knowledge", ctx.knowledge},
                                  {"facts_kept", ctx.facts_kept},
                                  {"budget_exhausted", ctx.budget_exhausted}};
            out << obj.dump() << '\n';
        }
        write_manifest("contexts",
                       {ctx_retrieval, ctx_dataset, ctx_args.kg_path, ctx_args.templates_path,
                        ctx_args.dict_path, ctx_args.stopwords_path},
                       {{"budget", ctx_budget}}, ctx_out);
        return 0;
    }

    if (*eval_cmd) {
        auto policy = kgr::StopWordPolicy::load(eval_stopwords);
        auto dataset = kgr::load_dataset(eval_dataset);
        auto predictions = kgr::load_predictions(eval_predictions);
        auto report = kgr::evaluate_answers(predictions, dataset, policy);
        char line[128];
        std::snprintf(line, sizeof(line), "%-8s %8.2f\n%-8s %8.2f\n%-8s %8.2f\n", "EM",
                      report.em_mean, "Inc", report.inc_mean, "Stem", report.stem_mean);
        std::cout << line;
        nlohmann::json obj = {{"em", report.em_mean},
                              {"inc", report.inc_mean},
                              {"stem", report.stem_mean},
                              {"examples", report.per_example.size()}};
        std::ofstream out(eval_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report: " + eval_out);
        out << obj.dump(2) << '\n';
        write_manifest("eval", {eval_predictions, eval_dataset, eval_stopwords},
                       nlohmann::json::object(), eval_out);
        return 0;
    }

    if (*recall_cmd) {
        auto facts = build_facts(recall_args);
        auto policy = kgr::StopWordPolicy::load(recall_args.stopwords_path);
        auto dataset = kgr::load_dataset(recall_dataset);
        auto dump = kgr::load_retrieval_dump(recall_retrieval);
        auto ks = parse_ks(recall_ks);
        auto report = kgr::inc_recall_at_k(dump, dataset, facts, policy, ks);
        nlohmann::json obj;
        for (const auto& [k, recall] : report.recall_at_k) {
            std::cout << "Recall@" << k << " " << format_score(recall) << '\n';
            obj["recall_at_k"][std::to_string(k)] = recall;
        }
        std::ofstream out(recall_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report: " + recall_out);
        out << obj.dump(2) << '\n';
        write_manifest("recall",
                       {recall_retrieval, recall_dataset, recall_args.kg_path,
                        recall_args.templates_path, recall_args.dict_path,
                        recall_args.stopwords_path},
                       {{"ks", recall_ks}}, recall_out);
        return 0;
    }

    if (*signal_cmd) {
        std::ifstream in(sig_attention);
        if (!in) throw std::runtime_error("cannot open attention record: " + sig_attention);
        nlohmann::json record_json;
        in >> record_json;
        kgr::AttentionRecord record;
        record.scores = record_json.at("scores").get<std::vector<std::vector<double>>>();
        kgr::FactSpanMap spans;
        for (const auto& span : record_json.at("spans")) {
            spans.push_back({span.at(0).get<std::int64_t>(), span.at(1).get<std::size_t>(),
                             span.at(2).get<std::size_t>()});
        }
        std::unordered_set<std::int64_t> answer_facts;
        if (record_json.contains("answer_facts")) {
            for (const auto& id : record_json.at("answer_facts"))
                answer_facts.insert(id.get<std::int64_t>());
        }

        kgr::SignalConfig cfg;
        cfg.layer_scope = sig_layers == "half" ? kgr::LayerScope::Half : kgr::LayerScope::Full;
        cfg.token_agg = sig_agg == "mean"      ? kgr::TokenAgg::Mean
                        : sig_agg == "tophalf" ? kgr::TokenAgg::TopHalf
                                               : kgr::TokenAgg::Max;
        cfg.answer_bias = sig_bias;

        auto scores = kgr::aggregate_attention(record, spans, cfg);
        scores = kgr::apply_answer_bias(std::move(scores), answer_facts, sig_bias);
        auto target = kgr::target_distribution(scores);

        std::ifstream emb_in(sig_embeddings);
        if (!emb_in) throw std::runtime_error("cannot open embeddings: " + sig_embeddings);
        std::vector<double> query_emb;
        std::map<std::int64_t, std::vector<double>> fact_embs;
        std::string line;
        while (std::getline(emb_in, line)) {
            if (line.empty()) continue;
            auto obj = nlohmann::json::parse(line);
            if (obj.contains("query")) {
                query_emb = obj.at("query").get<std::vector<double>>();
            } else {
                fact_embs[obj.at("fact_id").get<std::int64_t>()] =
                    obj.at("vector").get<std::vector<double>>();
            }
        }
        if (query_emb.empty())
            throw std::runtime_error("embeddings file has no {\"query\": [...]} row");
        auto retriever = kgr::retriever_distribution(query_emb, fact_embs);
        double kl = kgr::kl_loss(target, retriever);

        nlohmann::json obj;
        obj["kl"] = kl;
        for (const auto& [id, p] : target) obj["per_fact_A"][std::to_string(id)] = p;
        for (const auto& [id, p] : retriever) obj["per_fact_O"][std::to_string(id)] = p;
        std::ofstream out(sig_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write loss: " + sig_out);
        out << obj.dump(2) << '\n';
        std::cout << "kl " << format_score(kl) << '\n';
        write_manifest("signal", {sig_attention, sig_embeddings},
                       {{"layers", sig_layers}, {"agg", sig_agg}, {"bias", sig_bias}}, sig_out);
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
