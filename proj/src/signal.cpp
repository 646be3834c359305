#include "kgr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgr {
namespace {

double pool(std::vector<double> values, TokenAgg agg) {
    switch (agg) {
        case TokenAgg::Max:
            return *std::max_element(values.begin(), values.end());
        case TokenAgg::Mean: {
            double sum = 0.0;
            for (double v : values) sum += v;
            return sum / static_cast<double>(values.size());
        }
        case TokenAgg::TopHalf: {
            std::size_t take = (values.size() + 1) / 2;
            std::partial_sort(values.begin(), values.begin() + take, values.end(),
                              std::greater<double>());
            double sum = 0.0;
            for (std::size_t i = 0; i < take; ++i) sum += values[i];
            return sum / static_cast<double>(take);
        }
    }
    throw std::logic_error("unreachable token aggregation");
}

Distribution softmax(const FactScores& scores) {
    if (scores.empty()) throw std::invalid_argument("softmax over an empty score map");
    double max_score = scores.begin()->second;
    for (const auto& [id, s] : scores) {
        if (!std::isfinite(s)) throw std::invalid_argument("non-finite score for fact");
        max_score = std::max(max_score, s);
    }
    Distribution dist;
    double z = 0.0;
    for (const auto& [id, s] : scores) {
        double e = std::exp(s - max_score);
        dist[id] = e;
        z += e;
    }
    for (auto& [id, p] : dist) p /= z;
    return dist;
}

}  // namespace

FactScores aggregate_attention(const AttentionRecord& rec, const FactSpanMap& spans,
                               const SignalConfig& cfg) {
    if (spans.empty()) throw std::invalid_argument("empty fact span map");
    std::size_t layers = rec.layer_count();
    if (layers == 0) throw std::invalid_argument("attention record has no layers");
    for (const auto& row : rec.scores) {
        if (row.size() != rec.token_count())
            throw std::invalid_argument("ragged attention record");
    }
    for (const auto& span : spans) {
        if (span.start >= span.end || span.end > rec.token_count())
            throw std::invalid_argument("invalid span for fact " + std::to_string(span.fact_id));
    }
    auto sorted = spans;
    std::sort(sorted.begin(), sorted.end(),
              [](const FactSpan& a, const FactSpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start < sorted[i - 1].end)
            throw std::invalid_argument("overlapping fact spans");
    }

    std::size_t first_layer = 0;
    if (cfg.layer_scope == LayerScope::Half) first_layer = layers - (layers + 1) / 2;

    FactScores out;
    for (const auto& span : spans) {
        double layer_sum = 0.0;
        std::size_t layer_n = 0;
        for (std::size_t layer = first_layer; layer < layers; ++layer) {
            std::vector<double> values(rec.scores[layer].begin() + span.start,
                                       rec.scores[layer].begin() + span.end);
            layer_sum += pool(std::move(values), cfg.token_agg);
            ++layer_n;
        }
        out[span.fact_id] = layer_sum / static_cast<double>(layer_n);
    }
    return out;
}

FactScores apply_answer_bias(FactScores scores,
                             const std::unordered_set<std::int64_t>& contains_answer,
                             double bias) {
    for (auto& [id, s] : scores) {
        if (contains_answer.count(id)) s += bias;
    }
    return scores;
}

Distribution target_distribution(const FactScores& scores) { return softmax(scores); }

Distribution retriever_distribution(const std::vector<double>& query_emb,
                                    const std::map<std::int64_t, std::vector<double>>& fact_embs) {
    if (fact_embs.empty()) throw std::invalid_argument("no fact embeddings");
    FactScores dots;
    for (const auto& [id, emb] : fact_embs) {
        if (emb.size() != query_emb.size())
            throw std::invalid_argument("embedding dimension mismatch for fact " +
                                        std::to_string(id));
        double dot = 0.0;
        for (std::size_t i = 0; i < emb.size(); ++i) dot += query_emb[i] * emb[i];
        dots[id] = dot;
    }
    return softmax(dots);
}

double kl_loss(const Distribution& target, const Distribution& retriever) {
    if (target.size() != retriever.size())
        throw std::invalid_argument("distributions cover different fact sets");
    double kl = 0.0;
    for (const auto& [id, a] : target) {
        auto it = retriever.find(id);
        if (it == retriever.end())
            throw std::invalid_argument("distributions cover different fact sets");
        if (a == 0.0) continue;
        if (it->second <= 0.0)
            throw std::domain_error("retriever probability is zero on the target support");
        kl += a * (std::log(a) - std::log(it->second));
    }
    return kl;
}

}  // namespace kgr
