#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

namespace kgr {

/// Cross-attention of the first decoded token onto the encoder tokens,
/// pre-averaged over heads, one row per layer.
struct AttentionRecord {
    std::vector<std::vector<double>> scores;  // [layer][token]

    std::size_t layer_count() const { return scores.size(); }
    std::size_t token_count() const { return scores.empty() ? 0 : scores.front().size(); }
};

/// Half-open [start, end) token spans, one per fact.
struct FactSpan {
    std::int64_t fact_id;
    std::size_t start;
    std::size_t end;
};

using FactSpanMap = std::vector<FactSpan>;

enum class LayerScope { Full, Half };
enum class TokenAgg { Max, Mean, TopHalf };

struct SignalConfig {
    LayerScope layer_scope = LayerScope::Full;
    TokenAgg token_agg = TokenAgg::Max;
    double answer_bias = 0.0;
};

using FactScores = std::map<std::int64_t, double>;

/// Probabilities over fact ids; sums to 1.
using Distribution = std::map<std::int64_t, double>;

/// Pools the span's token scores per selected layer (full = all layers,
/// half = the last ceil(L/2)), then averages across layers. TopHalf takes
/// the mean of the largest ceil(m/2) values.
FactScores aggregate_attention(const AttentionRecord& rec, const FactSpanMap& spans,
                               const SignalConfig& cfg);

FactScores apply_answer_bias(FactScores scores,
                             const std::unordered_set<std::int64_t>& contains_answer,
                             double bias);

/// Softmax over the attention scores.
Distribution target_distribution(const FactScores& scores);

/// Softmax over query/fact embedding dot products.
Distribution retriever_distribution(const std::vector<double>& query_emb,
                                    const std::map<std::int64_t, std::vector<double>>& fact_embs);

/// KL(A || O) = sum_f A_f (ln A_f - ln O_f); zero-probability A terms
/// contribute nothing.
double kl_loss(const Distribution& target, const Distribution& retriever);

}  // namespace kgr
