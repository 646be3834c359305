#include "kgr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace kgr {
namespace {

constexpr char kMagic[8] = {'K', 'G', 'R', 'B', 'M', '2', '5', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("index file truncated");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    auto len = read_raw<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("index file truncated");
    return s;
}

}  // namespace

Bm25Index Bm25Index::build(const std::vector<FactSentence>& corpus, double k1, double b) {
    if (k1 < 0.0) throw std::invalid_argument("k1 must be >= 0");
    if (b < 0.0 || b > 1.0) throw std::invalid_argument("b must be in [0,1]");
    Bm25Index index;
    index.k1_ = k1;
    index.b_ = b;

    std::uint64_t total_len = 0;
    for (const auto& fact : corpus) {
        if (index.doc_len_.count(fact.fact_id))
            throw std::runtime_error("duplicate fact_id " + std::to_string(fact.fact_id));
        index.doc_len_[fact.fact_id] = static_cast<std::uint32_t>(fact.stem_tokens.size());
        total_len += fact.stem_tokens.size();

        std::map<std::string, std::uint32_t> tf;
        for (const auto& stem : fact.stem_tokens) ++tf[stem];
        for (const auto& [stem, freq] : tf)
            index.postings_[stem].push_back({fact.fact_id, freq});
    }
    index.avg_doc_len_ =
        corpus.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(corpus.size());
    for (auto& [stem, list] : index.postings_) {
        std::sort(list.begin(), list.end(),
                  [](const Posting& a, const Posting& b) { return a.fact_id < b.fact_id; });
    }
    return index;
}

std::size_t Bm25Index::doc_freq(const std::string& stem) const {
    auto it = postings_.find(stem);
    return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(const std::string& stem) const {
    std::size_t n_total = fact_count();
    if (n_total == 0) throw std::runtime_error("idf undefined on an empty index");
    double n = static_cast<double>(doc_freq(stem));
    double big_n = static_cast<double>(n_total);
    return idf_scale_ * std::log((big_n - n + 0.5) / (n + 0.5));
}

std::uint32_t Bm25Index::tf(const std::string& stem, std::int64_t fact_id) const {
    auto it = postings_.find(stem);
    if (it == postings_.end()) return 0;
    auto pos = std::lower_bound(it->second.begin(), it->second.end(), fact_id,
                                [](const Posting& p, std::int64_t id) { return p.fact_id < id; });
    if (pos == it->second.end() || pos->fact_id != fact_id) return 0;
    return pos->term_frequency;
}

double Bm25Index::term_score(const std::string& stem, std::int64_t fact_id) const {
    auto len_it = doc_len_.find(fact_id);
    if (len_it == doc_len_.end())
        throw std::runtime_error("unknown fact_id " + std::to_string(fact_id));
    double f = static_cast<double>(tf(stem, fact_id));
    if (f == 0.0) return 0.0;
    double len_norm = 1.0 - b_ + b_ * static_cast<double>(len_it->second) / avg_doc_len_;
    return f * (k1_ + 1.0) / (f + k1_ * len_norm);
}

double Bm25Index::score(const std::vector<std::string>& query, std::int64_t fact_id) const {
    double total = 0.0;
    for (const auto& stem : query) total += idf(stem) * term_score(stem, fact_id);
    return total;
}

std::vector<RetrievalResult> Bm25Index::retrieve_top_k(const std::vector<std::string>& query,
                                                       std::size_t k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    // Accumulate per-fact sums in query-occurrence order so the result is
    // bit-identical to a per-fact left-to-right summation.
    std::unordered_map<std::int64_t, double> accum;
    for (const auto& stem : query) {
        auto it = postings_.find(stem);
        if (it == postings_.end()) continue;
        double w = idf(stem);
        for (const auto& posting : it->second)
            accum[posting.fact_id] += w * term_score(stem, posting.fact_id);
    }

    std::vector<RetrievalResult> results;
    results.reserve(doc_len_.size());
    for (const auto& [fact_id, len] : doc_len_) {
        auto it = accum.find(fact_id);
        results.push_back({fact_id, it == accum.end() ? 0.0 : it->second, 0});
    }
    std::sort(results.begin(), results.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.fact_id < b.fact_id;
    });
    if (results.size() > k) results.resize(k);
    for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
    return results;
}

void Bm25Index::set_idf_scale(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("idf scale must be positive");
    idf_scale_ = scale;
}

void Bm25Index::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, kVersion);
    write_raw(out, k1_);
    write_raw(out, b_);
    write_raw(out, idf_scale_);
    write_raw(out, avg_doc_len_);

    std::vector<std::pair<std::int64_t, std::uint32_t>> lens(doc_len_.begin(), doc_len_.end());
    std::sort(lens.begin(), lens.end());
    write_raw(out, static_cast<std::uint64_t>(lens.size()));
    for (const auto& [id, len] : lens) {
        write_raw(out, id);
        write_raw(out, len);
    }

    std::vector<std::string> stems;
    stems.reserve(postings_.size());
    for (const auto& [stem, list] : postings_) stems.push_back(stem);
    std::sort(stems.begin(), stems.end());
    write_raw(out, static_cast<std::uint64_t>(stems.size()));
    for (const auto& stem : stems) {
        write_string(out, stem);
        const auto& list = postings_.at(stem);
        write_raw(out, static_cast<std::uint64_t>(list.size()));
        for (const auto& posting : list) {
            write_raw(out, posting.fact_id);
            write_raw(out, posting.term_frequency);
        }
    }
    if (!out) throw std::runtime_error("write failure on index: " + path);
}

Bm25Index Bm25Index::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a bm25 index file (bad magic): " + path);
    auto version = read_raw<std::uint32_t>(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported index version " + std::to_string(version));

    Bm25Index index;
    index.k1_ = read_raw<double>(in);
    index.b_ = read_raw<double>(in);
    index.idf_scale_ = read_raw<double>(in);
    index.avg_doc_len_ = read_raw<double>(in);

    auto doc_count = read_raw<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < doc_count; ++i) {
        auto id = read_raw<std::int64_t>(in);
        auto len = read_raw<std::uint32_t>(in);
        index.doc_len_[id] = len;
    }
    auto stem_count = read_raw<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < stem_count; ++i) {
        auto stem = read_string(in);
        auto list_len = read_raw<std::uint64_t>(in);
        auto& list = index.postings_[stem];
        list.reserve(list_len);
        for (std::uint64_t p = 0; p < list_len; ++p) {
            auto id = read_raw<std::int64_t>(in);
            auto freq = read_raw<std::uint32_t>(in);
            list.push_back({id, freq});
        }
    }
    return index;
}

}  // namespace kgr
