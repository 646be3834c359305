#pragma once

#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kgr {

/// Porter (1980) stem of a lowercase alphabetic token.
/// Tokens containing non-alphabetic characters are returned unchanged,
/// as are tokens of length <= 2 (matching the reference implementation).
std::string porter_stem(std::string_view word);

/// Lowercases, maps punctuation to spaces, splits letter/digit boundaries
/// so digits form standalone tokens, and splits on whitespace.
std::vector<std::string> normalize_text(std::string_view text);

/// Stop words to drop plus an exemption list that always survives.
struct StopWordPolicy {
    std::unordered_set<std::string> stop_set;
    std::unordered_set<std::string> keep_set;

    bool is_stopped(const std::string& word) const {
        return stop_set.count(word) > 0 && keep_set.count(word) == 0;
    }

    /// Plain-text format: one word per line, '+' prefix marks keep_set
    /// entries, '#' lines are comments.
    static StopWordPolicy load(const std::string& path);
    void save(const std::string& path) const;
};

/// Normalize, drop stop words, stem each survivor. Order and duplicates
/// are preserved.
std::vector<std::string> stems_of(std::string_view text, const StopWordPolicy& policy);

/// Stem -> frequency lexicon built from a VQA dataset.
struct VqaCorpus {
    std::map<std::string, std::size_t> counts;

    bool contains(const std::string& stem) const { return counts.count(stem) > 0; }
    bool empty() const { return counts.empty(); }

    void add(const std::vector<std::string>& stems) {
        for (const auto& s : stems) ++counts[s];
    }
    void merge(const VqaCorpus& other) {
        for (const auto& [s, c] : other.counts) counts[s] += c;
    }

    /// TSV `stem<TAB>frequency`, descending frequency then lexicographic.
    static VqaCorpus load(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace kgr
