#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgr/kg.hpp"
#include "kgr/stemming.hpp"

namespace kgr {

enum class TemplateOrigin { Manual, Auto };

/// Cloze template with one {head} and one {tail} slot.
struct Template {
    std::string relation;
    std::string pattern;
    TemplateOrigin origin = TemplateOrigin::Manual;

    std::string render(const std::string& head, const std::string& tail) const;
};

/// Verbalized triple: the unit of indexing and retrieval.
struct FactSentence {
    std::int64_t fact_id = 0;
    Triple triple;
    std::string text;
    std::vector<std::string> stem_tokens;        // ordered, duplicates kept
    std::unordered_set<std::string> stems;       // set view of stem_tokens
    std::size_t length = 0;                      // normalized token count of text
};

/// Splits a relation name into word pieces: underscores, hyphens and
/// camel-case boundaries first, then greedy longest-match against the
/// dictionary; unmatched residue is kept as-is.
std::vector<std::string> segment_relation(const std::string& relation,
                                          const std::unordered_set<std::string>& dictionary);

Template auto_template(const std::string& relation,
                       const std::unordered_set<std::string>& dictionary);

/// Manual templates shadow auto-generated ones; lookup is total.
class TemplateRegistry {
  public:
    TemplateRegistry() = default;
    explicit TemplateRegistry(std::unordered_set<std::string> dictionary)
        : dictionary_(std::move(dictionary)) {}

    void add_manual(Template tmpl);
    Template resolve(const std::string& relation) const;

    /// Template file: TSV `relation<TAB>pattern`.
    static TemplateRegistry load(const std::string& templates_path,
                                 const std::string& dictionary_path);
    static std::unordered_set<std::string> load_dictionary(const std::string& path);

  private:
    std::unordered_set<std::string> dictionary_;
    std::unordered_map<std::string, Template> manual_;
};

FactSentence verbalize(const Triple& triple, const TemplateRegistry& registry,
                       const StopWordPolicy& policy, std::int64_t fact_id);

std::vector<FactSentence> build_fact_corpus(const KgSnapshot& kg,
                                            const TemplateRegistry& registry,
                                            const StopWordPolicy& policy);

/// Fact corpus file: TSV `fact_id<TAB>head<TAB>relation<TAB>tail<TAB>text`.
void save_fact_corpus(const std::vector<FactSentence>& corpus, const std::string& path);

}  // namespace kgr
