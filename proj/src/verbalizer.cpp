#include "kgr/verbalizer.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace kgr {
namespace {

// Split on underscores, hyphens, spaces and lower->upper camel-case
// boundaries; lowercase the result.
std::vector<std::string> coarse_split(const std::string& relation) {
    std::vector<std::string> pieces;
    std::string cur;
    char prev = '\0';
    auto flush = [&] {
        if (!cur.empty()) {
            pieces.push_back(cur);
            cur.clear();
        }
    };
    for (char c : relation) {
        if (c == '_' || c == '-' || c == ' ') {
            flush();
            prev = c;
            continue;
        }
        if (std::isupper(static_cast<unsigned char>(c)) &&
            std::islower(static_cast<unsigned char>(prev))) {
            flush();
        }
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        prev = c;
    }
    flush();
    return pieces;
}

// Longest-prefix-first decomposition into dictionary words, with
// backtracking. Succeeds only when the whole piece is covered.
bool decompose(const std::string& piece, std::size_t at,
               const std::unordered_set<std::string>& dict, std::vector<std::string>& out) {
    if (at == piece.size()) return true;
    for (std::size_t len = piece.size() - at; len >= 1; --len) {
        std::string prefix = piece.substr(at, len);
        if (!dict.count(prefix)) continue;
        out.push_back(std::move(prefix));
        if (decompose(piece, at + len, dict, out)) return true;
        out.pop_back();
    }
    return false;
}

// A fused word either splits fully into dictionary words or stays whole;
// partial matches would otherwise shred unknown words letter by letter.
void greedy_segment(const std::string& piece, const std::unordered_set<std::string>& dict,
                    std::vector<std::string>& out) {
    if (dict.count(piece)) {
        out.push_back(piece);
        return;
    }
    std::vector<std::string> parts;
    if (decompose(piece, 0, dict, parts)) {
        out.insert(out.end(), parts.begin(), parts.end());
    } else {
        out.push_back(piece);
    }
}

std::string replace_slot(std::string pattern, const std::string& slot,
                         const std::string& value) {
    auto pos = pattern.find(slot);
    if (pos == std::string::npos)
        throw std::runtime_error("template pattern missing slot " + slot + ": " + pattern);
    pattern.replace(pos, slot.size(), value);
    if (pattern.find(slot, pos + value.size()) != std::string::npos)
        throw std::runtime_error("template pattern has duplicate slot " + slot);
    return pattern;
}

}  // namespace

std::string Template::render(const std::string& head, const std::string& tail) const {
    return replace_slot(replace_slot(pattern, "{head}", head), "{tail}", tail);
}

std::vector<std::string> segment_relation(const std::string& relation,
                                          const std::unordered_set<std::string>& dictionary) {
    std::vector<std::string> out;
    for (const auto& piece : coarse_split(relation)) greedy_segment(piece, dictionary, out);
    return out;
}

Template auto_template(const std::string& relation,
                       const std::unordered_set<std::string>& dictionary) {
    Template tmpl;
    tmpl.relation = relation;
    tmpl.origin = TemplateOrigin::Auto;
    std::string words;
    for (const auto& piece : segment_relation(relation, dictionary)) {
        if (!words.empty()) words.push_back(' ');
        words += piece;
    }
    tmpl.pattern = "{head} " + words + " {tail}";
    return tmpl;
}

void TemplateRegistry::add_manual(Template tmpl) {
    if (tmpl.pattern.find("{head}") == std::string::npos ||
        tmpl.pattern.find("{tail}") == std::string::npos)
        throw std::runtime_error("manual template for '" + tmpl.relation +
                                 "' must contain {head} and {tail}");
    tmpl.origin = TemplateOrigin::Manual;
    manual_[tmpl.relation] = std::move(tmpl);
}

Template TemplateRegistry::resolve(const std::string& relation) const {
    auto it = manual_.find(relation);
    if (it != manual_.end()) return it->second;
    return auto_template(relation, dictionary_);
}

std::unordered_set<std::string> TemplateRegistry::load_dictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open segmentation dictionary: " + path);
    std::unordered_set<std::string> dict;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        dict.insert(line);
    }
    return dict;
}

TemplateRegistry TemplateRegistry::load(const std::string& templates_path,
                                        const std::string& dictionary_path) {
    TemplateRegistry registry(load_dictionary(dictionary_path));
    std::ifstream in(templates_path);
    if (!in) throw std::runtime_error("cannot open template file: " + templates_path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("template file line " + std::to_string(lineno) +
                                     ": missing tab");
        Template tmpl;
        tmpl.relation = line.substr(0, tab);
        tmpl.pattern = line.substr(tab + 1);
        registry.add_manual(std::move(tmpl));
    }
    return registry;
}

FactSentence verbalize(const Triple& triple, const TemplateRegistry& registry,
                       const StopWordPolicy& policy, std::int64_t fact_id) {
    FactSentence fact;
    fact.fact_id = fact_id;
    fact.triple = triple;
    fact.text = registry.resolve(triple.relation).render(triple.head, triple.tail);
    fact.length = normalize_text(fact.text).size();
    fact.stem_tokens = stems_of(fact.text, policy);
    fact.stems.insert(fact.stem_tokens.begin(), fact.stem_tokens.end());
    return fact;
}

std::vector<FactSentence> build_fact_corpus(const KgSnapshot& kg,
                                            const TemplateRegistry& registry,
                                            const StopWordPolicy& policy) {
    std::vector<FactSentence> corpus;
    corpus.reserve(kg.triples.size());
    std::int64_t next_id = 0;
    for (const auto& triple : kg.triples)
        corpus.push_back(verbalize(triple, registry, policy, next_id++));
    return corpus;
}

void save_fact_corpus(const std::vector<FactSentence>& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write fact corpus: " + path);
    for (const auto& f : corpus) {
        out << f.fact_id << '\t' << f.triple.head << '\t' << f.triple.relation << '\t'
            << f.triple.tail << '\t' << f.text << '\n';
    }
}

}  // namespace kgr
