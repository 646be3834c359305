#include "kgr/kg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace kgr {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

bool entity_matches_corpus(const std::string& entity, const VqaCorpus& corpus) {
    for (const auto& tok : normalize_text(entity)) {
        if (corpus.contains(porter_stem(tok))) return true;
    }
    return false;
}

}  // namespace

std::string normalize_entity(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char raw : text) {
        unsigned char u = static_cast<unsigned char>(raw);
        if (std::isspace(u)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(u)));
    }
    return out;
}

IngestResult ingest_source(const SourceSpec& spec, const std::vector<std::string>& rows) {
    IngestResult result;
    std::size_t lineno = 0;
    for (const auto& raw : rows) {
        ++lineno;
        std::string line = raw;
        while (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;

        auto fields = split_tabs(line);
        if (fields.size() < 3 || fields.size() > 4) {
            result.errors.push_back({lineno, "expected 3 or 4 tab-separated fields, got " +
                                                 std::to_string(fields.size())});
            continue;
        }
        Triple t;
        t.head = trim(fields[0]);
        t.relation = trim(fields[1]);
        t.tail = trim(fields[2]);
        t.source = spec.source;
        if (t.head.empty() || t.relation.empty() || t.tail.empty()) {
            result.errors.push_back({lineno, "empty head/relation/tail"});
            continue;
        }
        if (fields.size() == 4) {
            try {
                std::size_t used = 0;
                double c = std::stod(fields[3], &used);
                if (used != trim(fields[3]).size() && used != fields[3].size())
                    throw std::invalid_argument("trailing garbage");
                if (c < 0.0 || c > 1.0) {
                    result.errors.push_back({lineno, "confidence out of [0,1]: " + fields[3]});
                    continue;
                }
                t.confidence = c;
            } catch (const std::exception&) {
                result.errors.push_back({lineno, "unparsable confidence: " + fields[3]});
                continue;
            }
        } else if (spec.has_confidence) {
            result.errors.push_back({lineno, "missing confidence field"});
            continue;
        }
        if (spec.relation_blocklist.count(t.relation)) continue;
        result.triples.push_back(std::move(t));
    }

    if (spec.max_triples_by_confidence &&
        result.triples.size() > *spec.max_triples_by_confidence) {
        // Rank by descending confidence, ties by input position; survivors
        // keep their input order.
        std::vector<std::size_t> order(result.triples.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double ca = result.triples[a].confidence.value_or(0.0);
            double cb = result.triples[b].confidence.value_or(0.0);
            return ca > cb;
        });
        order.resize(*spec.max_triples_by_confidence);
        std::sort(order.begin(), order.end());
        std::vector<Triple> kept;
        kept.reserve(order.size());
        for (std::size_t i : order) kept.push_back(std::move(result.triples[i]));
        result.triples = std::move(kept);
    }
    return result;
}

IngestResult ingest_source_file(const SourceSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("cannot open triple source: " + spec.path);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(in, line)) rows.push_back(line);
    return ingest_source(spec, rows);
}

RelationStats compute_relation_frequencies(const std::vector<Triple>& triples,
                                           std::size_t threshold) {
    RelationStats stats;
    stats.frequent_threshold = threshold;
    for (const auto& t : triples) ++stats.counts[t.relation];
    return stats;
}

std::vector<Triple> filter_by_corpus(const std::vector<Triple>& triples,
                                     const VqaCorpus& corpus) {
    std::vector<Triple> out;
    for (const auto& t : triples) {
        if (entity_matches_corpus(t.head, corpus) && entity_matches_corpus(t.tail, corpus))
            out.push_back(t);
    }
    return out;
}

std::vector<Triple> dedup_frequent_relations(const std::vector<Triple>& triples,
                                             const RelationStats& stats) {
    // Group indices by normalized (head, tail).
    std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        groups[{normalize_entity(triples[i].head), normalize_entity(triples[i].tail)}]
            .push_back(i);
    }

    std::vector<bool> keep(triples.size(), true);
    for (const auto& [key, members] : groups) {
        if (members.size() < 2) continue;
        bool any_nonfrequent = false;
        for (std::size_t i : members)
            if (!stats.frequent(triples[i].relation)) any_nonfrequent = true;
        if (any_nonfrequent) {
            for (std::size_t i : members)
                if (stats.frequent(triples[i].relation)) keep[i] = false;
        } else {
            // All frequent: keep the least-frequent relation, ties broken
            // by lexicographically smallest relation, then input order.
            std::size_t best = members.front();
            for (std::size_t i : members) {
                auto ci = stats.count(triples[i].relation);
                auto cb = stats.count(triples[best].relation);
                if (ci < cb || (ci == cb && triples[i].relation < triples[best].relation))
                    best = i;
            }
            for (std::size_t i : members) keep[i] = (i == best);
        }
    }

    std::vector<Triple> out;
    for (std::size_t i = 0; i < triples.size(); ++i)
        if (keep[i]) out.push_back(triples[i]);
    return out;
}

KgSnapshot kg_stats(std::vector<Triple> triples) {
    KgSnapshot snap;
    std::unordered_set<std::string> entities;
    std::unordered_set<std::string> relations;
    for (const auto& t : triples) {
        entities.insert(normalize_entity(t.head));
        entities.insert(normalize_entity(t.tail));
        relations.insert(t.relation);
    }
    snap.entity_count = entities.size();
    snap.relation_count = relations.size();
    snap.triple_count = triples.size();
    snap.triples = std::move(triples);
    return snap;
}

void save_snapshot(const KgSnapshot& snapshot, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    for (const auto& t : snapshot.triples) {
        out << t.head << '\t' << t.relation << '\t' << t.tail;
        if (t.confidence) {
            std::ostringstream conf;
            conf << *t.confidence;
            out << '\t' << conf.str();
        }
        out << '\n';
    }
    std::ofstream stats(path + ".stats", std::ios::binary);
    if (!stats) throw std::runtime_error("cannot write snapshot stats: " + path + ".stats");
    stats << "triples=" << snapshot.triple_count << " entities=" << snapshot.entity_count
          << " relations=" << snapshot.relation_count << '\n';
}

KgSnapshot load_snapshot(const std::string& path) {
    SourceSpec spec;
    spec.source = "snapshot";
    spec.path = path;
    auto result = ingest_source_file(spec);
    if (!result.errors.empty()) {
        throw std::runtime_error("snapshot " + path + " has malformed rows, first at line " +
                                 std::to_string(result.errors.front().line) + ": " +
                                 result.errors.front().message);
    }
    return kg_stats(std::move(result.triples));
}

}  // namespace kgr
