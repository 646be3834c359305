#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgr/stemming.hpp"

namespace kgr {

/// One knowledge-graph fact.
struct Triple {
    std::string head;
    std::string relation;
    std::string tail;
    std::string source;
    std::optional<double> confidence;

    bool operator==(const Triple&) const = default;
};

/// Per-source ingestion rules.
struct SourceSpec {
    std::string source;
    std::string path;
    bool has_confidence = false;
    std::optional<std::size_t> max_triples_by_confidence;
    std::unordered_set<std::string> relation_blocklist;
};

struct RowError {
    std::size_t line;
    std::string message;
};

struct IngestResult {
    std::vector<Triple> triples;
    std::vector<RowError> errors;
};

struct RelationStats {
    std::unordered_map<std::string, std::size_t> counts;
    std::size_t frequent_threshold = 10000;

    std::size_t count(const std::string& relation) const {
        auto it = counts.find(relation);
        return it == counts.end() ? 0 : it->second;
    }
    bool frequent(const std::string& relation) const {
        return count(relation) > frequent_threshold;
    }
};

struct KgSnapshot {
    std::vector<Triple> triples;
    std::size_t entity_count = 0;
    std::size_t relation_count = 0;
    std::size_t triple_count = 0;
};

/// Canonical entity form for grouping and counting: lowercase with
/// collapsed whitespace.
std::string normalize_entity(std::string_view text);

/// Parses TSV rows `head<TAB>relation<TAB>tail[<TAB>confidence]`, drops
/// blocklisted relations and, when configured, keeps only the top-N rows
/// by descending confidence (ties by input order). Survivors stay in
/// input order. Malformed rows are collected, not fatal.
IngestResult ingest_source(const SourceSpec& spec, const std::vector<std::string>& rows);

/// Convenience: read the rows from spec.path (skipping '#' comments is
/// handled by ingest_source itself).
IngestResult ingest_source_file(const SourceSpec& spec);

RelationStats compute_relation_frequencies(const std::vector<Triple>& triples,
                                           std::size_t threshold);

/// Keeps a triple iff both its head and its tail share at least one stem
/// with the VQA corpus. Relation text is not consulted.
std::vector<Triple> filter_by_corpus(const std::vector<Triple>& triples,
                                     const VqaCorpus& corpus);

/// Within each (head, tail) group of size >= 2, removes triples whose
/// relation is frequent as long as a non-frequent one survives. If the
/// whole group is frequent, the relation with the lowest count (then
/// lexicographically smallest) is kept.
std::vector<Triple> dedup_frequent_relations(const std::vector<Triple>& triples,
                                             const RelationStats& stats);

KgSnapshot kg_stats(std::vector<Triple> triples);

/// Snapshot TSV plus a `<path>.stats` sidecar
/// (`triples=N entities=E relations=R`).
void save_snapshot(const KgSnapshot& snapshot, const std::string& path);
KgSnapshot load_snapshot(const std::string& path);

}  // namespace kgr
