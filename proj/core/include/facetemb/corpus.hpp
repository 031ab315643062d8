#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "facetemb/rng.hpp"

namespace facetemb {

/// Interned string set with dense ids in first-occurrence order.
class Vocab {
public:
    /// Get-or-insert; returns the id.
    int add(std::string_view item);

    std::optional<int> find(std::string_view item) const;
    const std::string& item(int id) const;
    int size() const { return static_cast<int>(items_.size()); }
    const std::vector<std::string>& items() const { return items_; }
    bool contains_id(int id) const { return id >= 0 && id < size(); }

private:
    std::vector<std::string> items_;
    std::unordered_map<std::string, int> index_;
};

/// Ordered set of (a, b) id pairs with O(1) membership.
class PairSet {
public:
    /// Returns false if the pair was already present.
    bool insert(int a, int b);
    bool contains(int a, int b) const;
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }
    const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

private:
    static std::uint64_t key(int a, int b) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }
    std::vector<std::pair<int, int>> pairs_;
    std::unordered_set<std::uint64_t> keys_;
};

struct TrainingCorpus {
    Vocab concepts;
    Vocab properties;
    Vocab facets;
    PairSet cp_pairs;  // (concept_id, property_id)
    PairSet pf_pairs;  // (property_id, facet_id)

    /// Checks id validity of all pairs; with require_pf_coverage also checks
    /// that every property is mapped to at least one facet. Throws FormatError.
    void check_invariants(bool require_pf_coverage = false) const;

    /// Property ids grouped by facet id (index = facet id).
    std::vector<std::vector<int>> properties_by_facet() const;
};

enum class SplitMode { concepts, properties, concept_plus_property };

struct SplitSpec {
    SplitMode mode = SplitMode::properties;
    int folds = 5;
    std::uint64_t seed = 0;
    /// Concept mode with folds == 1: use exactly this test concept set.
    std::vector<int> fixed_test_concepts;
    double validation_fraction = 0.2;
};

struct LabeledPair {
    int concept_id = 0;
    int property_id = 0;
    bool label = false;

    bool operator==(const LabeledPair&) const = default;
};

struct SplitPartition {
    std::vector<LabeledPair> train;
    std::vector<LabeledPair> validation;
    std::vector<LabeledPair> test;
};

enum class PairFileFormat { cp_tsv, pf_tsv, labeled_tsv };

struct LoadStats {
    std::size_t lines_read = 0;
    std::size_t pairs_kept = 0;
};

/// Incrementally merges pair files into one vocabulary universe.
class CorpusBuilder {
public:
    LoadStats load_pair_file(const std::string& path, PairFileFormat format);

    int add_cp(std::string_view concept_name, std::string_view property);
    int add_pf(std::string_view property, std::string_view facet);

    const std::vector<LabeledPair>& labeled() const { return labeled_; }
    TrainingCorpus build() const { return corpus_; }

private:
    TrainingCorpus corpus_;
    std::vector<LabeledPair> labeled_;
    std::unordered_set<std::uint64_t> labeled_seen_;
};

struct Triple {
    std::string head;
    std::string relation;  // "AtLocation" or "/r/AtLocation"
    std::string tail;
};

/// The relations treated as facets when ingesting ConceptNet.
const std::set<std::string>& default_conceptnet_relations();

/// "AtLocation" -> "at location".
std::string humanize_relation(std::string_view relation);

struct IngestOptions {
    std::set<std::string> allowed_relations = default_conceptnet_relations();
    int min_tail_count = 10;
};

/// Turns (head, relation, tail) triples into cp pairs (head, "relation tail")
/// and pf pairs ("relation tail", relation). Tail occurrences are counted over
/// the relation-filtered stream before any pair is created; tails below
/// min_tail_count produce nothing.
TrainingCorpus ingest_conceptnet(const std::vector<Triple>& triples, const IngestOptions& options = {});

/// Reads either the 5-column ConceptNet 5 assertion dump (keeping triples
/// whose start and end are both /c/en/) or a plain 3-column
/// head<TAB>relation<TAB>tail file.
std::vector<Triple> read_conceptnet_file(const std::string& path);

using CpPair = std::pair<int, int>;

/// For each positive (c, p) draws n_neg distinct properties p' uniformly with
/// p' != p and (c, p') not in D_cp. Throws NumericalError naming the concept
/// when n_neg valid negatives cannot be found.
std::vector<CpPair> sample_negatives(const TrainingCorpus& corpus, const std::vector<CpPair>& batch,
                                     int n_neg, Rng& rng);

std::vector<SplitPartition> make_splits(const TrainingCorpus& corpus,
                                        const std::vector<LabeledPair>& labeled,
                                        const SplitSpec& spec);

/// Writes pairs back out in normalized TSV form.
void write_cp_tsv(const TrainingCorpus& corpus, std::ostream& out);
void write_pf_tsv(const TrainingCorpus& corpus, std::ostream& out);
void write_labeled_tsv(const TrainingCorpus& corpus, const std::vector<LabeledPair>& labeled,
                       std::ostream& out);

}  // namespace facetemb
