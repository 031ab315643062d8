#include "facetemb/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <unordered_map>

#include "facetemb/errors.hpp"
#include "tsv.hpp"

namespace facetemb {

int Vocab::add(std::string_view item) {
    auto it = index_.find(std::string(item));
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(items_.size());
    items_.emplace_back(item);
    index_.emplace(items_.back(), id);
    return id;
}

std::optional<int> Vocab::find(std::string_view item) const {
    auto it = index_.find(std::string(item));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocab::item(int id) const {
    if (!contains_id(id)) throw InvalidArgument("vocab id out of range: " + std::to_string(id));
    return items_[static_cast<std::size_t>(id)];
}

bool PairSet::insert(int a, int b) {
    if (!keys_.insert(key(a, b)).second) return false;
    pairs_.emplace_back(a, b);
    return true;
}

bool PairSet::contains(int a, int b) const { return keys_.contains(key(a, b)); }

void TrainingCorpus::check_invariants(bool require_pf_coverage) const {
    for (auto [c, p] : cp_pairs.pairs())
        if (!concepts.contains_id(c) || !properties.contains_id(p))
            throw FormatError("cp pair with out-of-range id");
    std::vector<char> has_facet(static_cast<std::size_t>(properties.size()), 0);
    for (auto [p, f] : pf_pairs.pairs()) {
        if (!properties.contains_id(p) || !facets.contains_id(f))
            throw FormatError("pf pair with out-of-range id");
        has_facet[static_cast<std::size_t>(p)] = 1;
    }
    if (require_pf_coverage)
        for (int p = 0; p < properties.size(); ++p)
            if (!has_facet[static_cast<std::size_t>(p)])
                throw FormatError("property without facet: " + properties.item(p));
}

std::vector<std::vector<int>> TrainingCorpus::properties_by_facet() const {
    std::vector<std::vector<int>> by_facet(static_cast<std::size_t>(facets.size()));
    for (auto [p, f] : pf_pairs.pairs()) by_facet[static_cast<std::size_t>(f)].push_back(p);
    return by_facet;
}

LoadStats CorpusBuilder::load_pair_file(const std::string& path, PairFileFormat format) {
    LoadStats stats;
    const std::size_t cols = format == PairFileFormat::labeled_tsv ? 3 : 2;
    stats.lines_read = detail::for_each_tsv_line(path, cols, [&](std::size_t line_no, const std::vector<std::string>& f) {
        switch (format) {
            case PairFileFormat::cp_tsv:
                stats.pairs_kept += add_cp(f[0], f[1]) ? 1 : 0;
                break;
            case PairFileFormat::pf_tsv:
                stats.pairs_kept += add_pf(f[0], f[1]) ? 1 : 0;
                break;
            case PairFileFormat::labeled_tsv: {
                if (f[2] != "0" && f[2] != "1")
                    throw FormatError(path + ":" + std::to_string(line_no) + ": label must be 0 or 1, got '" + f[2] + "'");
                int c = corpus_.concepts.add(f[0]);
                int p = corpus_.properties.add(f[1]);
                bool label = f[2] == "1";
                std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c)) << 33) |
                                    (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p)) << 1) |
                                    (label ? 1 : 0);
                if (labeled_seen_.contains(key ^ 1))
                    throw FormatError(path + ":" + std::to_string(line_no) + ": contradictory label for (" + f[0] + ", " + f[1] + ")");
                if (labeled_seen_.insert(key).second) {
                    labeled_.push_back({c, p, label});
                    ++stats.pairs_kept;
                }
                break;
            }
        }
    });
    return stats;
}

int CorpusBuilder::add_cp(std::string_view concept_name, std::string_view property) {
    int c = corpus_.concepts.add(concept_name);
    int p = corpus_.properties.add(property);
    return corpus_.cp_pairs.insert(c, p) ? 1 : 0;
}

int CorpusBuilder::add_pf(std::string_view property, std::string_view facet) {
    int p = corpus_.properties.add(property);
    int f = corpus_.facets.add(facet);
    return corpus_.pf_pairs.insert(p, f) ? 1 : 0;
}

const std::set<std::string>& default_conceptnet_relations() {
    static const std::set<std::string> kRelations = {
        "RelatedTo", "FormOf",      "IsA",  "UsedFor",    "AtLocation",
        "CapableOf", "HasProperty", "HasA", "InstanceOf", "MadeOf",
    };
    return kRelations;
}

std::string humanize_relation(std::string_view relation) {
    if (relation.starts_with("/r/")) relation.remove_prefix(3);
    std::string out;
    for (char ch : relation) {
        if (std::isupper(static_cast<unsigned char>(ch))) {
            if (!out.empty()) out.push_back(' ');
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else {
            out.push_back(ch);
        }
    }
    return out;
}

namespace {

std::string strip_relation(const std::string& relation) {
    return relation.starts_with("/r/") ? relation.substr(3) : relation;
}

}  // namespace

TrainingCorpus ingest_conceptnet(const std::vector<Triple>& triples, const IngestOptions& options) {
    if (options.min_tail_count < 1) throw InvalidArgument("min_tail_count must be >= 1");

    std::vector<const Triple*> filtered;
    filtered.reserve(triples.size());
    std::unordered_map<std::string, int> tail_count;
    for (const Triple& t : triples) {
        if (!options.allowed_relations.contains(strip_relation(t.relation))) continue;
        filtered.push_back(&t);
        ++tail_count[t.tail];
    }

    CorpusBuilder builder;
    for (const Triple* t : filtered) {
        if (tail_count[t->tail] < options.min_tail_count) continue;
        std::string facet = humanize_relation(t->relation);
        std::string property = facet + " " + t->tail;
        builder.add_cp(t->head, property);
        builder.add_pf(property, facet);
    }
    TrainingCorpus corpus = builder.build();
    if (corpus.cp_pairs.empty())
        throw FormatError("no pairs survive relation and tail-count filtering");
    return corpus;
}

namespace {

// "/c/en/baseball_bat/n" -> "baseball bat"; empty if not an English concept URI.
std::string english_term(const std::string& uri) {
    if (!uri.starts_with("/c/en/")) return {};
    std::string term = uri.substr(6);
    if (std::size_t slash = term.find('/'); slash != std::string::npos) term.resize(slash);
    std::replace(term.begin(), term.end(), '_', ' ');
    return term;
}

}  // namespace

std::vector<Triple> read_conceptnet_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<Triple> triples;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f = detail::split_tabs(line);
        if (f.size() >= 5 && f[1].starts_with("/r/")) {
            // Assertion dump: uri, relation, start, end, metadata. English only.
            std::string head = english_term(f[2]);
            std::string tail = english_term(f[3]);
            if (head.empty() || tail.empty()) continue;
            triples.push_back({head, strip_relation(f[1]), tail});
        } else if (f.size() == 3) {
            triples.push_back({f[0], strip_relation(f[1]), f[2]});
        } else {
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected a 5-column ConceptNet assertion or a 3-column triple");
        }
    }
    if (triples.empty()) throw FormatError(path + ": no triples");
    return triples;
}

std::vector<CpPair> sample_negatives(const TrainingCorpus& corpus, const std::vector<CpPair>& batch,
                                     int n_neg, Rng& rng) {
    if (n_neg < 1) throw InvalidArgument("n_neg must be >= 1");
    const int n_props = corpus.properties.size();
    if (n_props <= n_neg)
        throw InvalidArgument("corpus must have more than n_neg properties");

    std::vector<CpPair> negatives;
    negatives.reserve(batch.size() * static_cast<std::size_t>(n_neg));
    const int max_attempts = 50 * n_props;
    std::set<int> used;
    for (auto [c, p] : batch) {
        used.clear();
        for (int k = 0; k < n_neg; ++k) {
            int chosen = -1;
            for (int attempt = 0; attempt < max_attempts; ++attempt) {
                int cand = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n_props)));
                if (cand == p || used.contains(cand) || corpus.cp_pairs.contains(c, cand)) continue;
                chosen = cand;
                break;
            }
            if (chosen < 0)
                throw NumericalError("cannot sample " + std::to_string(n_neg) +
                                     " distinct negative properties for concept '" +
                                     corpus.concepts.item(c) + "'");
            used.insert(chosen);
            negatives.emplace_back(c, chosen);
        }
    }
    return negatives;
}

namespace {

// Shuffled ids chopped into `folds` contiguous chunks (sizes differ by at most one).
std::vector<std::vector<int>> fold_chunks(std::vector<int> ids, int folds, Rng& rng) {
    rng.shuffle(ids);
    std::vector<std::vector<int>> chunks(static_cast<std::size_t>(folds));
    const std::size_t n = ids.size();
    std::size_t start = 0;
    for (int f = 0; f < folds; ++f) {
        std::size_t size = n / static_cast<std::size_t>(folds) +
                           (static_cast<std::size_t>(f) < n % static_cast<std::size_t>(folds) ? 1 : 0);
        chunks[static_cast<std::size_t>(f)].assign(ids.begin() + static_cast<std::ptrdiff_t>(start),
                                                   ids.begin() + static_cast<std::ptrdiff_t>(start + size));
        start += size;
    }
    return chunks;
}

std::vector<int> distinct_ids(const std::vector<LabeledPair>& labeled, bool concepts) {
    std::set<int> s;
    for (const LabeledPair& lp : labeled) s.insert(concepts ? lp.concept_id : lp.property_id);
    return {s.begin(), s.end()};
}

// Moves validation_fraction of train (selected with the split seed) into validation.
void carve_validation(SplitPartition& part, double fraction, Rng& rng) {
    std::vector<std::size_t> order(part.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(fraction * static_cast<double>(part.train.size()));
    std::vector<char> is_val(part.train.size(), 0);
    for (std::size_t i = 0; i < n_val; ++i) is_val[order[i]] = 1;
    std::vector<LabeledPair> train, val;
    for (std::size_t i = 0; i < part.train.size(); ++i)
        (is_val[i] ? val : train).push_back(part.train[i]);
    part.train = std::move(train);
    part.validation = std::move(val);
}

}  // namespace

std::vector<SplitPartition> make_splits(const TrainingCorpus& corpus,
                                        const std::vector<LabeledPair>& labeled,
                                        const SplitSpec& spec) {
    for (const LabeledPair& lp : labeled)
        if (!corpus.concepts.contains_id(lp.concept_id) || !corpus.properties.contains_id(lp.property_id))
            throw InvalidArgument("labeled pair references unknown corpus id");

    Rng rng(splitmix64(spec.seed ^ 0xf01d5eedULL));
    std::vector<SplitPartition> parts;

    auto partition_by = [&](const std::vector<std::vector<int>>& chunks, bool by_concept) {
        for (const std::vector<int>& test_ids : chunks) {
            std::set<int> test_set(test_ids.begin(), test_ids.end());
            SplitPartition part;
            for (const LabeledPair& lp : labeled) {
                int id = by_concept ? lp.concept_id : lp.property_id;
                (test_set.contains(id) ? part.test : part.train).push_back(lp);
            }
            carve_validation(part, spec.validation_fraction, rng);
            parts.push_back(std::move(part));
        }
    };

    switch (spec.mode) {
        case SplitMode::concepts: {
            if (spec.folds == 1) {
                if (spec.fixed_test_concepts.empty())
                    throw InvalidArgument("concept split with folds=1 requires a fixed test concept list");
                partition_by({spec.fixed_test_concepts}, true);
            } else {
                std::vector<int> ids = distinct_ids(labeled, true);
                if (static_cast<int>(ids.size()) < spec.folds)
                    throw InvalidArgument("fewer distinct concepts than folds");
                partition_by(fold_chunks(std::move(ids), spec.folds, rng), true);
            }
            break;
        }
        case SplitMode::properties: {
            if (spec.folds < 2) throw InvalidArgument("property split requires folds >= 2");
            std::vector<int> ids = distinct_ids(labeled, false);
            if (static_cast<int>(ids.size()) < spec.folds)
                throw InvalidArgument("fewer distinct properties than folds");
            partition_by(fold_chunks(std::move(ids), spec.folds, rng), false);
            break;
        }
        case SplitMode::concept_plus_property: {
            if (spec.folds < 2) throw InvalidArgument("C+P split requires folds >= 2");
            std::vector<int> cids = distinct_ids(labeled, true);
            std::vector<int> pids = distinct_ids(labeled, false);
            if (static_cast<int>(cids.size()) < spec.folds || static_cast<int>(pids.size()) < spec.folds)
                throw InvalidArgument("fewer distinct concepts or properties than folds");
            auto c_chunks = fold_chunks(std::move(cids), spec.folds, rng);
            auto p_chunks = fold_chunks(std::move(pids), spec.folds, rng);
            for (const std::vector<int>& tc : c_chunks) {
                std::set<int> c_test(tc.begin(), tc.end());
                for (const std::vector<int>& tp : p_chunks) {
                    std::set<int> p_test(tp.begin(), tp.end());
                    SplitPartition part;
                    for (const LabeledPair& lp : labeled) {
                        bool c_in = c_test.contains(lp.concept_id);
                        bool p_in = p_test.contains(lp.property_id);
                        if (c_in && p_in)
                            part.test.push_back(lp);
                        else if (!c_in && !p_in)
                            part.train.push_back(lp);
                        // pairs straddling the grid cell are dropped
                    }
                    carve_validation(part, spec.validation_fraction, rng);
                    parts.push_back(std::move(part));
                }
            }
            break;
        }
    }
    return parts;
}

void write_cp_tsv(const TrainingCorpus& corpus, std::ostream& out) {
    for (auto [c, p] : corpus.cp_pairs.pairs())
        out << corpus.concepts.item(c) << '\t' << corpus.properties.item(p) << '\n';
}

void write_pf_tsv(const TrainingCorpus& corpus, std::ostream& out) {
    for (auto [p, f] : corpus.pf_pairs.pairs())
        out << corpus.properties.item(p) << '\t' << corpus.facets.item(f) << '\n';
}

void write_labeled_tsv(const TrainingCorpus& corpus, const std::vector<LabeledPair>& labeled,
                       std::ostream& out) {
    for (const LabeledPair& lp : labeled)
        out << corpus.concepts.item(lp.concept_id) << '\t' << corpus.properties.item(lp.property_id)
            << '\t' << (lp.label ? '1' : '0') << '\n';
}

}  // namespace facetemb
