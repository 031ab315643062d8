#pragma once

#include <set>
#include <string>
#include <vector>

#include "facetemb/corpus.hpp"

namespace facetemb {

/// Concept -> property assertions merged from several TSV sources, plus the
/// manual taxonomic group file used to pick outlier-benchmark positives.
class PropertyDB {
public:
    /// TSV concept<TAB>property; repeat for every source to merge.
    void add_pairs_file(const std::string& path);

    /// TSV property<TAB>group_index<TAB>concept. Group members must hold the
    /// property in the merged DB.
    void load_groups_file(const std::string& path);

    void add_pair(std::string_view concept_name, std::string_view property);
    void add_group_member(std::string_view property, int group_index, std::string_view concept_name);

    int n_concepts() const { return concepts_.size(); }
    const Vocab& concepts() const { return concepts_; }
    const Vocab& properties() const { return properties_; }

    bool has_property(int concept_id, int property_id) const;
    bool share_any_property(int c1, int c2) const;
    const std::set<int>& properties_of(int concept_id) const { return props_of_[static_cast<std::size_t>(concept_id)]; }

    /// Groups of concept ids for a property; empty when no group data exists.
    const std::vector<std::vector<int>>& groups_of(int property_id) const;
    std::vector<std::string> properties_with_groups() const;

    void validate_groups() const;

private:
    Vocab concepts_;
    Vocab properties_;
    std::vector<std::set<int>> props_of_;
    std::vector<std::vector<std::vector<int>>> groups_;  // property id -> groups
    static const std::vector<std::vector<int>> kNoGroups;
};

}  // namespace facetemb
