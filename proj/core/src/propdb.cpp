#include "facetemb/propdb.hpp"

#include <algorithm>

#include "facetemb/errors.hpp"
#include "tsv.hpp"

namespace facetemb {

const std::vector<std::vector<int>> PropertyDB::kNoGroups;

void PropertyDB::add_pairs_file(const std::string& path) {
    detail::for_each_tsv_line(path, 2, [&](std::size_t, const std::vector<std::string>& f) {
        add_pair(f[0], f[1]);
    });
}

void PropertyDB::add_pair(std::string_view concept_name, std::string_view property) {
    int c = concepts_.add(concept_name);
    int p = properties_.add(property);
    if (static_cast<std::size_t>(c) >= props_of_.size()) props_of_.resize(static_cast<std::size_t>(c) + 1);
    props_of_[static_cast<std::size_t>(c)].insert(p);
}

void PropertyDB::load_groups_file(const std::string& path) {
    detail::for_each_tsv_line(path, 3, [&](std::size_t line_no, const std::vector<std::string>& f) {
        int group_index = 0;
        try {
            group_index = std::stoi(f[1]);
        } catch (...) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": bad group index '" + f[1] + "'");
        }
        if (group_index < 0)
            throw FormatError(path + ":" + std::to_string(line_no) + ": negative group index");
        add_group_member(f[0], group_index, f[2]);
    });
    validate_groups();
}

void PropertyDB::add_group_member(std::string_view property, int group_index, std::string_view concept_name) {
    int p = properties_.add(property);
    int c = concepts_.add(concept_name);
    if (static_cast<std::size_t>(c) >= props_of_.size()) props_of_.resize(static_cast<std::size_t>(c) + 1);
    if (static_cast<std::size_t>(p) >= groups_.size()) groups_.resize(static_cast<std::size_t>(p) + 1);
    auto& groups = groups_[static_cast<std::size_t>(p)];
    if (static_cast<std::size_t>(group_index) >= groups.size()) groups.resize(static_cast<std::size_t>(group_index) + 1);
    groups[static_cast<std::size_t>(group_index)].push_back(c);
}

bool PropertyDB::has_property(int concept_id, int property_id) const {
    if (static_cast<std::size_t>(concept_id) >= props_of_.size()) return false;
    return props_of_[static_cast<std::size_t>(concept_id)].contains(property_id);
}

bool PropertyDB::share_any_property(int c1, int c2) const {
    const std::set<int>& a = props_of_[static_cast<std::size_t>(c1)];
    const std::set<int>& b = props_of_[static_cast<std::size_t>(c2)];
    const std::set<int>& small = a.size() <= b.size() ? a : b;
    const std::set<int>& large = a.size() <= b.size() ? b : a;
    return std::any_of(small.begin(), small.end(), [&](int p) { return large.contains(p); });
}

const std::vector<std::vector<int>>& PropertyDB::groups_of(int property_id) const {
    if (property_id < 0 || static_cast<std::size_t>(property_id) >= groups_.size()) return kNoGroups;
    return groups_[static_cast<std::size_t>(property_id)];
}

std::vector<std::string> PropertyDB::properties_with_groups() const {
    std::vector<std::string> out;
    for (std::size_t p = 0; p < groups_.size(); ++p)
        if (!groups_[p].empty()) out.push_back(properties_.item(static_cast<int>(p)));
    return out;
}

void PropertyDB::validate_groups() const {
    for (std::size_t p = 0; p < groups_.size(); ++p)
        for (const std::vector<int>& group : groups_[p])
            for (int c : group)
                if (!has_property(c, static_cast<int>(p)))
                    throw FormatError("group member '" + concepts_.item(c) +
                                      "' does not hold property '" + properties_.item(static_cast<int>(p)) +
                                      "' in the merged DB");
}

}  // namespace facetemb
