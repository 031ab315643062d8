#include "facetemb/outlier.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "facetemb/errors.hpp"
#include "facetemb/hash.hpp"
#include "facetemb/rng.hpp"
#include "json.hpp"

namespace facetemb {

std::vector<OutlierInstance> build_outlier_benchmark(const PropertyDB& db, const std::string& property,
                                                     int n_instances, std::uint64_t seed,
                                                     int retry_budget) {
    std::optional<int> pid = db.properties().find(property);
    if (!pid) throw InvalidArgument("unknown property: " + property);

    std::vector<std::vector<int>> groups;
    for (const std::vector<int>& g : db.groups_of(*pid))
        if (!g.empty()) groups.push_back(g);
    if (groups.size() < 3)
        throw InvalidArgument("property '" + property + "' needs at least 3 taxonomic groups, has " +
                              std::to_string(groups.size()));

    std::vector<int> outlier_pool;
    for (int c = 0; c < db.n_concepts(); ++c)
        if (!db.has_property(c, *pid)) outlier_pool.push_back(c);
    if (outlier_pool.size() < 7)
        throw InvalidArgument("property '" + property + "' leaves fewer than 7 outlier candidates");

    Rng rng(splitmix64(seed ^ fnv1a64(property)));
    std::vector<OutlierInstance> instances;
    instances.reserve(static_cast<std::size_t>(n_instances));
    long budget = retry_budget;

    while (static_cast<int>(instances.size()) < n_instances) {
        if (--budget < 0)
            throw NumericalError("outlier benchmark construction for '" + property +
                                 "' exhausted its retry budget");

        // 3 positives from 3 different groups.
        std::vector<std::size_t> group_order(groups.size());
        for (std::size_t i = 0; i < group_order.size(); ++i) group_order[i] = i;
        rng.shuffle(group_order);
        std::vector<int> positives;
        for (std::size_t gi = 0; gi < 3; ++gi) {
            const std::vector<int>& g = groups[group_order[gi]];
            positives.push_back(g[rng.uniform_index(g.size())]);
        }
        if (std::set<int>(positives.begin(), positives.end()).size() != 3) continue;

        // 7 pairwise property-disjoint outliers.
        std::vector<int> outliers;
        bool ok = true;
        int draws = 0;
        while (outliers.size() < 7) {
            if (++draws > 400) {
                ok = false;
                break;
            }
            int cand = outlier_pool[rng.uniform_index(outlier_pool.size())];
            if (std::find(outliers.begin(), outliers.end(), cand) != outliers.end()) continue;
            if (std::find(positives.begin(), positives.end(), cand) != positives.end()) continue;
            bool disjoint = std::all_of(outliers.begin(), outliers.end(), [&](int o) {
                return !db.share_any_property(cand, o);
            });
            if (disjoint) outliers.push_back(cand);
        }
        if (!ok) continue;

        std::vector<int> members = positives;
        members.insert(members.end(), outliers.begin(), outliers.end());
        rng.shuffle(members);

        OutlierInstance inst;
        inst.property = property;
        std::vector<int> pos_indices;
        for (std::size_t i = 0; i < members.size(); ++i) {
            inst.concepts.push_back(db.concepts().item(members[i]));
            if (std::find(positives.begin(), positives.end(), members[i]) != positives.end())
                pos_indices.push_back(static_cast<int>(i));
        }
        std::copy(pos_indices.begin(), pos_indices.end(), inst.positives.begin());
        instances.push_back(std::move(inst));
    }
    return instances;
}

void write_benchmark_jsonl(const std::vector<OutlierInstance>& instances, std::ostream& out) {
    for (const OutlierInstance& inst : instances) {
        nlohmann::json j = {{"property", inst.property},
                            {"concepts", inst.concepts},
                            {"positives", inst.positives}};
        out << j.dump() << '\n';
    }
}

std::vector<OutlierInstance> read_benchmark_jsonl(std::istream& in) {
    std::vector<OutlierInstance> instances;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("benchmark line " + std::to_string(line_no) + ": " + e.what());
        }
        OutlierInstance inst;
        try {
            inst.property = j.at("property").get<std::string>();
            inst.concepts = j.at("concepts").get<std::vector<std::string>>();
            std::vector<int> pos = j.at("positives").get<std::vector<int>>();
            if (pos.size() != 3) throw FormatError("need exactly 3 positives");
            std::copy(pos.begin(), pos.end(), inst.positives.begin());
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("benchmark line " + std::to_string(line_no) + ": " + e.what());
        }
        if (inst.concepts.size() != 10)
            throw FormatError("benchmark line " + std::to_string(line_no) + ": need exactly 10 concepts");
        if (std::set<std::string>(inst.concepts.begin(), inst.concepts.end()).size() != 10)
            throw FormatError("benchmark line " + std::to_string(line_no) + ": duplicate concepts");
        for (int p : inst.positives)
            if (p < 0 || p >= 10)
                throw FormatError("benchmark line " + std::to_string(line_no) + ": positive index out of range");
        instances.push_back(std::move(inst));
    }
    if (instances.empty()) throw FormatError("benchmark file has no instances");
    return instances;
}

namespace {

struct ScoredDetection {
    std::array<int, 3> prediction{};
    double top_score = 0.0;
};

/// Core scorer over any n >= 4 vectors; prediction indices refer to `vectors`.
ScoredDetection detect_scored(const std::vector<Vec>& vectors) {
    const std::size_t n = vectors.size();
    if (n < 4) throw InvalidArgument("outlier detection needs at least 4 vectors");
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(vectors[i]);
        if (norms[i] < 1e-12)
            throw NumericalError("degenerate vector at index " + std::to_string(i) +
                                 " in outlier instance");
    }
    Matrix cos(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cos.at(i, j) = dot(vectors[i], vectors[j]) / (norms[i] * norms[j]);

    double best_score = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    std::array<int, 3> best_pred{};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> ranked;
        ranked.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) ranked.push_back(j);
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            if (cos.at(i, a) != cos.at(i, b)) return cos.at(i, a) > cos.at(i, b);
            return a < b;
        });
        double score = cos.at(i, ranked[1]) - cos.at(i, ranked[2]);
        if (score > best_score) {
            best_score = score;
            best_i = i;
            best_pred = {static_cast<int>(i), static_cast<int>(ranked[0]), static_cast<int>(ranked[1])};
        }
    }
    std::sort(best_pred.begin(), best_pred.end());
    (void)best_i;
    return {best_pred, best_score};
}

}  // namespace

std::array<int, 3> detect_outliers_single(const std::vector<Vec>& vectors) {
    return detect_scored(vectors).prediction;
}

MultiDetectResult detect_outliers_multi(const std::vector<std::vector<MaskedVec>>& per_facet_vectors) {
    if (per_facet_vectors.empty()) throw InvalidArgument("no facet spaces given");
    double best_score = -std::numeric_limits<double>::infinity();
    int best_facet = -1;
    std::array<int, 3> best_pred{};
    for (std::size_t f = 0; f < per_facet_vectors.size(); ++f) {
        const std::vector<MaskedVec>& all = per_facet_vectors[f];
        std::vector<int> valid;
        std::vector<Vec> vectors;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (all[i].degenerate) continue;
            valid.push_back(static_cast<int>(i));
            vectors.push_back(all[i].v);
        }
        if (vectors.size() < 4) continue;
        ScoredDetection det = detect_scored(vectors);
        if (det.top_score > best_score) {
            best_score = det.top_score;
            best_facet = static_cast<int>(f);
            for (std::size_t t = 0; t < 3; ++t)
                best_pred[t] = valid[static_cast<std::size_t>(det.prediction[t])];
        }
    }
    if (best_facet < 0) throw NumericalError("all facet spaces degenerate for this instance");
    std::sort(best_pred.begin(), best_pred.end());
    return {best_pred, best_facet};
}

bool exact_match(const std::array<int, 3>& predicted, const std::array<int, 3>& gold) {
    std::array<int, 3> a = predicted, b = gold;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

}  // namespace facetemb
