#include "facetemb/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "facetemb/errors.hpp"

namespace facetemb {

namespace {

constexpr double kNormFloor = 1e-12;

double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

struct MlpTrace {
    Vec x;  // input
    Vec t;  // tanh layer output
};

Vec mlp_forward_trace(const Mlp& mlp, std::span<const double> x, MlpTrace& trace) {
    const std::size_t h = mlp.b1.size();
    const std::size_t d = mlp.b2.size();
    trace.x = to_vec(x);
    trace.t.resize(h);
    for (std::size_t i = 0; i < h; ++i) trace.t[i] = std::tanh(dot(mlp.w1.row(i), x) + mlp.b1[i]);
    Vec y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = dot(mlp.w2.row(i), trace.t) + mlp.b2[i];
    return y;
}

/// Accumulates head gradients and returns the gradient w.r.t. the input row.
Vec mlp_backward(const Mlp& mlp, const MlpTrace& trace, std::span<const double> g_y, Mlp& grad) {
    const std::size_t h = mlp.b1.size();
    const std::size_t d = mlp.b2.size();
    Vec g_t(h, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        grad.b2[i] += g_y[i];
        axpy(g_y[i], trace.t, grad.w2.row(i));
        axpy(g_y[i], mlp.w2.row(i), g_t);
    }
    Vec g_z1(h);
    for (std::size_t i = 0; i < h; ++i) g_z1[i] = g_t[i] * (1.0 - trace.t[i] * trace.t[i]);
    Vec g_x(trace.x.size(), 0.0);
    for (std::size_t i = 0; i < h; ++i) {
        grad.b1[i] += g_z1[i];
        axpy(g_z1[i], trace.x, grad.w1.row(i));
        axpy(g_z1[i], mlp.w1.row(i), g_x);
    }
    return g_x;
}

/// d(v/|v|) pullback: g_v = (g_u - (g_u . u) u) / |v| where u = v/|v|.
Vec normalize_backward(std::span<const double> unit, double raw_norm, std::span<const double> g_unit) {
    double proj = dot(g_unit, unit);
    Vec g(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) g[i] = (g_unit[i] - proj * unit[i]) / raw_norm;
    return g;
}

/// Forward cache for one head over the property table. Each distinct property
/// is encoded once per call; upstream gradients are summed per property and
/// flushed with a single backward pass each (backprop is linear in the
/// upstream gradient, so this is exact).
class HeadCache {
public:
    HeadCache(const Mlp& mlp, const Matrix& table) : mlp_(mlp), table_(table) {}

    struct Entry {
        MlpTrace trace;
        Vec out;
        Vec g_out;
        bool touched = false;
    };

    const Entry& at(int property_id) {
        auto [it, inserted] = entries_.try_emplace(property_id);
        if (inserted) {
            it->second.out = mlp_forward_trace(mlp_, table_.row(static_cast<std::size_t>(property_id)),
                                               it->second.trace);
            it->second.g_out.assign(it->second.out.size(), 0.0);
        }
        return it->second;
    }

    void add_grad(int property_id, std::span<const double> g) {
        Entry& e = entries_.at(property_id);
        axpy(1.0, g, e.g_out);
        e.touched = true;
    }

    /// One backward per touched property, in ascending property order.
    void flush(Mlp& head_grad, Matrix& table_grad) {
        for (auto& [pid, entry] : entries_) {
            if (!entry.touched) continue;
            Vec g_row = mlp_backward(mlp_, entry.trace, entry.g_out, head_grad);
            axpy(1.0, g_row, table_grad.row(static_cast<std::size_t>(pid)));
        }
    }

private:
    const Mlp& mlp_;
    const Matrix& table_;
    std::map<int, Entry> entries_;
};

/// Same idea for normalized concept vectors.
class ConceptCache {
public:
    explicit ConceptCache(const Matrix& table) : table_(table) {}

    struct Entry {
        Vec unit;
        double raw_norm = 0.0;
        Vec g_unit;
        bool touched = false;
    };

    const Entry& at(int concept_id) {
        auto [it, inserted] = entries_.try_emplace(concept_id);
        if (inserted) {
            std::span<const double> row = table_.row(static_cast<std::size_t>(concept_id));
            it->second.raw_norm = norm(row);
            if (it->second.raw_norm < kNormFloor)
                throw NumericalError("concept row " + std::to_string(concept_id) + " has near-zero norm");
            it->second.unit = to_vec(row);
            scale(it->second.unit, 1.0 / it->second.raw_norm);
            it->second.g_unit.assign(it->second.unit.size(), 0.0);
        }
        return it->second;
    }

    void add_grad(int concept_id, std::span<const double> g) {
        Entry& e = entries_.at(concept_id);
        axpy(1.0, g, e.g_unit);
        e.touched = true;
    }

    void flush(Matrix& table_grad) {
        for (auto& [cid, entry] : entries_) {
            if (!entry.touched) continue;
            Vec g_row = normalize_backward(entry.unit, entry.raw_norm, entry.g_unit);
            axpy(1.0, g_row, table_grad.row(static_cast<std::size_t>(cid)));
        }
    }

private:
    const Matrix& table_;
    std::map<int, Entry> entries_;
};

std::string pair_label(int c, int p) {
    return "(concept " + std::to_string(c) + ", property " + std::to_string(p) + ")";
}

Vec normalized_concept(const EncoderParams& params, int concept_id, double& raw_norm) {
    std::span<const double> row = params.concept_table.row(static_cast<std::size_t>(concept_id));
    raw_norm = norm(row);
    if (raw_norm < kNormFloor)
        throw NumericalError("concept row " + std::to_string(concept_id) + " has near-zero norm");
    Vec out = to_vec(row);
    scale(out, 1.0 / raw_norm);
    return out;
}

double cp_term_loss(double score, bool positive) {
    // -log sigmoid(s) for positives, -log(1 - sigmoid(s)) for negatives.
    return positive ? softplus(-score) : softplus(score);
}

}  // namespace

MaskedVec masked_concept(const EncoderParams& params, int concept_id, int property_id, double mask_eps) {
    double raw = 0.0;
    Vec con = normalized_concept(params, concept_id, raw);
    Vec facet = encode_facet(params, property_id);
    Vec prod(con.size());
    for (std::size_t i = 0; i < con.size(); ++i) prod[i] = con[i] * facet[i];
    double n = norm(prod);
    if (n < mask_eps) return {Vec(con.size(), 0.0), true};
    scale(prod, 1.0 / n);
    return {std::move(prod), false};
}

double loss_baseline(const EncoderParams& params, const std::vector<CpPair>& positives,
                     const std::vector<CpPair>& negatives) {
    if (positives.empty()) throw InvalidArgument("loss_baseline: empty positives");
    std::map<int, Vec> prop_cache;
    std::map<int, Vec> con_cache;
    double loss = 0.0;
    auto add = [&](const std::vector<CpPair>& pairs, bool positive) {
        for (auto [c, p] : pairs) {
            auto [cit, c_new] = con_cache.try_emplace(c);
            if (c_new) {
                double raw = 0.0;
                cit->second = normalized_concept(params, c, raw);
            }
            auto [pit, p_new] = prop_cache.try_emplace(p);
            if (p_new) pit->second = encode_property(params, p);
            loss += cp_term_loss(dot(cit->second, pit->second), positive);
        }
    };
    add(positives, true);
    add(negatives, false);
    return loss;
}

double loss_l1(const EncoderParams& params, const std::vector<CpPair>& positives,
               const std::vector<CpPair>& negatives, const LossConfig& cfg) {
    if (positives.empty()) throw InvalidArgument("loss_l1: empty positives");
    std::map<int, Vec> prop_cache;
    std::map<int, Vec> facet_cache;
    std::map<int, Vec> con_cache;
    double loss = 0.0;
    auto add = [&](const std::vector<CpPair>& pairs, bool positive) {
        for (auto [c, p] : pairs) {
            auto [cit, c_new] = con_cache.try_emplace(c);
            if (c_new) {
                double raw = 0.0;
                cit->second = normalized_concept(params, c, raw);
            }
            auto [pit, p_new] = prop_cache.try_emplace(p);
            if (p_new) pit->second = encode_property(params, p);
            auto [fit, f_new] = facet_cache.try_emplace(p);
            if (f_new) fit->second = encode_facet(params, p);

            const Vec& con = cit->second;
            const Vec& facet = fit->second;
            Vec prod(con.size());
            for (std::size_t i = 0; i < con.size(); ++i) prod[i] = con[i] * facet[i];
            double n = norm(prod);
            double score = 0.0;
            if (n >= cfg.mask_eps) {
                scale(prod, 1.0 / n);
                score = dot(prod, pit->second);
            }
            loss += cp_term_loss(score, positive);
        }
    };
    add(positives, true);
    add(negatives, false);
    return loss;
}

namespace {

double l2_example_loss_cached(const EncoderParams& params, const PfExample& ex, const LossConfig& cfg,
                              std::map<int, std::pair<Vec, double>>& facet_cache) {
    auto fetch = [&](int pid) -> const std::pair<Vec, double>& {
        auto [it, inserted] = facet_cache.try_emplace(pid);
        if (inserted) {
            it->second.first = encode_facet(params, pid);
            it->second.second = norm(it->second.first);
            if (it->second.second < kNormFloor)
                throw NumericalError("zero-norm facet vector for property " + std::to_string(pid));
        }
        return it->second;
    };

    const auto& [fa, na] = fetch(ex.anchor);
    std::vector<double> logits;
    logits.reserve(1 + ex.negatives.size());
    auto logit_of = [&](int pid) {
        const auto& [fb, nb] = fetch(pid);
        return dot(fa, fb) / (na * nb) / cfg.tau;
    };
    logits.push_back(logit_of(ex.positive));
    for (int r : ex.negatives) logits.push_back(logit_of(r));

    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    return m + std::log(sum) - logits[0];
}

}  // namespace

double loss_l2(const EncoderParams& params, const PfBatch& batch, const LossConfig& cfg) {
    std::map<int, std::pair<Vec, double>> facet_cache;
    double loss = 0.0;
    for (const PfExample& ex : batch.examples) loss += l2_example_loss_cached(params, ex, cfg, facet_cache);
    return loss;
}

double loss_total(const EncoderParams& params, const CpBatch& cp, const PfBatch& pf,
                  const LossConfig& cfg) {
    double loss = 0.0;
    if (!cp.positives.empty() || !cp.negatives.empty())
        loss += loss_l1(params, cp.positives, cp.negatives, cfg);
    loss += loss_l2(params, pf, cfg);
    return loss;
}

Gradients Gradients::zeros_like(const EncoderParams& p) {
    Gradients g;
    g.concept_table = Matrix(p.concept_table.rows(), p.concept_table.cols());
    g.property_table = Matrix(p.property_table.rows(), p.property_table.cols());
    auto zero_mlp = [](const Mlp& m) {
        Mlp z;
        z.w1 = Matrix(m.w1.rows(), m.w1.cols());
        z.b1.assign(m.b1.size(), 0.0);
        z.w2 = Matrix(m.w2.rows(), m.w2.cols());
        z.b2.assign(m.b2.size(), 0.0);
        return z;
    };
    g.prop_head = zero_mlp(p.prop_head);
    g.facet_head = zero_mlp(p.facet_head);
    return g;
}

std::vector<ParamBlockRef> grad_blocks(Gradients& g) {
    return {
        {"concept_table", g.concept_table.data()},
        {"property_table", g.property_table.data()},
        {"prop_head.w1", g.prop_head.w1.data()},
        {"prop_head.b1", g.prop_head.b1},
        {"prop_head.w2", g.prop_head.w2.data()},
        {"prop_head.b2", g.prop_head.b2},
        {"facet_head.w1", g.facet_head.w1.data()},
        {"facet_head.b1", g.facet_head.b1},
        {"facet_head.w2", g.facet_head.w2.data()},
        {"facet_head.b2", g.facet_head.b2},
    };
}

namespace {

/// One L1 (or baseline) term; per-head gradients land in the caches.
double accumulate_cp_term(int c, int p, bool positive, bool use_mask, const LossConfig& cfg,
                          ConceptCache& concepts, HeadCache& props, HeadCache* facets) {
    const ConceptCache::Entry& con = concepts.at(c);
    const HeadCache::Entry& prop = props.at(p);

    Vec embed;
    const Vec* facet_out = nullptr;
    double mask_raw_norm = 0.0;
    bool degenerate = false;
    if (use_mask) {
        facet_out = &facets->at(p).out;
        Vec prod(con.unit.size());
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = con.unit[i] * (*facet_out)[i];
        mask_raw_norm = norm(prod);
        if (mask_raw_norm < cfg.mask_eps) {
            degenerate = true;
        } else {
            scale(prod, 1.0 / mask_raw_norm);
            embed = std::move(prod);
        }
    } else {
        embed = con.unit;
    }

    double score = degenerate ? 0.0 : dot(embed, prop.out);
    double term = cp_term_loss(score, positive);
    if (!std::isfinite(term)) throw NumericalError("non-finite loss term at " + pair_label(c, p));
    if (degenerate) return term;  // constant term, zero gradient by definition

    double g_score = sigmoid(score) - (positive ? 1.0 : 0.0);

    Vec g_prop(embed.size());
    for (std::size_t i = 0; i < embed.size(); ++i) g_prop[i] = g_score * embed[i];
    props.add_grad(p, g_prop);

    Vec g_embed(embed.size());
    for (std::size_t i = 0; i < embed.size(); ++i) g_embed[i] = g_score * prop.out[i];

    if (use_mask) {
        Vec g_prod = normalize_backward(embed, mask_raw_norm, g_embed);
        Vec g_con(embed.size());
        Vec g_facet(embed.size());
        for (std::size_t i = 0; i < embed.size(); ++i) {
            g_con[i] = g_prod[i] * (*facet_out)[i];
            g_facet[i] = g_prod[i] * con.unit[i];
        }
        facets->add_grad(p, g_facet);
        concepts.add_grad(c, g_con);
    } else {
        concepts.add_grad(c, g_embed);
    }
    return term;
}

/// One InfoNCE example; facet-head gradients land in the cache.
double accumulate_pf_example(const PfExample& ex, const LossConfig& cfg, HeadCache& facets) {
    std::vector<int> others;
    others.reserve(1 + ex.negatives.size());
    others.push_back(ex.positive);
    others.insert(others.end(), ex.negatives.begin(), ex.negatives.end());

    const Vec& fa = facets.at(ex.anchor).out;
    double na = norm(fa);
    if (na < kNormFloor)
        throw NumericalError("zero-norm facet vector for property " + std::to_string(ex.anchor));

    std::vector<double> nb(others.size()), cos_j(others.size()), logits(others.size());
    for (std::size_t j = 0; j < others.size(); ++j) {
        const Vec& fb = facets.at(others[j]).out;
        nb[j] = norm(fb);
        if (nb[j] < kNormFloor)
            throw NumericalError("zero-norm facet vector for property " + std::to_string(others[j]));
        cos_j[j] = dot(fa, fb) / (na * nb[j]);
        logits[j] = cos_j[j] / cfg.tau;
    }
    double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - m);
    double lse = m + std::log(sum);
    double term = lse - logits[0];
    if (!std::isfinite(term))
        throw NumericalError("non-finite InfoNCE term at (anchor " + std::to_string(ex.anchor) +
                             ", positive " + std::to_string(ex.positive) + ")");

    Vec g_fa(fa.size(), 0.0);
    Vec g_fb(fa.size());
    for (std::size_t j = 0; j < others.size(); ++j) {
        double g_logit = std::exp(logits[j] - lse) - (j == 0 ? 1.0 : 0.0);
        double g_cos = g_logit / cfg.tau;
        const Vec& fb = facets.at(others[j]).out;
        // d cos / d a = b/(|a||b|) - cos * a/|a|^2, symmetric in b.
        for (std::size_t i = 0; i < fa.size(); ++i) {
            g_fa[i] += g_cos * (fb[i] / (na * nb[j]) - cos_j[j] * fa[i] / (na * na));
            g_fb[i] = g_cos * (fa[i] / (na * nb[j]) - cos_j[j] * fb[i] / (nb[j] * nb[j]));
        }
        facets.add_grad(others[j], g_fb);
    }
    facets.add_grad(ex.anchor, g_fa);
    return term;
}

void check_grad_finite(Gradients& grad) {
    for (const ParamBlockRef& block : grad_blocks(grad))
        if (!all_finite(block.data))
            throw NumericalError("non-finite gradient in block " + block.name);
}

}  // namespace

std::pair<double, Gradients> grad_total(const EncoderParams& params, const CpBatch& cp,
                                        const PfBatch& pf, const LossConfig& cfg) {
    if (cp.positives.empty() && cp.negatives.empty() && pf.examples.empty())
        throw InvalidArgument("grad_total: both batches empty");
    Gradients grad = Gradients::zeros_like(params);
    ConceptCache concepts(params.concept_table);
    HeadCache props(params.prop_head, params.property_table);
    HeadCache facets(params.facet_head, params.property_table);

    double loss = 0.0;
    for (auto [c, p] : cp.positives)
        loss += accumulate_cp_term(c, p, true, true, cfg, concepts, props, &facets);
    for (auto [c, p] : cp.negatives)
        loss += accumulate_cp_term(c, p, false, true, cfg, concepts, props, &facets);
    for (const PfExample& ex : pf.examples) loss += accumulate_pf_example(ex, cfg, facets);

    concepts.flush(grad.concept_table);
    props.flush(grad.prop_head, grad.property_table);
    facets.flush(grad.facet_head, grad.property_table);
    check_grad_finite(grad);
    return {loss, std::move(grad)};
}

std::pair<double, Gradients> grad_baseline(const EncoderParams& params, const CpBatch& cp) {
    if (cp.positives.empty() && cp.negatives.empty())
        throw InvalidArgument("grad_baseline: empty batch");
    LossConfig cfg;
    Gradients grad = Gradients::zeros_like(params);
    ConceptCache concepts(params.concept_table);
    HeadCache props(params.prop_head, params.property_table);

    double loss = 0.0;
    for (auto [c, p] : cp.positives)
        loss += accumulate_cp_term(c, p, true, false, cfg, concepts, props, nullptr);
    for (auto [c, p] : cp.negatives)
        loss += accumulate_cp_term(c, p, false, false, cfg, concepts, props, nullptr);

    concepts.flush(grad.concept_table);
    props.flush(grad.prop_head, grad.property_table);
    check_grad_finite(grad);
    return {loss, std::move(grad)};
}

namespace {

std::vector<std::vector<int>> non_facet_properties(const TrainingCorpus& corpus) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(corpus.facets.size()));
    for (int f = 0; f < corpus.facets.size(); ++f)
        for (int p = 0; p < corpus.properties.size(); ++p)
            if (!corpus.pf_pairs.contains(p, f)) out[static_cast<std::size_t>(f)].push_back(p);
    return out;
}

}  // namespace

PfBatch sample_pf_batch(const TrainingCorpus& corpus, int n_examples, int n_neg_pf, Rng& rng) {
    std::vector<std::vector<int>> by_facet = corpus.properties_by_facet();
    std::vector<int> usable_facets;
    for (std::size_t f = 0; f < by_facet.size(); ++f)
        if (by_facet[f].size() >= 2) usable_facets.push_back(static_cast<int>(f));
    if (usable_facets.empty()) return {};

    std::vector<std::vector<int>> negatives_pool = non_facet_properties(corpus);
    PfBatch batch;
    batch.examples.reserve(static_cast<std::size_t>(n_examples));
    for (int i = 0; i < n_examples; ++i) {
        int f = usable_facets[rng.uniform_index(usable_facets.size())];
        const std::vector<int>& members = by_facet[static_cast<std::size_t>(f)];
        std::size_t a = rng.uniform_index(members.size());
        std::size_t b = rng.uniform_index(members.size() - 1);
        if (b >= a) ++b;
        PfExample ex;
        ex.anchor = members[a];
        ex.positive = members[b];
        const std::vector<int>& pool = negatives_pool[static_cast<std::size_t>(f)];
        if (!pool.empty()) {
            if (n_neg_pf == 0) {
                ex.negatives = pool;
            } else {
                ex.negatives.reserve(static_cast<std::size_t>(n_neg_pf));
                for (int k = 0; k < n_neg_pf; ++k)
                    ex.negatives.push_back(pool[rng.uniform_index(pool.size())]);
            }
        }
        batch.examples.push_back(std::move(ex));
    }
    return batch;
}

PfBatch full_pf_batch(const TrainingCorpus& corpus) {
    std::vector<std::vector<int>> by_facet = corpus.properties_by_facet();
    std::vector<std::vector<int>> negatives_pool = non_facet_properties(corpus);
    PfBatch batch;
    for (std::size_t f = 0; f < by_facet.size(); ++f) {
        const std::vector<int>& members = by_facet[f];
        for (int p : members)
            for (int q : members) {
                if (p == q) continue;
                batch.examples.push_back({p, q, negatives_pool[f]});
            }
    }
    return batch;
}

}  // namespace facetemb
