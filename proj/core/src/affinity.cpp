#include "facetemb/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "facetemb/errors.hpp"
#include "facetemb/rng.hpp"

namespace facetemb {

namespace {

double off_diagonal_quantile(const Matrix& s, double q) {
    std::vector<double> values;
    values.reserve(s.rows() * (s.rows() - 1));
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.rows(); ++j)
            if (i != j) values.push_back(s.at(i, j));
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

Clustering affinity_propagation(const Matrix& similarity, const ApConfig& cfg) {
    const std::size_t n = similarity.rows();
    if (n == 0 || similarity.cols() != n) throw InvalidArgument("similarity matrix must be square");
    if (cfg.damping < 0.5 || cfg.damping >= 1.0) throw InvalidArgument("damping must be in [0.5, 1)");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(similarity.at(i, j) - similarity.at(j, i)) > 1e-12)
                throw InvalidArgument("similarity matrix must be symmetric");

    if (n == 1) return {{0}, {0}};

    Matrix s = similarity;
    double pref = cfg.preference_value ? *cfg.preference_value
                                       : off_diagonal_quantile(s, cfg.preference_quantile);
    for (std::size_t i = 0; i < n; ++i) s.at(i, i) = pref;

    if (cfg.jitter) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double v : s.data()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double amp = 1e-9 * std::max(1.0, hi - lo);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double u = static_cast<double>(splitmix64(i * n + j) >> 11) * 0x1.0p-53;
                s.at(i, j) += amp * (u - 0.5);
            }
    }

    Matrix r(n, n), a(n, n);
    std::vector<char> is_exemplar(n, 0), prev(n, 0);
    int stable = 0;
    bool converged = false;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        // Responsibilities.
        for (std::size_t i = 0; i < n; ++i) {
            double max1 = -std::numeric_limits<double>::infinity(), max2 = max1;
            std::size_t arg1 = 0;
            for (std::size_t k = 0; k < n; ++k) {
                double v = a.at(i, k) + s.at(i, k);
                if (v > max1) {
                    max2 = max1;
                    max1 = v;
                    arg1 = k;
                } else if (v > max2) {
                    max2 = v;
                }
            }
            for (std::size_t k = 0; k < n; ++k) {
                double target = s.at(i, k) - (k == arg1 ? max2 : max1);
                r.at(i, k) = cfg.damping * r.at(i, k) + (1.0 - cfg.damping) * target;
            }
        }
        // Availabilities.
        for (std::size_t k = 0; k < n; ++k) {
            double sum_pos = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (i != k) sum_pos += std::max(0.0, r.at(i, k));
            for (std::size_t i = 0; i < n; ++i) {
                double target;
                if (i == k) {
                    target = sum_pos;
                } else {
                    target = std::min(0.0, r.at(k, k) + sum_pos - std::max(0.0, r.at(i, k)));
                }
                a.at(i, k) = cfg.damping * a.at(i, k) + (1.0 - cfg.damping) * target;
            }
        }
        // Exemplar stability.
        bool any = false;
        for (std::size_t k = 0; k < n; ++k) {
            is_exemplar[k] = r.at(k, k) + a.at(k, k) > 0.0 ? 1 : 0;
            any = any || is_exemplar[k];
        }
        if (any && is_exemplar == prev) {
            if (++stable >= cfg.convergence_window) {
                converged = true;
                break;
            }
        } else {
            stable = 0;
        }
        prev = is_exemplar;
    }

    Clustering out;
    for (std::size_t k = 0; k < n; ++k)
        if (is_exemplar[k]) out.exemplars.push_back(static_cast<int>(k));
    if (out.exemplars.empty())
        throw NumericalError("affinity propagation found no exemplar; try a higher preference");
    (void)converged;  // a non-converged run with a stable final set is still usable

    out.assignment.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        int best_k = out.exemplars.front();
        for (int k : out.exemplars) {
            double v = s.at(i, static_cast<std::size_t>(k));
            if (v > best) {
                best = v;
                best_k = k;
            }
        }
        out.assignment[i] = best_k;
    }
    for (int k : out.exemplars) out.assignment[static_cast<std::size_t>(k)] = k;
    return out;
}

Matrix cosine_similarity_matrix(const Matrix& rows) {
    const std::size_t n = rows.rows();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(rows.row(i));
        if (norms[i] < 1e-12)
            throw NumericalError("zero-norm row " + std::to_string(i) + " in cosine similarity");
    }
    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        s.at(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = dot(rows.row(i), rows.row(j)) / (norms[i] * norms[j]);
            s.at(i, j) = v;
            s.at(j, i) = v;
        }
    }
    return s;
}

Clustering cluster_concepts(const Matrix& concept_rows, const ApConfig& cfg) {
    return affinity_propagation(cosine_similarity_matrix(concept_rows), cfg);
}

}  // namespace facetemb
