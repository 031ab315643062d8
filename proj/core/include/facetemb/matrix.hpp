#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace facetemb {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

inline Vec to_vec(std::span<const double> a) { return Vec(a.begin(), a.end()); }

inline double cosine(std::span<const double> a, std::span<const double> b) {
    return dot(a, b) / (norm(a) * norm(b));
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace facetemb
