#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ivsum {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
double l2_norm(const std::vector<T>& v) {
    double s = 0.0;
    for (T x : v) s += double(x) * double(x);
    return std::sqrt(s);
}

inline constexpr double kZeroNormEps = 1e-12;

// L2-normalized copy in double precision; empty result signals a zero vector.
template <typename T>
std::vector<double> try_normalized(const std::vector<T>& v) {
    const double n = l2_norm(v);
    if (n < kZeroNormEps) return {};
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = double(v[i]) / n;
    return out;
}

}  // namespace ivsum
