#pragma once

#include <span>
#include <vector>

namespace dmfp {

/// Dense row-major (r, c) table of doubles.
struct Grid2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Grid2() = default;
    Grid2(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }

    size_t size() const { return data.size(); }
};

/// Dense row-major (i, j, k) tensor; row(i, j) is the contiguous k-slice.
struct Grid3 {
    int d0 = 0;
    int d1 = 0;
    int d2 = 0;
    std::vector<double> data;

    Grid3() = default;
    Grid3(int a, int b, int c, double fill = 0.0)
        : d0(a), d1(b), d2(c), data(static_cast<size_t>(a) * b * c, fill) {}

    double& operator()(int i, int j, int k) {
        return data[(static_cast<size_t>(i) * d1 + j) * d2 + k];
    }
    double operator()(int i, int j, int k) const {
        return data[(static_cast<size_t>(i) * d1 + j) * d2 + k];
    }

    std::span<double> row(int i, int j) {
        return {data.data() + (static_cast<size_t>(i) * d1 + j) * d2, static_cast<size_t>(d2)};
    }
    std::span<const double> row(int i, int j) const {
        return {data.data() + (static_cast<size_t>(i) * d1 + j) * d2, static_cast<size_t>(d2)};
    }
};

}  // namespace dmfp
