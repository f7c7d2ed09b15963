#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "megp/expression.hpp"

namespace megp {

/// Time-ordered samples: a row-major feature matrix plus a real target.
/// Auxiliary columns ride along (e.g. synthetic regime labels) but are never
/// used as model inputs.
struct Dataset {
    std::vector<std::string> feature_names;
    std::string target_name;
    std::vector<double> features; // rows() x n_features(), row-major
    std::vector<double> target;
    std::vector<std::string> aux_names;
    std::vector<std::vector<double>> aux; // one vector per aux column, rows() long

    std::size_t rows() const noexcept { return target.size(); }
    std::size_t n_features() const noexcept { return feature_names.size(); }

    std::span<const double> row(std::size_t i) const
    {
        return { features.data() + i * n_features(), n_features() };
    }

    void add_row(std::span<const double> x, double y);

    /// Rows in the given order (indices may repeat).
    Dataset subset(std::span<const std::size_t> indices) const;
    /// Contiguous rows [begin, end).
    Dataset slice(std::size_t begin, std::size_t end) const;

    ColumnData columns() const;
    /// Values of a named feature, target or aux column; throws InputError if absent.
    std::vector<double> column(const std::string& name) const;

    /// Throws InputError if shapes disagree.
    void check() const;
};

} // namespace megp
