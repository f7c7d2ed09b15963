#include "megp/dataset.hpp"

#include <algorithm>

#include "megp/error.hpp"

namespace megp {

void Dataset::add_row(std::span<const double> x, double y)
{
    if (x.size() != n_features()) {
        throw InputError("row has " + std::to_string(x.size()) + " features, expected " + std::to_string(n_features()));
    }
    features.insert(features.end(), x.begin(), x.end());
    target.push_back(y);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const
{
    Dataset out;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.aux_names = aux_names;
    out.aux.resize(aux.size());
    out.features.reserve(indices.size() * n_features());
    out.target.reserve(indices.size());
    for (auto i : indices) {
        if (i >= rows()) {
            throw InputError("row index " + std::to_string(i) + " out of range");
        }
        const auto r = row(i);
        out.features.insert(out.features.end(), r.begin(), r.end());
        out.target.push_back(target[i]);
        for (std::size_t a = 0; a < aux.size(); ++a) {
            out.aux[a].push_back(aux[a][i]);
        }
    }
    return out;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const
{
    if (begin > end || end > rows()) {
        throw InputError("slice out of range");
    }
    std::vector<std::size_t> indices(end - begin);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        indices[i] = begin + i;
    }
    return subset(indices);
}

ColumnData Dataset::columns() const
{
    ColumnData out;
    out.rows = rows();
    out.columns.assign(n_features(), std::vector<double>(rows()));
    for (std::size_t i = 0; i < rows(); ++i) {
        for (std::size_t f = 0; f < n_features(); ++f) {
            out.columns[f][i] = features[i * n_features() + f];
        }
    }
    return out;
}

std::vector<double> Dataset::column(const std::string& name) const
{
    if (name == target_name) {
        return target;
    }
    if (auto it = std::find(feature_names.begin(), feature_names.end(), name); it != feature_names.end()) {
        const auto f = static_cast<std::size_t>(it - feature_names.begin());
        std::vector<double> out(rows());
        for (std::size_t i = 0; i < rows(); ++i) {
            out[i] = features[i * n_features() + f];
        }
        return out;
    }
    if (auto it = std::find(aux_names.begin(), aux_names.end(), name); it != aux_names.end()) {
        return aux[static_cast<std::size_t>(it - aux_names.begin())];
    }
    throw InputError("unknown column '" + name + "'");
}

void Dataset::check() const
{
    if (features.size() != rows() * n_features()) {
        throw InputError("feature matrix size does not match row count");
    }
    if (aux.size() != aux_names.size()) {
        throw InputError("aux column names and data disagree");
    }
    for (const auto& col : aux) {
        if (col.size() != rows()) {
            throw InputError("aux column length does not match row count");
        }
    }
}

} // namespace megp
