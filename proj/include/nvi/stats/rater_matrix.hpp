#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace nvi::stats {

/// Items x named rating columns (e.g. Rater0, Rater1, Rater2, Model).
struct RaterMatrix {
    std::vector<std::string> item_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // rows = items, cols = columns

    Eigen::Index items() const { return values.rows(); }

    /// Index of `name`; throws ValidationError naming the missing column.
    Eigen::Index column_index(std::string_view name) const;
    Eigen::VectorXd column(std::string_view name) const { return values.col(column_index(name)); }
    /// Sub-matrix with the named columns in the given order.
    Eigen::MatrixXd select(const std::vector<std::string>& names) const;

    /// Shape, uniqueness and finiteness checks; throws ValidationError.
    void validate() const;
};

}  // namespace nvi::stats
