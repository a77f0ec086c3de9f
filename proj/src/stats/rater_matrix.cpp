#include "nvi/stats/rater_matrix.hpp"

#include <set>

#include "nvi/error.hpp"

namespace nvi::stats {

Eigen::Index RaterMatrix::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<Eigen::Index>(i);
    throw ValidationError("missing column '" + std::string(name) + "'");
}

Eigen::MatrixXd RaterMatrix::select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = values.col(column_index(names[j]));
    return out;
}

void RaterMatrix::validate() const {
    if (values.cols() != static_cast<Eigen::Index>(columns.size()))
        throw ValidationError("rater matrix has " + std::to_string(values.cols()) + " value columns but " +
                              std::to_string(columns.size()) + " names");
    if (values.rows() != static_cast<Eigen::Index>(item_ids.size()))
        throw ValidationError("rater matrix has " + std::to_string(values.rows()) + " rows but " +
                              std::to_string(item_ids.size()) + " item ids");
    if (std::set<std::string>(columns.begin(), columns.end()).size() != columns.size())
        throw ValidationError("duplicate rater column name");
    if (!values.allFinite()) throw ValidationError("rater matrix contains missing or non-finite values");
}

}  // namespace nvi::stats
