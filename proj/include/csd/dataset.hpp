#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace csd {

enum class ColumnKind { Continuous, Binary, Categorical, Target };

ColumnKind column_kind_from_string(const std::string& s);
std::string to_string(ColumnKind kind);

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
};

/// Per-column location/scale recorded by standardize() for inverse mapping.
struct StandardizeParams {
    std::vector<double> mean;
    std::vector<double> stddev;
};

// Column-typed tabular matrix with a designated binary target. `values` holds
// the encoded predictors only (categoricals one-hot expanded, NaN = missing);
// the target lives in its own vector and never enters the predictor matrix.
// Immutable by convention: every operation returns a new Dataset.
struct Dataset {
    std::vector<ColumnSchema> schema; // encoded predictor columns, then the target entry
    Eigen::MatrixXd values;           // B x N
    Eigen::VectorXd target;           // length B, entries in {0,1}
    std::string target_name;

    Eigen::Index row_count() const { return values.rows(); }
    Eigen::Index var_count() const { return values.cols(); }

    std::vector<std::string> predictor_names() const;
    /// Index of a predictor column, or -1 if absent.
    Eigen::Index column_index(const std::string& name) const;
    bool has_missing() const;
};

/// Schema sidecar: one `name,kind` line per column.
std::vector<ColumnSchema> load_schema(const std::string& path);
void write_schema(const std::vector<ColumnSchema>& schema, const std::string& path);

/// Load an RFC-4180 CSV against a declared schema. Missing numeric cells
/// (empty field or "NA") become NaN; rows with a missing target are dropped;
/// categorical columns are one-hot expanded with levels sorted by name.
Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema);

/// Write the encoded dataset back out (shortest round-trip number formatting).
void write_csv(const Dataset& ds, const std::string& path);

/// Replace each missing cell by its column median (even count: mean of the
/// two central values).
Dataset impute_median(const Dataset& ds);

/// Zero-mean, unit population-std transform of every predictor column;
/// target untouched.
std::pair<Dataset, StandardizeParams> standardize(const Dataset& ds);

} // namespace csd
