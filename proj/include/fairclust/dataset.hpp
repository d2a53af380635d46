#ifndef FAIRCLUST_DATASET_HPP
#define FAIRCLUST_DATASET_HPP

#include <string>
#include <utility>
#include <vector>

#include "fairclust/instance.hpp"

namespace fairclust {

/// How to turn a delimited text file into an instance: which columns are
/// features, which column carries the group attribute, and how raw attribute
/// values map to group labels. Candidate facilities are the data points.
struct DatasetSpec {
    std::string name;
    std::string path;
    char delimiter = ',';
    std::vector<std::string> feature_columns;
    std::string group_column;
    /// raw value -> group label; group order follows the first appearance of
    /// each label here. A value seen in the data but absent here is an error
    /// unless drop_unmapped is set, in which case the row is skipped.
    std::vector<std::pair<std::string, std::string>> group_mapping;
    bool drop_unmapped = false;
    /// Column names for headerless files; empty means the first line is the header.
    std::vector<std::string> columns;
    int subsample = 500;  // first N kept rows
    bool standardize = true;
    int k = 5;
    double p = 1.0;

    static DatasetSpec from_json_file(const std::string& path);
    static DatasetSpec from_json_text(const std::string& text);
    std::string to_json_text() const;
};

Instance load(const DatasetSpec& spec);

/// Deterministic synthetic stand-ins shaped like the benchmark datasets
/// (row counts, group structure, and column names), for runs where the real
/// files are not available. Returns the matching spec.
enum class SyntheticKind { Credit, Compas, Adult };
DatasetSpec write_synthetic_dataset(SyntheticKind kind, const std::string& csv_path);

}  // namespace fairclust

#endif  // FAIRCLUST_DATASET_HPP
