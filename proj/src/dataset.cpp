#include "fairclust/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairclust {

DatasetSpec DatasetSpec::from_json_text(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    DatasetSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.path = j.at("path").get<std::string>();
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw std::invalid_argument("delimiter must be one character");
        spec.delimiter = d[0];
    }
    spec.feature_columns = j.at("feature_columns").get<std::vector<std::string>>();
    spec.group_column = j.at("group_column").get<std::string>();
    for (const auto& [raw, label] : j.at("group_mapping").items())
        spec.group_mapping.emplace_back(raw, label.get<std::string>());
    std::sort(spec.group_mapping.begin(), spec.group_mapping.end());
    if (j.contains("group_order")) {
        // Optional explicit label order; otherwise labels appear in the sorted
        // raw-value order of the mapping.
        const auto order = j.at("group_order").get<std::vector<std::string>>();
        std::stable_sort(spec.group_mapping.begin(), spec.group_mapping.end(),
                         [&](const auto& a, const auto& b) {
                             const auto pa = std::find(order.begin(), order.end(), a.second);
                             const auto pb = std::find(order.begin(), order.end(), b.second);
                             return pa < pb;
                         });
    }
    spec.drop_unmapped = j.value("drop_unmapped", false);
    if (j.contains("columns")) spec.columns = j.at("columns").get<std::vector<std::string>>();
    spec.subsample = j.value("subsample", 500);
    spec.standardize = j.value("standardize", true);
    spec.k = j.value("k", 5);
    spec.p = j.value("p", 1.0);
    return spec;
}

DatasetSpec DatasetSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset spec: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string DatasetSpec::to_json_text() const {
    nlohmann::json j;
    j["name"] = name;
    j["path"] = path;
    j["delimiter"] = std::string(1, delimiter);
    j["feature_columns"] = feature_columns;
    j["group_column"] = group_column;
    nlohmann::json mapping = nlohmann::json::object();
    std::vector<std::string> order;
    for (const auto& [raw, label] : group_mapping) {
        mapping[raw] = label;
        if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
    }
    j["group_mapping"] = mapping;
    j["group_order"] = order;
    j["drop_unmapped"] = drop_unmapped;
    if (!columns.empty()) j["columns"] = columns;
    j["subsample"] = subsample;
    j["standardize"] = standardize;
    j["k"] = k;
    j["p"] = p;
    return j.dump(2);
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    if (a == std::string::npos) return {};
    return s.substr(a, b - a + 1);
}

}  // namespace

Instance load(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + spec.path);

    std::string line;
    std::vector<std::string> header;
    if (spec.columns.empty()) {
        if (!std::getline(in, line)) throw std::runtime_error("dataset file is empty: " + spec.path);
        header = split_line(line, spec.delimiter);
    } else {
        header = spec.columns;  // headerless file
    }

    auto column_of = [&](const std::string& name) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (trim(header[c]) == name) return static_cast<int>(c);
        throw std::runtime_error("dataset column not found: " + name);
    };
    std::vector<int> feat_cols;
    for (const auto& f : spec.feature_columns) feat_cols.push_back(column_of(f));
    const int group_col = column_of(spec.group_column);

    std::map<std::string, std::string> mapping(spec.group_mapping.begin(),
                                               spec.group_mapping.end());
    std::vector<std::string> label_order;
    for (const auto& [raw, label] : spec.group_mapping)
        if (std::find(label_order.begin(), label_order.end(), label) == label_order.end())
            label_order.push_back(label);

    std::vector<std::vector<double>> features;
    std::vector<int> row_group;
    int row_index = 0;
    while (static_cast<int>(features.size()) < spec.subsample && std::getline(in, line)) {
        ++row_index;
        if (trim(line).empty()) continue;
        const auto fields = split_line(line, spec.delimiter);
        if (fields.size() != header.size())
            throw std::runtime_error("malformed row " + std::to_string(row_index) + " in " +
                                     spec.path);
        std::vector<double> feat;
        for (int c : feat_cols) {
            const std::string cell = trim(fields[static_cast<std::size_t>(c)]);
            try {
                std::size_t used = 0;
                feat.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("non-numeric feature '" + cell + "' at row " +
                                         std::to_string(row_index));
            }
        }
        const std::string raw = trim(fields[static_cast<std::size_t>(group_col)]);
        const auto it = mapping.find(raw);
        if (it == mapping.end()) {
            if (spec.drop_unmapped) continue;
            throw std::runtime_error("unmapped group value '" + raw + "' at row " +
                                     std::to_string(row_index));
        }
        const auto pos = std::find(label_order.begin(), label_order.end(), it->second);
        row_group.push_back(static_cast<int>(pos - label_order.begin()));
        features.push_back(std::move(feat));
    }
    if (features.empty()) throw std::runtime_error("no data rows in " + spec.path);

    const int n = static_cast<int>(features.size());
    const int dims = static_cast<int>(features[0].size());

    if (spec.standardize) {
        std::vector<int> keep;
        for (int c = 0; c < dims; ++c) {
            double mean = 0.0;
            for (const auto& row : features) mean += row[static_cast<std::size_t>(c)];
            mean /= n;
            double var = 0.0;
            for (const auto& row : features) {
                const double d = row[static_cast<std::size_t>(c)] - mean;
                var += d * d;
            }
            var /= n;
            if (var <= 1e-15) {
                std::fprintf(stderr, "fairclust: warning: dropping constant column %s in %s\n",
                             spec.feature_columns[static_cast<std::size_t>(c)].c_str(), spec.name.c_str());
                continue;
            }
            const double sd = std::sqrt(var);
            for (auto& row : features) row[static_cast<std::size_t>(c)] = (row[static_cast<std::size_t>(c)] - mean) / sd;
            keep.push_back(c);
        }
        if (static_cast<int>(keep.size()) != dims) {
            for (auto& row : features) {
                std::vector<double> nr;
                for (int c : keep) nr.push_back(row[static_cast<std::size_t>(c)]);
                row = std::move(nr);
            }
        }
    }

    std::vector<Group> groups(label_order.size());
    for (std::size_t g = 0; g < label_order.size(); ++g) groups[g].label = label_order[g];
    std::vector<int> group_size(label_order.size(), 0);
    for (int i = 0; i < n; ++i) ++group_size[static_cast<std::size_t>(row_group[static_cast<std::size_t>(i)])];
    for (int i = 0; i < n; ++i) {
        const int g = row_group[static_cast<std::size_t>(i)];
        groups[static_cast<std::size_t>(g)].members.push_back(
            {i, 1.0 / static_cast<double>(group_size[static_cast<std::size_t>(g)])});
    }
    // A mapped label with no observed rows would make an empty group; drop it.
    std::vector<Group> nonempty;
    for (auto& g : groups)
        if (!g.members.empty()) nonempty.push_back(std::move(g));

    std::vector<PointId> ids(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
    return Instance::from_points(features, ids, ids, std::move(nonempty), spec.k, spec.p);
}

namespace {

struct SynthColumn {
    std::string name;
};

void write_rows(std::ofstream& out, std::mt19937& rng, int rows, int dims, int blobs,
                const std::vector<std::string>& group_values,
                const std::vector<double>& group_probs, const char* group_header,
                const std::vector<std::string>& feature_names) {
    out << "id";
    for (const auto& f : feature_names) out << ',' << f;
    out << ',' << group_header << "\n";

    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Blob centers first so the geometry is independent of row randomness.
    std::vector<std::vector<double>> centers(static_cast<std::size_t>(blobs),
                                             std::vector<double>(static_cast<std::size_t>(dims)));
    for (auto& c : centers)
        for (double& v : c) v = 6.0 * unit(rng);

    for (int r = 0; r < rows; ++r) {
        // Group pick correlates mildly with the blob to give the groups
        // different cost geometry.
        const int blob = static_cast<int>(u01(rng) * blobs) % blobs;
        double pick = u01(rng);
        std::size_t gi = 0;
        double acc = 0.0;
        for (std::size_t g = 0; g < group_probs.size(); ++g) {
            double pr = group_probs[g];
            if (static_cast<int>(g) == blob % static_cast<int>(group_probs.size())) pr *= 1.6;
            acc += pr;
            if (pick * 1.12 <= acc || g + 1 == group_probs.size()) {
                gi = g;
                break;
            }
        }
        out << r;
        char buf[32];
        for (int c = 0; c < dims; ++c) {
            const double v = centers[static_cast<std::size_t>(blob)][static_cast<std::size_t>(c)] + unit(rng) +
                             (c % 3 == 0 ? 0.4 * unit(rng) * unit(rng) : 0.0);
            std::snprintf(buf, sizeof(buf), "%.6f", v);
            out << ',' << buf;
        }
        out << ',' << group_values[gi] << "\n";
    }
}

}  // namespace

DatasetSpec write_synthetic_dataset(SyntheticKind kind, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write synthetic dataset: " + csv_path);

    DatasetSpec spec;
    spec.path = csv_path;
    spec.subsample = 500;
    spec.standardize = true;

    switch (kind) {
        case SyntheticKind::Credit: {
            std::mt19937 rng(20240501);
            std::vector<std::string> features;
            for (int i = 1; i <= 10; ++i) features.push_back("f" + std::to_string(i));
            write_rows(out, rng, 500, 10, 6, {"graduate_school", "university", "high_school", "other"},
                       {0.22, 0.33, 0.30, 0.15}, "education", features);
            spec.name = "Credit-500";
            spec.feature_columns = features;
            spec.group_column = "education";
            spec.group_mapping = {{"graduate_school", "higher"},
                                  {"university", "higher"},
                                  {"high_school", "lower"},
                                  {"other", "lower"}};
            break;
        }
        case SyntheticKind::Compas: {
            std::mt19937 rng(20240502);
            std::vector<std::string> features;
            for (int i = 1; i <= 7; ++i) features.push_back("f" + std::to_string(i));
            write_rows(out, rng, 500, 7, 4, {"African-American", "Caucasian"}, {0.58, 0.42},
                       "race", features);
            spec.name = "COMPAS-500";
            spec.feature_columns = features;
            spec.group_column = "race";
            spec.group_mapping = {{"African-American", "African-American"},
                                  {"Caucasian", "Caucasian"}};
            break;
        }
        case SyntheticKind::Adult: {
            std::mt19937 rng(20240503);
            std::vector<std::string> features;
            for (int i = 1; i <= 12; ++i) features.push_back("f" + std::to_string(i));
            write_rows(out, rng, 500, 12, 5,
                       {"Amer-Indian-Eskimo", "Asian-Pac-Islander", "Black", "White", "Other"},
                       {0.08, 0.10, 0.18, 0.55, 0.09}, "race", features);
            spec.name = "Adult-500";
            spec.feature_columns = features;
            spec.group_column = "race";
            spec.group_mapping = {{"Amer-Indian-Eskimo", "Amer-Indian-Eskimo"},
                                  {"Asian-Pac-Islander", "Asian-Pac-Islander"},
                                  {"Black", "Black"},
                                  {"White", "White"},
                                  {"Other", "Other"}};
            break;
        }
    }
    return spec;
}

}  // namespace fairclust
