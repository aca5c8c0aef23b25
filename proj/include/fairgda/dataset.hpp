#ifndef FAIRGDA_DATASET_HPP
#define FAIRGDA_DATASET_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fairgda/core_math.hpp"
#include "fairgda/errors.hpp"

namespace fairgda {

// Binary-label, binary-sensitive-attribute sample set.
// Rows are immutable after construction; the group index sets are
// derived from z once and kept in sync by construction.
struct Dataset {
    std::vector<Vector> features;  // N rows of n entries each
    Vector labels;                 // y in {0,1}
    Vector sensitive;              // z in {0,1}
    std::vector<std::size_t> group0;  // indices with z = 0
    std::vector<std::size_t> group1;  // indices with z = 1

    std::size_t size() const { return features.size(); }
    std::size_t dim() const { return features.empty() ? 0 : features[0].size(); }

    void rebuild_groups() {
        group0.clear();
        group1.clear();
        for (std::size_t i = 0; i < sensitive.size(); ++i) {
            (sensitive[i] == 0.0 ? group0 : group1).push_back(i);
        }
    }

    void validate() const {
        if (size() < 2) throw data_error("dataset: need at least 2 samples");
        if (labels.size() != size() || sensitive.size() != size()) {
            throw data_error("dataset: column length mismatch");
        }
        if (group0.empty() || group1.empty()) {
            throw data_error("dataset: both sensitive groups must be non-empty");
        }
        for (const auto& row : features) {
            if (row.size() != dim()) throw data_error("dataset: ragged feature rows");
            for (double v : row) {
                if (!std::isfinite(v)) throw data_error("dataset: non-finite feature");
            }
        }
    }
};

enum class AugmentMode { bias, noise };

// Dataset with the extra trailing column: fixed 1 (bias) or a per-sample
// uniform [0,1] draw frozen at construction time.
struct AugmentedDataset {
    Dataset base;
    AugmentMode mode = AugmentMode::bias;
    std::vector<Vector> augmented;  // N rows of n+1 entries

    std::size_t size() const { return base.size(); }
    std::size_t dim() const { return base.dim() + 1; }
};

inline AugmentedDataset augment(const Dataset& data, AugmentMode mode,
                                std::uint64_t seed) {
    AugmentedDataset out;
    out.base = data;
    out.mode = mode;
    out.augmented.reserve(data.size());
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& row : data.features) {
        Vector r = row;
        r.push_back(mode == AugmentMode::bias ? 1.0 : uni(rng));
        out.augmented.push_back(std::move(r));
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && b != e;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

enum class ColumnRole { feature, label, sensitive, drop };

// Column-name -> role map. Columns absent from the map are features.
using CsvSchema = std::map<std::string, ColumnRole>;

// Loads a header-full CSV. Categorical feature columns (any non-numeric
// cell) are one-hot encoded over their sorted distinct values; numeric
// features are min-max scaled into [0,1]; label and sensitive cells must
// already be 0 or 1.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw data_error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw data_error("load_csv: empty file '" + path + "'");
    std::vector<std::string> header = detail::split_line(line);
    for (auto& h : header) h = detail::trim(h);

    std::vector<ColumnRole> roles(header.size(), ColumnRole::feature);
    int label_col = -1, sensitive_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto it = schema.find(header[c]);
        if (it == schema.end()) continue;
        roles[c] = it->second;
        if (it->second == ColumnRole::label) label_col = static_cast<int>(c);
        if (it->second == ColumnRole::sensitive) sensitive_col = static_cast<int>(c);
    }
    if (label_col < 0) throw data_error("load_csv: no label column in '" + path + "'");
    if (sensitive_col < 0) throw data_error("load_csv: no sensitive column in '" + path + "'");

    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_line(line);
        if (cells.size() != header.size()) {
            throw data_error("load_csv: row " + std::to_string(lineno) +
                             " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(header.size()));
        }
        for (auto& c : cells) c = detail::trim(c);
        rows.push_back(std::move(cells));
    }
    if (rows.size() < 2) throw data_error("load_csv: need at least 2 data rows");

    // Classify each feature column as numeric or categorical.
    std::vector<bool> is_numeric(header.size(), true);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (roles[c] != ColumnRole::feature) continue;
        for (const auto& row : rows) {
            double v;
            if (!detail::parse_double(row[c], v)) {
                is_numeric[c] = false;
                break;
            }
        }
    }

    std::vector<std::vector<std::string>> levels(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (roles[c] != ColumnRole::feature || is_numeric[c]) continue;
        std::set<std::string> distinct;
        for (const auto& row : rows) distinct.insert(row[c]);
        levels[c].assign(distinct.begin(), distinct.end());
    }

    Dataset out;
    out.features.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Vector feat;
        for (std::size_t c = 0; c < header.size(); ++c) {
            switch (roles[c]) {
                case ColumnRole::drop:
                    break;
                case ColumnRole::feature: {
                    if (is_numeric[c]) {
                        double v;
                        detail::parse_double(rows[r][c], v);
                        feat.push_back(v);
                    } else {
                        for (const auto& lv : levels[c]) {
                            feat.push_back(rows[r][c] == lv ? 1.0 : 0.0);
                        }
                    }
                    break;
                }
                case ColumnRole::label:
                case ColumnRole::sensitive: {
                    const std::string& s = rows[r][c];
                    if (s != "0" && s != "1") {
                        throw data_error("load_csv: row " + std::to_string(r + 2) +
                                         " column '" + header[c] +
                                         "' must be 0 or 1, got '" + s + "'");
                    }
                    const double v = (s == "1") ? 1.0 : 0.0;
                    if (roles[c] == ColumnRole::label) {
                        out.labels.push_back(v);
                    } else {
                        out.sensitive.push_back(v);
                    }
                    break;
                }
            }
        }
        out.features.push_back(std::move(feat));
    }

    // Min-max scale numeric feature columns so min -> 0 and max -> 1 exactly.
    // One-hot columns are already in {0,1} and the scale map is the identity
    // for them, so a cached Dataset round-trips bit-exactly.
    const std::size_t n = out.dim();
    for (std::size_t j = 0; j < n; ++j) {
        double lo = out.features[0][j], hi = out.features[0][j];
        for (const auto& row : out.features) {
            lo = std::min(lo, row[j]);
            hi = std::max(hi, row[j]);
        }
        const double range = hi - lo;
        for (auto& row : out.features) {
            row[j] = (range == 0.0) ? 0.0 : (row[j] - lo) / range;
        }
    }

    out.rebuild_groups();
    out.validate();
    return out;
}

// Raises corr(y, z) to target_corr by flipping labels toward z, one
// uniformly sampled disagreeing index at a time. Features and z never
// change, and every flip strictly increases the correlation.
inline Dataset make_synthetic(const Dataset& base, double target_corr,
                              std::uint64_t seed) {
    base.validate();
    if (target_corr <= 0.0 || target_corr > 1.0) {
        throw data_error("make_synthetic: target correlation must be in (0,1]");
    }
    constexpr double kTol = 0.02;

    Dataset out = base;
    double corr = pearson_correlation(out.labels, out.sensitive);
    if (corr > target_corr + kTol) {
        throw data_error("make_synthetic: base correlation already above target");
    }
    if (target_corr >= 1.0) {
        out.labels = out.sensitive;  // perfect correlation forces y = z
        return out;
    }

    std::mt19937_64 rng(seed);
    while (std::abs(corr - target_corr) > kTol && corr < target_corr) {
        std::vector<std::size_t> disagree;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (out.labels[i] != out.sensitive[i]) disagree.push_back(i);
        }
        if (disagree.empty()) break;  // y = z, corr = 1 >= any target
        std::uniform_int_distribution<std::size_t> pick(0, disagree.size() - 1);
        const std::size_t i = disagree[pick(rng)];
        out.labels[i] = out.sensitive[i];
        corr = pearson_correlation(out.labels, out.sensitive);
    }
    if (std::abs(corr - target_corr) > kTol) {
        throw data_error("make_synthetic: target correlation unreachable");
    }
    return out;
}

// Disjoint train/test partition, stratified over the four (y, z) cells.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction,
                                         std::uint64_t seed) {
    data.validate();
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw data_error("split: test fraction must be in (0,1)");
    }

    std::array<std::vector<std::size_t>, 4> cells;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int cell = static_cast<int>(data.labels[i]) * 2 +
                         static_cast<int>(data.sensitive[i]);
        cells[cell].push_back(i);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> test_idx, train_idx;
    for (auto& cell : cells) {
        // Fisher-Yates so the draw sequence is pinned to the seed.
        for (std::size_t k = cell.size(); k > 1; --k) {
            std::uniform_int_distribution<std::size_t> pick(0, k - 1);
            std::swap(cell[k - 1], cell[pick(rng)]);
        }
        const std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(cell.size())));
        for (std::size_t k = 0; k < cell.size(); ++k) {
            (k < n_test ? test_idx : train_idx).push_back(cell[k]);
        }
    }
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    auto collect = [&data](const std::vector<std::size_t>& idx) {
        Dataset d;
        for (std::size_t i : idx) {
            d.features.push_back(data.features[i]);
            d.labels.push_back(data.labels[i]);
            d.sensitive.push_back(data.sensitive[i]);
        }
        d.rebuild_groups();
        return d;
    };
    Dataset train = collect(train_idx), test = collect(test_idx);
    if (train.group0.empty() || train.group1.empty() || test.group0.empty() ||
        test.group1.empty() || train.size() < 2 || test.size() < 2) {
        throw data_error("split: dataset too small to stratify both groups");
    }
    return {std::move(train), std::move(test)};
}

// Cache format: header x_1..x_n,y,z; reloadable via load_csv with an
// identity schema (features already scaled, so scaling is a no-op).
inline void save_cache(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("save_cache: cannot write '" + path + "'");
    const std::size_t n = data.dim();
    for (std::size_t j = 0; j < n; ++j) out << "x_" << (j + 1) << ",";
    out << "y,z\n";
    char buf[64];
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.features[i][j]);
            out << buf << ",";
        }
        out << static_cast<int>(data.labels[i]) << ","
            << static_cast<int>(data.sensitive[i]) << "\n";
    }
}

inline CsvSchema cache_schema() {
    return {{"y", ColumnRole::label}, {"z", ColumnRole::sensitive}};
}

inline Dataset load_cache(const std::string& path) {
    return load_csv(path, cache_schema());
}

}  // namespace fairgda

#endif
