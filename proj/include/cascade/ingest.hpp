#pragma once

#include "cascade/rng.hpp"
#include "cascade/types.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cascade {

// Single-consumer ordered source of flow records.
class RecordSource {
public:
    virtual ~RecordSource() = default;
    virtual std::optional<FlowRecord> next() = 0;
};

// In-memory source, mostly for tests.
class VectorSource : public RecordSource {
public:
    explicit VectorSource(std::vector<FlowRecord> records) : records_(std::move(records)) {}
    std::optional<FlowRecord> next() override {
        if (pos_ >= records_.size()) return std::nullopt;
        return records_[pos_++];
    }

private:
    std::vector<FlowRecord> records_;
    std::size_t pos_ = 0;
};

// How to read a flow CSV: which column is the label, which columns are
// features, how label strings map onto the class catalogue.
struct SchemaConfig {
    std::string label_column;
    std::vector<std::string> feature_columns;     // empty = all numeric columns except the label
    std::vector<std::string> class_names;         // ordered; defines the LabelSpace
    std::string normal_name;
    std::map<std::string, std::string> class_map; // label value -> class name; empty = identity

    LabelSpace label_space() const;

    // Maps an observed label value to a class id, -1 when unmappable.
    int map_label(const std::string& value, const LabelSpace& space) const;
};

// Parses a schema file of `key = value` lines (keys: label_column, classes,
// normal_name, features, map.<label>).
SchemaConfig read_schema_file(const std::string& path);

// Streams a CICFlowMeter-shaped CSV as FlowRecords. Records get consecutive
// arrival indices from 0; NaN/Inf feature cells are sanitized to 0.0.
class CsvFlowReader : public RecordSource {
public:
    CsvFlowReader(const std::string& path, SchemaConfig schema);

    std::optional<FlowRecord> next() override;

    const LabelSpace& label_space() const { return space_; }
    int feature_count() const { return static_cast<int>(feature_indices_.size()); }
    const std::vector<std::string>& feature_names() const { return feature_names_; }

private:
    void parse_header_and_bind();

    std::string path_;
    SchemaConfig schema_;
    LabelSpace space_;
    std::ifstream in_;
    std::size_t label_index_ = 0;
    std::vector<std::size_t> feature_indices_;
    std::vector<std::string> feature_names_;
    std::size_t column_count_ = 0;
    std::int64_t next_arrival_ = 0;
    std::size_t line_number_ = 1;  // header is line 1
    bool header_bound_ = false;
    bool pending_first_data_line_ = false;
    std::string first_data_line_;
};

// Running per-feature min/max; maps features into [0, 1].
class OnlineNormalizer {
public:
    explicit OnlineNormalizer(int n_features);

    // Updates the running ranges with the raw record first, then rescales.
    // A feature whose range is still degenerate (min == max) maps to 0.
    FlowRecord normalize(FlowRecord record);

    const Eigen::VectorXd& mins() const { return min_; }
    const Eigen::VectorXd& maxs() const { return max_; }

private:
    Eigen::VectorXd min_, max_;
    bool seen_any_ = false;
};

// Per-class diagonal Gaussian profile for the synthetic stream.
struct ClassProfile {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

// Additive mean shift applied to one class from arrival_index onward.
struct DriftPoint {
    std::int64_t arrival_index = 0;
    int class_id = 0;
    Eigen::VectorXd shift;
};

struct SyntheticSpec {
    std::int64_t n_instances = 0;
    int n_features = 0;
    std::vector<std::string> class_names;
    int normal_id = 0;
    std::vector<double> priors;
    std::vector<ClassProfile> profiles;
    std::vector<DriftPoint> drift_points;  // sorted by arrival_index
    std::uint64_t seed = 0;

    LabelSpace label_space() const { return LabelSpace(class_names, normal_id); }

    void validate() const;  // throws ConfigError on any violated invariant
};

// Parses a synthetic-spec file (`key = value`, repeated `drift = ...` lines).
SyntheticSpec read_synthetic_spec(const std::string& path);

// Deterministic labeled Gaussian stream with injectable mean-shift drift.
class SyntheticStream : public RecordSource {
public:
    explicit SyntheticStream(SyntheticSpec spec);

    std::optional<FlowRecord> next() override;

    const LabelSpace& label_space() const { return space_; }

private:
    SyntheticSpec spec_;
    LabelSpace space_;
    Rng rng_;
    std::int64_t produced_ = 0;
    std::vector<Eigen::VectorXd> active_shift_;  // per class, cumulative
    std::size_t next_drift_ = 0;
};

// Convenience: materializes a full synthetic stream.
std::vector<FlowRecord> generate_synthetic(const SyntheticSpec& spec);

// Writes a stream in the ingest CSV shape (header f0..fN-1,label). Reals are
// printed with 9 significant digits so generate -> ingest round-trips.
void write_stream_csv(const std::string& path, RecordSource& source, const LabelSpace& space,
                      int n_features);

}  // namespace cascade
