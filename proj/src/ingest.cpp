#include "cascade/ingest.hpp"

#include "cascade/errors.hpp"
#include "cascade/kv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace cascade {

namespace {

// Parses a feature cell. Returns false when the cell is not numeric at all;
// non-finite values come back as 0.0 per the sanitization rule.
bool parse_feature_cell(const std::string& cell, double& out) {
    const std::string t = trim(cell);
    if (t.empty()) return false;
    double value = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return false;
    out = std::isfinite(value) ? value : 0.0;
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::string stripped = line;
    if (!stripped.empty() && stripped.back() == '\r') stripped.pop_back();
    return split(stripped, ',');
}

}  // namespace

LabelSpace SchemaConfig::label_space() const {
    const int normal = static_cast<int>(
        std::find(class_names.begin(), class_names.end(), normal_name) - class_names.begin());
    if (normal == static_cast<int>(class_names.size())) {
        throw SchemaError("schema: normal class '" + normal_name + "' not in class list");
    }
    return LabelSpace(class_names, normal);
}

int SchemaConfig::map_label(const std::string& value, const LabelSpace& space) const {
    if (!class_map.empty()) {
        const auto it = class_map.find(value);
        if (it == class_map.end()) return -1;
        return space.id_of(it->second);
    }
    return space.id_of(value);
}

SchemaConfig read_schema_file(const std::string& path) {
    const KvFile kv = parse_kv_file(path);
    SchemaConfig schema;
    schema.label_column = kv.get("label_column");
    if (schema.label_column.empty()) {
        throw SchemaError(path + ": missing 'label_column'");
    }
    const std::string classes = kv.get("classes");
    if (classes.empty()) {
        throw SchemaError(path + ": missing 'classes'");
    }
    for (const auto& name : split(classes, ',')) {
        schema.class_names.push_back(trim(name));
    }
    schema.normal_name = kv.get("normal_name");
    if (schema.normal_name.empty()) {
        throw SchemaError(path + ": missing 'normal_name'");
    }
    const std::string features = kv.get("features");
    if (!features.empty()) {
        for (const auto& name : split(features, ',')) {
            schema.feature_columns.push_back(trim(name));
        }
    }
    for (const auto& [key, value, line] : kv.entries) {
        if (key.rfind("map.", 0) == 0) {
            schema.class_map[key.substr(4)] = value;
        }
    }
    // Validate basic shape early; the reader validates against the header.
    if (std::find(schema.feature_columns.begin(), schema.feature_columns.end(),
                  schema.label_column) != schema.feature_columns.end()) {
        throw SchemaError(path + ": label column '" + schema.label_column + "' listed as a feature");
    }
    if (!schema.class_map.empty()) {
        for (const auto& [from, to] : schema.class_map) {
            if (std::find(schema.class_names.begin(), schema.class_names.end(), to) ==
                schema.class_names.end()) {
                throw SchemaError(path + ": map." + from + " targets unknown class '" + to + "'");
            }
        }
    }
    return schema;
}

CsvFlowReader::CsvFlowReader(const std::string& path, SchemaConfig schema)
    : path_(path), schema_(std::move(schema)), space_(schema_.label_space()), in_(path) {
    if (!in_) {
        throw DataError("cannot open '" + path + "'");
    }
    parse_header_and_bind();
}

void CsvFlowReader::parse_header_and_bind() {
    std::string header_line;
    if (!std::getline(in_, header_line)) {
        throw DataError(path_ + ": missing header row");
    }
    const std::vector<std::string> header = split_csv_line(header_line);
    column_count_ = header.size();

    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < header.size(); ++i) {
        by_name[trim(header[i])] = i;
    }
    const auto label_it = by_name.find(schema_.label_column);
    if (label_it == by_name.end()) {
        throw SchemaError(path_ + ": label column '" + schema_.label_column + "' not in header");
    }
    label_index_ = label_it->second;

    if (!schema_.feature_columns.empty()) {
        for (const auto& name : schema_.feature_columns) {
            const auto it = by_name.find(name);
            if (it == by_name.end()) {
                throw SchemaError(path_ + ": feature column '" + name + "' not in header");
            }
            feature_indices_.push_back(it->second);
            feature_names_.push_back(name);
        }
        header_bound_ = true;
        return;
    }

    // Default feature set: every column, except the label, whose cell in the
    // first data row parses as a number (or a NaN/Inf token).
    std::string first_data;
    if (!std::getline(in_, first_data)) {
        // Header-only file: an empty stream with no features.
        header_bound_ = true;
        return;
    }
    ++line_number_;
    const std::vector<std::string> cells = split_csv_line(first_data);
    if (cells.size() != column_count_) {
        throw DataError(path_ + ":" + std::to_string(line_number_) + ": expected " +
                        std::to_string(column_count_) + " cells, got " + std::to_string(cells.size()));
    }
    double ignored = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i == label_index_) continue;
        if (parse_feature_cell(cells[i], ignored)) {
            feature_indices_.push_back(i);
            feature_names_.push_back(trim(header[i]));
        }
    }
    pending_first_data_line_ = true;
    first_data_line_ = first_data;
    header_bound_ = true;
}

std::optional<FlowRecord> CsvFlowReader::next() {
    std::string line;
    if (pending_first_data_line_) {
        line = first_data_line_;
        pending_first_data_line_ = false;
    } else {
        if (!std::getline(in_, line)) return std::nullopt;
        ++line_number_;
        if (trim(line).empty()) return next();  // skip stray blank lines
    }

    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != column_count_) {
        throw DataError(path_ + ":" + std::to_string(line_number_) + ": expected " +
                        std::to_string(column_count_) + " cells, got " + std::to_string(cells.size()));
    }

    FlowRecord record;
    record.arrival_index = next_arrival_++;
    record.features.resize(static_cast<Eigen::Index>(feature_indices_.size()));
    for (std::size_t f = 0; f < feature_indices_.size(); ++f) {
        double value = 0.0;
        if (!parse_feature_cell(cells[feature_indices_[f]], value)) {
            throw DataError(path_ + ":" + std::to_string(line_number_) + ": column '" +
                            feature_names_[f] + "': non-numeric cell '" +
                            trim(cells[feature_indices_[f]]) + "'");
        }
        record.features[static_cast<Eigen::Index>(f)] = value;
    }

    const std::string label = trim(cells[label_index_]);
    const int cls = schema_.map_label(label, space_);
    if (cls < 0) {
        throw DataError(path_ + ":" + std::to_string(line_number_) + ": unmappable label '" +
                        label + "'");
    }
    record.true_class = cls;
    return record;
}

OnlineNormalizer::OnlineNormalizer(int n_features)
    : min_(Eigen::VectorXd::Zero(n_features)), max_(Eigen::VectorXd::Zero(n_features)) {}

FlowRecord OnlineNormalizer::normalize(FlowRecord record) {
    if (record.features.size() != min_.size()) {
        throw std::invalid_argument("OnlineNormalizer: feature arity mismatch");
    }
    if (!seen_any_) {
        min_ = record.features;
        max_ = record.features;
        seen_any_ = true;
    } else {
        min_ = min_.cwiseMin(record.features);
        max_ = max_.cwiseMax(record.features);
    }
    for (Eigen::Index i = 0; i < record.features.size(); ++i) {
        const double range = max_[i] - min_[i];
        record.features[i] = range > 0.0 ? (record.features[i] - min_[i]) / range : 0.0;
    }
    return record;
}

void SyntheticSpec::validate() const {
    if (n_instances <= 0) throw ConfigError("synthetic spec: n_instances must be positive");
    if (n_features <= 0) throw ConfigError("synthetic spec: n_features must be positive");
    if (class_names.size() < 2) throw ConfigError("synthetic spec: need at least two classes");
    if (priors.size() != class_names.size() || profiles.size() != class_names.size()) {
        throw ConfigError("synthetic spec: priors/profiles must cover every class");
    }
    double sum = 0.0;
    for (const double p : priors) {
        if (p < 0.0) throw ConfigError("synthetic spec: negative prior");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ConfigError("synthetic spec: priors sum to " + std::to_string(sum) + ", expected 1");
    }
    for (const auto& profile : profiles) {
        if (profile.mean.size() != n_features || profile.stddev.size() != n_features) {
            throw ConfigError("synthetic spec: profile arity does not match n_features");
        }
        if ((profile.stddev.array() < 0.0).any()) {
            throw ConfigError("synthetic spec: negative stddev");
        }
    }
    for (std::size_t i = 0; i < drift_points.size(); ++i) {
        const auto& d = drift_points[i];
        if (d.class_id < 0 || d.class_id >= static_cast<int>(class_names.size())) {
            throw ConfigError("synthetic spec: drift class id out of range");
        }
        if (d.shift.size() != n_features) {
            throw ConfigError("synthetic spec: drift shift arity does not match n_features");
        }
        if (i > 0 && drift_points[i - 1].arrival_index > d.arrival_index) {
            throw ConfigError("synthetic spec: drift points must be sorted by arrival index");
        }
    }
    label_space();  // validates normal/attack structure
}

namespace {

Eigen::VectorXd to_feature_vector(const std::vector<double>& values, int n_features,
                                  const std::string& context) {
    if (values.size() == 1) {
        return Eigen::VectorXd::Constant(n_features, values[0]);
    }
    if (static_cast<int>(values.size()) != n_features) {
        throw ConfigError(context + ": expected 1 or " + std::to_string(n_features) +
                          " values, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), n_features);
}

}  // namespace

SyntheticSpec read_synthetic_spec(const std::string& path) {
    const KvFile kv = parse_kv_file(path);
    SyntheticSpec spec;
    spec.n_instances = kv.get_int("n_instances", 0);
    spec.n_features = static_cast<int>(kv.get_int("n_features", 0));
    spec.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));

    const std::string classes = kv.get("classes");
    if (classes.empty()) throw ConfigError(path + ": missing 'classes'");
    for (const auto& name : split(classes, ',')) {
        spec.class_names.push_back(trim(name));
    }
    const std::string normal = kv.get("normal_name");
    if (normal.empty()) throw ConfigError(path + ": missing 'normal_name'");
    spec.normal_id = static_cast<int>(
        std::find(spec.class_names.begin(), spec.class_names.end(), normal) -
        spec.class_names.begin());
    if (spec.normal_id == static_cast<int>(spec.class_names.size())) {
        throw ConfigError(path + ": normal class '" + normal + "' not in class list");
    }

    if (!kv.has("priors")) throw ConfigError(path + ": missing 'priors'");
    spec.priors = parse_real_list(kv.get("priors"), path + ": priors");

    spec.profiles.resize(spec.class_names.size());
    for (std::size_t c = 0; c < spec.class_names.size(); ++c) {
        const std::string mean_key = "mean." + spec.class_names[c];
        const std::string std_key = "stddev." + spec.class_names[c];
        if (!kv.has(mean_key)) throw ConfigError(path + ": missing '" + mean_key + "'");
        if (!kv.has(std_key)) throw ConfigError(path + ": missing '" + std_key + "'");
        spec.profiles[c].mean = to_feature_vector(
            parse_real_list(kv.get(mean_key), path + ": " + mean_key), spec.n_features,
            path + ": " + mean_key);
        spec.profiles[c].stddev = to_feature_vector(
            parse_real_list(kv.get(std_key), path + ": " + std_key), spec.n_features,
            path + ": " + std_key);
    }

    for (const auto& [key, value, line] : kv.entries) {
        if (key != "drift") continue;
        const std::string context = path + ":" + std::to_string(line) + ": drift";
        const auto parts = split(value, ',');
        if (parts.size() < 3) {
            throw ConfigError(context + ": expected 'index,class,shift-vector'");
        }
        DriftPoint d;
        d.arrival_index = parse_integer(parts[0], context + " index");
        const std::string cls = trim(parts[1]);
        const auto it = std::find(spec.class_names.begin(), spec.class_names.end(), cls);
        if (it == spec.class_names.end()) {
            throw ConfigError(context + ": unknown class '" + cls + "'");
        }
        d.class_id = static_cast<int>(it - spec.class_names.begin());
        // Everything after the second comma is the shift vector.
        std::string shift_text = parts[2];
        for (std::size_t i = 3; i < parts.size(); ++i) shift_text += " " + parts[i];
        d.shift = to_feature_vector(parse_real_list(shift_text, context + " shift"),
                                    spec.n_features, context + " shift");
        spec.drift_points.push_back(std::move(d));
    }

    spec.validate();
    return spec;
}

SyntheticStream::SyntheticStream(SyntheticSpec spec)
    : spec_(std::move(spec)), space_(spec_.label_space()), rng_(spec_.seed) {
    spec_.validate();
    active_shift_.assign(spec_.class_names.size(), Eigen::VectorXd::Zero(spec_.n_features));
}

std::optional<FlowRecord> SyntheticStream::next() {
    if (produced_ >= spec_.n_instances) return std::nullopt;
    const std::int64_t index = produced_++;

    while (next_drift_ < spec_.drift_points.size() &&
           spec_.drift_points[next_drift_].arrival_index <= index) {
        const auto& d = spec_.drift_points[next_drift_];
        active_shift_[static_cast<std::size_t>(d.class_id)] += d.shift;
        ++next_drift_;
    }

    const double u = rng_.uniform01();
    int cls = static_cast<int>(spec_.priors.size()) - 1;
    double cumulative = 0.0;
    for (std::size_t c = 0; c < spec_.priors.size(); ++c) {
        cumulative += spec_.priors[c];
        if (u < cumulative) {
            cls = static_cast<int>(c);
            break;
        }
    }

    const auto& profile = spec_.profiles[static_cast<std::size_t>(cls)];
    FlowRecord record;
    record.arrival_index = index;
    record.true_class = cls;
    record.features.resize(spec_.n_features);
    for (int f = 0; f < spec_.n_features; ++f) {
        record.features[f] = profile.mean[f] + active_shift_[static_cast<std::size_t>(cls)][f] +
                             profile.stddev[f] * rng_.gaussian();
    }
    return record;
}

std::vector<FlowRecord> generate_synthetic(const SyntheticSpec& spec) {
    SyntheticStream stream(spec);
    std::vector<FlowRecord> records;
    records.reserve(static_cast<std::size_t>(spec.n_instances));
    while (auto record = stream.next()) {
        records.push_back(std::move(*record));
    }
    return records;
}

void write_stream_csv(const std::string& path, RecordSource& source, const LabelSpace& space,
                      int n_features) {
    std::FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (int f = 0; f < n_features; ++f) {
        std::fprintf(out, "f%d,", f);
    }
    std::fprintf(out, "label\n");
    while (auto record = source.next()) {
        for (Eigen::Index f = 0; f < record->features.size(); ++f) {
            std::fprintf(out, "%.9g,", record->features[f]);
        }
        std::fprintf(out, "%s\n", space.name(record->true_class).c_str());
    }
    std::fclose(out);
}

}  // namespace cascade
