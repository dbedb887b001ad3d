#include "cascade/config.hpp"

#include "cascade/errors.hpp"
#include "cascade/kv.hpp"

#include <cctype>
#include <cstdlib>
#include <vector>

namespace cascade {

namespace {

double as_double(const std::string& key, const std::string& value) {
    return parse_real(value, "config key '" + key + "'");
}

std::int64_t as_int(const std::string& key, const std::string& value) {
    return parse_integer(value, "config key '" + key + "'");
}

bool as_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

void apply_hat_key(HatConfig& cfg, std::int64_t& warmup, const std::string& key,
                   const std::string& field, const std::string& value) {
    if (field == "delta") {
        cfg.delta = as_double(key, value);
    } else if (field == "grace_period") {
        cfg.grace_period = static_cast<int>(as_int(key, value));
    } else if (field == "tie_threshold") {
        cfg.tie_threshold = as_double(key, value);
    } else if (field == "drift_delta") {
        cfg.drift_delta = as_double(key, value);
    } else if (field == "n_bins") {
        cfg.n_bins = static_cast<int>(as_int(key, value));
    } else if (field == "warmup") {
        warmup = as_int(key, value);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

}  // namespace

void apply_config_key(RunConfig& config, const std::string& key, const std::string& value) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
        throw ConfigError("unknown config key '" + key + "' (expected section.key)");
    }
    const std::string section = key.substr(0, dot);
    const std::string field = key.substr(dot + 1);
    PipelineOptions& p = config.pipeline;

    if (section == "stage1") {
        apply_hat_key(p.stage1_cfg, p.stage1_warmup, key, field, value);
    } else if (section == "stage2") {
        apply_hat_key(p.stage2_cfg, p.stage2_warmup, key, field, value);
    } else if (section == "stage3") {
        if (field == "hidden_dim") {
            p.stage3.hidden_dim = static_cast<int>(as_int(key, value));
        } else if (field == "seq_len") {
            p.stage3.seq_len = static_cast<int>(as_int(key, value));
        } else if (field == "learning_rate") {
            p.stage3.learning_rate = as_double(key, value);
        } else if (field == "epochs") {
            p.stage3.epochs = static_cast<int>(as_int(key, value));
        } else if (field == "batch_size") {
            p.stage3.batch_size = static_cast<int>(as_int(key, value));
        } else if (field == "warmup_records") {
            p.stage3.warmup_records = as_int(key, value);
        } else if (field == "refresh_interval") {
            p.stage3.refresh_interval = as_int(key, value);
            p.stage4_refresh = p.stage3.refresh_interval;  // committees share the cadence
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else if (section == "stage4") {
        if (field == "rf_trees") {
            p.stage4.rf_trees = static_cast<int>(as_int(key, value));
        } else if (field == "rf_max_depth") {
            p.stage4.rf_max_depth = static_cast<int>(as_int(key, value));
        } else if (field == "rf_feature_subsample") {
            p.stage4.rf_feature_subsample = static_cast<int>(as_int(key, value));
        } else if (field == "knn_k") {
            p.stage4.knn_k = static_cast<int>(as_int(key, value));
        } else if (field == "svm_epochs") {
            p.stage4.svm_epochs = static_cast<int>(as_int(key, value));
        } else if (field == "svm_lambda") {
            p.stage4.svm_lambda = as_double(key, value);
        } else if (field == "train_buffer_size") {
            p.stage4.train_buffer_size = static_cast<int>(as_int(key, value));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else if (section == "select") {
        if (field == "buffer_size") {
            p.selection.buffer_size = static_cast<int>(as_int(key, value));
        } else if (field == "correlation_threshold") {
            p.selection.correlation_threshold = as_double(key, value);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else if (section == "run") {
        if (field == "seed") {
            config.seed = static_cast<std::uint64_t>(as_int(key, value));
        } else if (field == "mode") {
            if (value == "single") {
                p.mode = WorkerMode::single;
            } else if (value == "concurrent") {
                p.mode = WorkerMode::concurrent;
            } else {
                throw ConfigError("run.mode must be 'single' or 'concurrent', got '" + value + "'");
            }
        } else if (field == "normalize") {
            p.normalize = as_bool(key, value);
        } else if (field == "dataset") {
            config.dataset_name = value;
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

namespace {

// Keys overridable via FLOWCASCADE_* environment variables.
const std::vector<std::string> kConfigKeys = {
    "stage1.delta", "stage1.grace_period", "stage1.tie_threshold", "stage1.drift_delta",
    "stage1.n_bins", "stage1.warmup",
    "stage2.delta", "stage2.grace_period", "stage2.tie_threshold", "stage2.drift_delta",
    "stage2.n_bins", "stage2.warmup",
    "stage3.hidden_dim", "stage3.seq_len", "stage3.learning_rate", "stage3.epochs",
    "stage3.batch_size", "stage3.warmup_records", "stage3.refresh_interval",
    "stage4.rf_trees", "stage4.rf_max_depth", "stage4.rf_feature_subsample", "stage4.knn_k",
    "stage4.svm_epochs", "stage4.svm_lambda", "stage4.train_buffer_size",
    "select.buffer_size", "select.correlation_threshold",
    "run.seed", "run.mode", "run.normalize", "run.dataset",
};

std::string env_name_for(const std::string& key) {
    std::string name = kEnvPrefix;
    for (const char c : key) {
        name += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return name;
}

}  // namespace

RunConfig load_run_config(const std::string& config_path) {
    RunConfig config;
    if (!config_path.empty()) {
        const KvFile kv = parse_kv_file(config_path);
        for (const auto& [key, value, line] : kv.entries) {
            try {
                apply_config_key(config, key, value);
            } catch (const ConfigError& err) {
                throw ConfigError(config_path + ":" + std::to_string(line) + ": " + err.what());
            }
        }
    }
    for (const auto& key : kConfigKeys) {
        if (const char* value = std::getenv(env_name_for(key).c_str())) {
            apply_config_key(config, key, value);
        }
    }
    return config;
}

}  // namespace cascade
