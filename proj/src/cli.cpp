#include "cascade/cli.hpp"

#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/ingest.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/report.hpp"
#include "cascade/rng.hpp"

#include <filesystem>
#include <ostream>
#include <random>

namespace cascade {

namespace {

std::string basename_no_ext(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

}  // namespace

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        const bool csv_input = !cmd.input_csv.empty();
        const bool spec_input = !cmd.spec_path.empty();
        if (csv_input == spec_input) {
            throw ConfigError("exactly one input source required: --input with --schema, or --spec");
        }
        if (csv_input && cmd.schema_path.empty()) {
            throw ConfigError("--input requires --schema");
        }
        if (cmd.out_dir.empty()) {
            throw ConfigError("--out directory required");
        }

        RunConfig config = load_run_config(cmd.config_path);
        if (cmd.seed) config.seed = *cmd.seed;
        if (!cmd.mode.empty()) {
            if (cmd.mode == "single") {
                config.pipeline.mode = WorkerMode::single;
            } else if (cmd.mode == "concurrent") {
                config.pipeline.mode = WorkerMode::concurrent;
            } else {
                throw ConfigError("--mode must be 'single' or 'concurrent'");
            }
        }

        bool seed_was_random = false;
        if (!config.seed) {
            config.seed = std::random_device{}();
            seed_was_random = true;
        }
        config.pipeline.seed = *config.seed;

        std::unique_ptr<RecordSource> source;
        LabelSpace space;
        int n_features = 0;
        std::string dataset = config.dataset_name;
        if (csv_input) {
            SchemaConfig schema = read_schema_file(cmd.schema_path);
            auto reader = std::make_unique<CsvFlowReader>(cmd.input_csv, std::move(schema));
            space = reader->label_space();
            n_features = reader->feature_count();
            if (n_features == 0) {
                throw DataError(cmd.input_csv + ": no feature columns detected");
            }
            if (dataset.empty()) dataset = basename_no_ext(cmd.input_csv);
            source = std::move(reader);
        } else {
            SyntheticSpec spec = read_synthetic_spec(cmd.spec_path);
            if (cmd.seed) spec.seed = *cmd.seed;  // --seed also pins the stream
            space = spec.label_space();
            n_features = spec.n_features;
            if (dataset.empty()) dataset = basename_no_ext(cmd.spec_path);
            source = std::make_unique<SyntheticStream>(std::move(spec));
        }

        std::filesystem::create_directories(cmd.out_dir);
        RunRecorder recorder;
        recorder.open_file((std::filesystem::path(cmd.out_dir) / "journal.txt").string());
        recorder.event(0, 0, "seed", std::to_string(*config.seed) +
                                         (seed_was_random ? " chosen=random" : " chosen=given"));
        recorder.event(0, 0, "prng", kRngAlgorithmId);

        StageSet stages = build_stages(config.pipeline, space, n_features, &recorder);
        Engine engine(space, n_features, config.pipeline, std::move(stages), &recorder);
        const RunResult result = engine.run(*source);

        const ReportView view = make_view(dataset, space, result);
        RunMeta meta;
        meta.dataset = dataset;
        meta.classes = space.names();
        meta.normal_name = space.name(space.normal_id());
        meta.seed = *config.seed;
        meta.mode = config.pipeline.mode == WorkerMode::single ? "single" : "concurrent";
        meta.normalized = config.pipeline.normalize;
        meta.n_records = result.n_records;
        meta.n_features = n_features;
        meta.prng = kRngAlgorithmId;
        write_run_outputs(cmd.out_dir, view, result, meta);

        out << render_tables(view);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_gen(const std::string& spec_path, const std::string& out_csv,
            std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
    try {
        SyntheticSpec spec = read_synthetic_spec(spec_path);
        if (seed) spec.seed = *seed;
        SyntheticStream stream(spec);
        write_stream_csv(out_csv, stream, stream.label_space(), spec.n_features);
        out << "wrote " << spec.n_instances << " records to " << out_csv << " (seed=" << spec.seed
            << ", prng=" << kRngAlgorithmId << ")\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const std::string& run_dir, std::ostream& out, std::ostream& err) {
    try {
        out << render_tables(read_view(run_dir));
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cascade
