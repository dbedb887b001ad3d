#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cascade {

struct RunCommand {
    std::string input_csv;    // with schema_path; mutually exclusive with spec_path
    std::string schema_path;
    std::string spec_path;    // synthetic source
    std::string out_dir;
    std::string config_path;
    std::optional<std::uint64_t> seed;  // --seed; wins over config and spec seeds
    std::string mode;                   // "", "single" or "concurrent"; wins over config
};

// Runs an experiment and writes reports, journal and machine-readable
// metrics into out_dir. Returns a process exit status.
int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err);

// Renders a synthetic spec into a CSV in the ingest schema.
int cmd_gen(const std::string& spec_path, const std::string& out_csv,
            std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err);

// Re-renders the stored results of a completed run; never recomputes.
int cmd_report(const std::string& run_dir, std::ostream& out, std::ostream& err);

}  // namespace cascade
