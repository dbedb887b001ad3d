#pragma once

#include "cascade/feature_select.hpp"
#include "cascade/stream_tree.hpp"

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace cascade {

struct MaskEvent {
    int stage = 0;
    std::int64_t arrival_index = 0;
    FeatureMask mask;
};

// Append-only run journal (`index|stage|event|payload`, one event per line)
// plus in-memory drift/mask histories for the run result. Thread-safe so
// concurrent-mode stages can share one recorder.
class RunRecorder {
public:
    RunRecorder() = default;

    // Optional file sink; the in-memory journal is always kept.
    void open_file(const std::string& path);

    void event(std::int64_t index, int stage, const std::string& kind, const std::string& payload);
    void drift(int stage, const DriftEvent& e);
    void mask(int stage, std::int64_t arrival_index, const FeatureMask& m);

    std::vector<std::pair<int, DriftEvent>> drift_events() const;
    std::vector<MaskEvent> mask_history() const;
    std::string journal_text() const;

private:
    mutable std::mutex mu_;
    std::vector<std::string> lines_;
    std::ofstream file_;
    std::vector<std::pair<int, DriftEvent>> drift_events_;
    std::vector<MaskEvent> mask_history_;
};

}  // namespace cascade
