#include "cascade/journal.hpp"

#include "cascade/errors.hpp"

#include <sstream>

namespace cascade {

void RunRecorder::open_file(const std::string& path) {
    std::lock_guard<std::mutex> lock(mu_);
    file_.open(path, std::ios::out | std::ios::trunc);
    if (!file_) {
        throw ConfigError("cannot open journal file '" + path + "'");
    }
}

void RunRecorder::event(std::int64_t index, int stage, const std::string& kind,
                        const std::string& payload) {
    std::ostringstream line;
    line << index << "|" << stage << "|" << kind << "|" << payload;
    std::lock_guard<std::mutex> lock(mu_);
    lines_.push_back(line.str());
    if (file_.is_open()) {
        file_ << lines_.back() << "\n";
        file_.flush();
    }
}

void RunRecorder::drift(int stage, const DriftEvent& e) {
    const char* kind = e.kind == DriftEvent::Kind::drift ? "drift" : "warning";
    event(e.arrival_index, stage, kind,
          "path=" + (e.node_path.empty() ? std::string("root") : e.node_path));
    std::lock_guard<std::mutex> lock(mu_);
    drift_events_.emplace_back(stage, e);
}

void RunRecorder::mask(int stage, std::int64_t arrival_index, const FeatureMask& m) {
    event(arrival_index, stage, "mask", m.to_string());
    std::lock_guard<std::mutex> lock(mu_);
    mask_history_.push_back(MaskEvent{stage, arrival_index, m});
}

std::vector<std::pair<int, DriftEvent>> RunRecorder::drift_events() const {
    std::lock_guard<std::mutex> lock(mu_);
    return drift_events_;
}

std::vector<MaskEvent> RunRecorder::mask_history() const {
    std::lock_guard<std::mutex> lock(mu_);
    return mask_history_;
}

std::string RunRecorder::journal_text() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::string out;
    for (const auto& line : lines_) {
        out += line;
        out += "\n";
    }
    return out;
}

}  // namespace cascade
