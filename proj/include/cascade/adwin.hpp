#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace cascade {

enum class DriftSignal { stable, warning, drift };

// Adaptive sliding window over a 0/1 error stream.
//
// Bits are kept in an exponential histogram: buckets of doubling size with at
// most `max_buckets_per_level` per size. Every admissible cut (bucket
// boundary) is tested after each insert: the window signals drift when the
// recent sub-window's error mean exceeds the older one beyond a
// Hoeffding-style bound at drift_delta, warning at 10x drift_delta. A change
// in either direction drops the older half of the window, but improvements
// are adapted to silently; only degradation is reported.
class AdaptiveErrorWindow {
public:
    explicit AdaptiveErrorWindow(double drift_delta = 0.002, int max_buckets_per_level = 5);

    DriftSignal update(int error_bit);

    std::int64_t size() const { return total_size_; }
    double mean() const;

private:
    struct Bucket {
        std::int64_t sum = 0;
        std::int64_t size = 0;
    };
    struct CutScan {
        DriftSignal signal = DriftSignal::stable;
        bool shrink = false;
    };

    void insert(int bit);
    void compress();
    CutScan scan_cuts() const;
    void drop_older_half();

    double drift_delta_;
    double warning_delta_;
    int max_buckets_per_level_;
    std::deque<Bucket> buckets_;  // oldest first
    std::int64_t total_size_ = 0;
    std::int64_t total_sum_ = 0;
};

// Operation-style wrapper over AdaptiveErrorWindow::update.
inline DriftSignal drift_window_update(AdaptiveErrorWindow& window, int error_bit) {
    return window.update(error_bit);
}

}  // namespace cascade
