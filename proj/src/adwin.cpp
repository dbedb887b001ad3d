#include "cascade/adwin.hpp"

#include <cmath>
#include <stdexcept>

namespace cascade {

AdaptiveErrorWindow::AdaptiveErrorWindow(double drift_delta, int max_buckets_per_level)
    : drift_delta_(drift_delta),
      warning_delta_(std::min(10.0 * drift_delta, 0.999)),
      max_buckets_per_level_(max_buckets_per_level) {
    if (drift_delta <= 0.0 || drift_delta >= 1.0) {
        throw std::invalid_argument("drift_delta must be in (0, 1)");
    }
    if (max_buckets_per_level < 2) {
        throw std::invalid_argument("max_buckets_per_level must be >= 2");
    }
}

double AdaptiveErrorWindow::mean() const {
    return total_size_ == 0 ? 0.0 : static_cast<double>(total_sum_) / static_cast<double>(total_size_);
}

void AdaptiveErrorWindow::insert(int bit) {
    buckets_.push_back(Bucket{bit, 1});
    total_size_ += 1;
    total_sum_ += bit;
    compress();
}

void AdaptiveErrorWindow::compress() {
    // Buckets are ordered oldest-first with non-increasing sizes, so all
    // buckets of one size are contiguous. When a size overflows, merge the
    // two oldest buckets of that size into one of double size.
    std::int64_t level_size = 1;
    while (true) {
        std::size_t first = buckets_.size();
        int count = 0;
        for (std::size_t i = 0; i < buckets_.size(); ++i) {
            if (buckets_[i].size == level_size) {
                if (count == 0) first = i;
                ++count;
            }
        }
        if (count <= max_buckets_per_level_) break;
        buckets_[first].sum += buckets_[first + 1].sum;
        buckets_[first].size = level_size * 2;
        buckets_.erase(buckets_.begin() + static_cast<std::ptrdiff_t>(first) + 1);
        level_size *= 2;
    }
}

AdaptiveErrorWindow::CutScan AdaptiveErrorWindow::scan_cuts() const {
    CutScan scan;
    if (buckets_.size() < 2) return scan;
    const double log_drift = std::log(4.0 / drift_delta_);
    const double log_warn = std::log(4.0 / warning_delta_);

    std::int64_t old_size = 0;
    std::int64_t old_sum = 0;
    for (std::size_t i = 0; i + 1 < buckets_.size(); ++i) {
        old_size += buckets_[i].size;
        old_sum += buckets_[i].sum;
        const std::int64_t new_size = total_size_ - old_size;
        const std::int64_t new_sum = total_sum_ - old_sum;
        const double mean_old = static_cast<double>(old_sum) / static_cast<double>(old_size);
        const double mean_new = static_cast<double>(new_sum) / static_cast<double>(new_size);
        const double diff = mean_new - mean_old;  // positive = errors rising
        // Harmonic mean of the two sub-window sizes.
        const double m = 1.0 / (1.0 / static_cast<double>(old_size) +
                                1.0 / static_cast<double>(new_size));
        if (std::abs(diff) > std::sqrt(log_drift / (2.0 * m))) {
            scan.shrink = true;
            if (diff > 0.0) {
                scan.signal = DriftSignal::drift;
                return scan;
            }
        } else if (diff > 0.0 && diff > std::sqrt(log_warn / (2.0 * m))) {
            scan.signal = DriftSignal::warning;
        }
    }
    return scan;
}

void AdaptiveErrorWindow::drop_older_half() {
    const std::int64_t target = total_size_ / 2;
    while (!buckets_.empty() && total_size_ > target) {
        total_size_ -= buckets_.front().size;
        total_sum_ -= buckets_.front().sum;
        buckets_.pop_front();
    }
}

DriftSignal AdaptiveErrorWindow::update(int error_bit) {
    if (error_bit != 0 && error_bit != 1) {
        throw std::invalid_argument("error_bit must be 0 or 1");
    }
    insert(error_bit);
    const CutScan scan = scan_cuts();
    if (scan.shrink || scan.signal == DriftSignal::drift) drop_older_half();
    return scan.signal;
}

}  // namespace cascade
