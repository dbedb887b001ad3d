#include "cascade/stages.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace cascade {

void SelectionBuffer::push(const Eigen::VectorXd& features) {
    rows_.push_back(features);
    while (static_cast<int>(rows_.size()) > capacity_) rows_.pop_front();
}

Eigen::MatrixXd SelectionBuffer::matrix() const {
    if (rows_.size() < 2) return Eigen::MatrixXd();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_.size()), rows_.front().size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = rows_[i].transpose();
    }
    return m;
}

HatStage::HatStage(int stage_id, int n_features, int n_classes, HatConfig cfg,
                   SelectionConfig selection, std::int64_t warmup_quota, RunRecorder* recorder)
    : stage_id_(stage_id),
      tree_(n_features, n_classes, cfg),
      selection_(selection),
      buffer_(selection.buffer_size),
      warmup_quota_(warmup_quota),
      recorder_(recorder) {}

bool HatStage::predict_attack(const FlowRecord& record) {
    return tree_.predict(record.features) == 1;
}

int HatStage::predict_class(const FlowRecord& record) {
    return tree_.predict(record.features);
}

void HatStage::learn(const FlowRecord& record, bool truly_attack) {
    learn_class(record, truly_attack ? 1 : 0);
}

void HatStage::learn(const FlowRecord& record) { learn_class(record, record.true_class); }

void HatStage::learn_class(const FlowRecord& record, int label) {
    buffer_.push(record.features);
    const auto events = tree_.learn_one(record.features, label, record.arrival_index);
    bool replaced = false;
    for (const auto& e : events) {
        if (recorder_) recorder_->drift(stage_id_, e);
        replaced |= e.kind == DriftEvent::Kind::drift;
    }
    ++learned_;
    if (learned_ == warmup_quota_) {
        if (recorder_) recorder_->event(record.arrival_index, stage_id_, "warmup_complete", "");
        recompute_mask(record.arrival_index);
    } else if (replaced) {
        // Subtree replacement counts as a retraining; future subtrees adopt
        // the fresh mask.
        recompute_mask(record.arrival_index);
    }
}

void HatStage::recompute_mask(std::int64_t arrival_index) {
    const Eigen::MatrixXd m = buffer_.matrix();
    if (m.rows() < 2) return;
    try {
        FeatureMask mask = select_features(m, selection_);
        if (recorder_) recorder_->mask(stage_id_, arrival_index, mask);
        tree_.set_current_mask(std::move(mask));
    } catch (const SelectionError&) {
        // keep the previous mask
    }
}

LstmStage::LstmStage(int n_features, const LabelSpace& space, Options options,
                     SelectionConfig selection, RunRecorder* recorder)
    : n_features_(n_features),
      space_(space),
      options_(options),
      selection_(selection),
      recorder_(recorder),
      mask_(identity_mask(n_features)) {
    // Capacity floor keeps delayed concurrent-mode classify requests inside
    // the window even when the configured buffers are small.
    history_capacity_ = static_cast<std::size_t>(std::max<std::int64_t>(
        {options_.warmup_records, selection_.buffer_size, options_.seq_len, 4096}));
    LstmConfig cfg;
    cfg.input_dim = n_features_;
    cfg.hidden_dim = options_.hidden_dim;
    cfg.num_classes = space_.size();
    cfg.seq_len = options_.seq_len;
    cfg.learning_rate = options_.learning_rate;
    cfg.epochs = options_.epochs;
    cfg.seed = options_.seed;
    params_ = init_lstm(cfg);  // best-effort predictions until trained
}

void LstmStage::observe(const FlowRecord& record) {
    if (observed_ == options_.warmup_records ||
        (trained_ && options_.refresh_interval > 0 && observed_ > options_.warmup_records &&
         observed_ % options_.refresh_interval == 0)) {
        train_from_history(record.arrival_index);
    }
    history_.push_back(record);
    while (history_.size() > history_capacity_) history_.pop_front();
    ++observed_;
}

int LstmStage::classify(const FlowRecord& record) {
    // Until the first training the stage verifies by pass-through: the
    // upstream normal flag stands, mirroring the stage-4 bypass rule.
    if (!trained_) {
        if (!passthrough_journaled_) {
            passthrough_journaled_ = true;
            if (recorder_) {
                recorder_->event(record.arrival_index, 3, "passthrough",
                                 "untrained verifier agrees with upstream");
            }
        }
        return space_.normal_id();
    }
    // History holds consecutive arrival indices, so the record's slot follows
    // from its index. Concurrent mode can classify a record a little after
    // newer records were observed; the window still ends at the record.
    if (history_.empty()) {
        throw std::logic_error("LstmStage::classify: record was not observed first");
    }
    const std::int64_t offset = record.arrival_index - history_.front().arrival_index;
    if (offset < 0 || offset >= static_cast<std::int64_t>(history_.size())) {
        throw std::logic_error("LstmStage::classify: record fell outside the history window");
    }
    const std::size_t pos = static_cast<std::size_t>(offset);
    const int t = options_.seq_len;
    const std::size_t start = pos + 1 > static_cast<std::size_t>(t) ? pos + 1 - static_cast<std::size_t>(t) : 0;
    std::vector<Eigen::VectorXd> masked;
    masked.reserve(pos - start + 1);
    for (std::size_t i = start; i <= pos; ++i) {
        masked.push_back(apply_mask(history_[i].features, mask_));
    }
    const SequenceWindow window = make_window(masked, masked.size() - 1, t);
    const Eigen::VectorXd probs = lstm_forward(window, params_);
    Eigen::Index best = 0;
    probs.maxCoeff(&best);
    return static_cast<int>(best);
}

void LstmStage::train_from_history(std::int64_t arrival_index) {
    if (history_.size() < 2) return;

    // Training data: the most recent warmup_records records (the whole
    // history at the warm-up boundary).
    const std::size_t quota = static_cast<std::size_t>(options_.warmup_records);
    const std::size_t begin = history_.size() > quota ? history_.size() - quota : 0;
    const std::vector<FlowRecord> recent(history_.begin() + static_cast<std::ptrdiff_t>(begin),
                                         history_.end());

    // Mask recomputation accompanies every (re)training.
    SelectionBuffer sel(selection_.buffer_size);
    for (const auto& rec : recent) sel.push(rec.features);
    const Eigen::MatrixXd m = sel.matrix();
    if (m.rows() >= 2) {
        try {
            FeatureMask mask = select_features(m, selection_);
            if (recorder_) recorder_->mask(3, arrival_index, mask);
            mask_ = std::move(mask);
        } catch (const SelectionError&) {
            // keep the previous mask
        }
    }

    std::vector<Eigen::VectorXd> masked;
    masked.reserve(recent.size());
    for (const auto& rec : recent) masked.push_back(apply_mask(rec.features, mask_));

    // One labeled window per position, stratified by oversampling minority
    // classes to the majority count.
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(space_.size()));
    for (std::size_t i = 0; i < recent.size(); ++i) {
        by_class[static_cast<std::size_t>(recent[i].true_class)].push_back(i);
    }
    std::size_t max_count = 0;
    for (const auto& group : by_class) max_count = std::max(max_count, group.size());

    Rng rng(options_.seed ^ (0x517cc1b727220a95ULL + static_cast<std::uint64_t>(refresh_count_)));
    std::vector<std::size_t> positions;
    for (const auto& group : by_class) {
        if (group.empty()) continue;
        positions.insert(positions.end(), group.begin(), group.end());
        for (std::size_t extra = group.size(); extra < max_count; ++extra) {
            positions.push_back(group[rng.index(group.size())]);
        }
    }

    LstmConfig cfg;
    cfg.input_dim = static_cast<int>(mask_.selected.size());
    cfg.hidden_dim = options_.hidden_dim;
    cfg.num_classes = space_.size();
    cfg.seq_len = options_.seq_len;
    cfg.learning_rate = options_.learning_rate;
    cfg.epochs = options_.epochs;
    cfg.seed = options_.seed + static_cast<std::uint64_t>(refresh_count_);
    LstmParams candidate = init_lstm(cfg);

    const int batch_size = std::max(1, options_.batch_size);
    try {
        for (int epoch = 0; epoch < options_.epochs; ++epoch) {
            rng.shuffle(positions);
            double loss_sum = 0.0;
            std::size_t batches = 0;
            for (std::size_t at = 0; at < positions.size(); at += static_cast<std::size_t>(batch_size)) {
                std::vector<std::pair<SequenceWindow, int>> batch;
                const std::size_t end = std::min(positions.size(), at + static_cast<std::size_t>(batch_size));
                batch.reserve(end - at);
                for (std::size_t i = at; i < end; ++i) {
                    const std::size_t pos = positions[i];
                    batch.emplace_back(make_window(masked, pos, options_.seq_len),
                                       recent[pos].true_class);
                }
                TrainResult step = lstm_train_step(candidate, batch);
                candidate = std::move(step.params);
                loss_sum += step.mean_loss;
                ++batches;
            }
            if (recorder_) {
                char payload[96];
                std::snprintf(payload, sizeof(payload), "epoch=%d loss=%.6f windows=%zu", epoch + 1,
                              batches ? loss_sum / static_cast<double>(batches) : 0.0,
                              positions.size());
                recorder_->event(arrival_index, 3, "train_epoch", payload);
            }
        }
    } catch (const TrainingError& err) {
        if (recorder_) recorder_->event(arrival_index, 3, "train_error", err.what());
        return;  // keep the previous parameters (and their mask arity)
    }

    params_ = std::move(candidate);
    trained_ = true;
    ++refresh_count_;
}

CommitteeStage::CommitteeStage(int n_features, const LabelSpace& space, CommitteeConfig cfg,
                               SelectionConfig selection, std::int64_t refresh_interval,
                               RunRecorder* recorder)
    : n_features_(n_features),
      space_(space),
      cfg_(cfg),
      selection_(selection),
      refresh_interval_(refresh_interval),
      recorder_(recorder),
      selection_buffer_(selection.buffer_size) {}

bool CommitteeStage::has_committee(int class_id) const {
    const auto it = per_class_.find(class_id);
    return it != per_class_.end() && it->second.committee.has_value();
}

VerifyDecision CommitteeStage::verify(const FlowRecord& record, int claimed_class) {
    const auto it = per_class_.find(claimed_class);
    if (it == per_class_.end() || !it->second.committee) {
        if (recorder_) {
            recorder_->event(record.arrival_index, 4, "bypass",
                             "class=" + space_.name(claimed_class));
        }
        return VerifyDecision{true, true};  // confirm unchanged, journaled
    }
    const Eigen::VectorXd masked = apply_mask(record.features, it->second.mask);
    const VerifyOutcome outcome = it->second.committee->verify(masked);
    return VerifyDecision{outcome == VerifyOutcome::confirmed_attack, false};
}

void CommitteeStage::learn(const FlowRecord& record, int claimed_class) {
    selection_buffer_.push(record.features);
    PerClass& pc = per_class_[claimed_class];
    pc.buffer.push_back(LabeledExample{record.features,
                                       record.true_class == claimed_class ? 1 : 0,
                                       record.arrival_index});
    while (static_cast<int>(pc.buffer.size()) > cfg_.train_buffer_size) pc.buffer.pop_front();

    const bool full = static_cast<int>(pc.buffer.size()) >= cfg_.train_buffer_size;
    if (!full) return;
    const bool due = pc.last_train_attempt < 0 ||
                     (refresh_interval_ > 0 &&
                      record.arrival_index >= pc.last_train_attempt + refresh_interval_);
    if (due) try_train(claimed_class, record.arrival_index);
}

void CommitteeStage::try_train(int class_id, std::int64_t arrival_index) {
    PerClass& pc = per_class_[class_id];
    pc.last_train_attempt = arrival_index;

    FeatureMask mask = identity_mask(n_features_);
    const Eigen::MatrixXd m = selection_buffer_.matrix();
    if (m.rows() >= 2) {
        try {
            mask = select_features(m, selection_);
        } catch (const SelectionError&) {
            mask = pc.committee ? pc.mask : identity_mask(n_features_);
        }
    }

    std::vector<LabeledExample> masked;
    masked.reserve(pc.buffer.size());
    for (const auto& ex : pc.buffer) {
        masked.push_back(LabeledExample{apply_mask(ex.features, mask), ex.label, ex.arrival_index});
    }

    CommitteeConfig cfg = cfg_;
    cfg.seed = cfg_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(class_id + 1));
    try {
        ClassCommittee committee = ClassCommittee::train(class_id, masked, cfg);
        if (recorder_) {
            const auto acc = committee.training_accuracy(masked);
            recorder_->mask(4, arrival_index, mask);
            char payload[160];
            std::snprintf(payload, sizeof(payload),
                          "class=%s buffer=%zu rf_acc=%.4f knn_acc=%.4f svm_acc=%.4f",
                          space_.name(class_id).c_str(), masked.size(), acc.rf, acc.knn, acc.svm);
            recorder_->event(arrival_index, 4, "committee_train", payload);
        }
        pc.committee = std::move(committee);
        pc.mask = std::move(mask);
    } catch (const TrainingError& err) {
        if (recorder_) recorder_->event(arrival_index, 4, "train_error", err.what());
        // pass-through verification continues for this class
    }
}

}  // namespace cascade
