#pragma once

#include "cascade/ensemble.hpp"
#include "cascade/feature_select.hpp"
#include "cascade/journal.hpp"
#include "cascade/seq_net.hpp"
#include "cascade/stream_tree.hpp"
#include "cascade/types.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>

namespace cascade {

// Stage seams. The router talks to these; production implementations wrap
// the stream trees, the LSTM and the committees, and tests can substitute
// scripted predictors.

class BinaryDetectStage {
public:
    virtual ~BinaryDetectStage() = default;
    virtual bool predict_attack(const FlowRecord& record) = 0;
    virtual void learn(const FlowRecord& record, bool truly_attack) = 0;
};

class AttackClassStage {
public:
    virtual ~AttackClassStage() = default;
    virtual int predict_class(const FlowRecord& record) = 0;
    virtual void learn(const FlowRecord& record) = 0;
};

class SequenceVerifyStage {
public:
    virtual ~SequenceVerifyStage() = default;
    // Called for every record in arrival order, before any classify of it.
    virtual void observe(const FlowRecord& record) = 0;
    virtual int classify(const FlowRecord& record) = 0;
};

struct VerifyDecision {
    bool confirmed = false;
    bool bypassed = false;  // no committee for the class yet
};

class CommitteeVerifyStage {
public:
    virtual ~CommitteeVerifyStage() = default;
    virtual VerifyDecision verify(const FlowRecord& record, int claimed_class) = 0;
    virtual void learn(const FlowRecord& record, int claimed_class) = 0;
};

// Rolling buffer of recent feature rows for mask recomputation.
class SelectionBuffer {
public:
    explicit SelectionBuffer(int capacity) : capacity_(capacity) {}
    void push(const Eigen::VectorXd& features);
    // Rows = buffered records; empty matrix when fewer than two records.
    Eigen::MatrixXd matrix() const;
    std::size_t size() const { return rows_.size(); }

private:
    int capacity_;
    std::deque<Eigen::VectorXd> rows_;
};

// Stages 1 and 2: Hoeffding adaptive tree with drift-triggered mask
// recomputation. Stage 1 runs it over a two-class space (normal vs attack).
class HatStage : public BinaryDetectStage, public AttackClassStage {
public:
    HatStage(int stage_id, int n_features, int n_classes, HatConfig cfg,
             SelectionConfig selection, std::int64_t warmup_quota, RunRecorder* recorder);

    bool predict_attack(const FlowRecord& record) override;
    void learn(const FlowRecord& record, bool truly_attack) override;

    int predict_class(const FlowRecord& record) override;
    void learn(const FlowRecord& record) override;

    const HoeffdingAdaptiveTree& tree() const { return tree_; }

private:
    void learn_class(const FlowRecord& record, int label);
    void recompute_mask(std::int64_t arrival_index);

    int stage_id_;
    HoeffdingAdaptiveTree tree_;
    SelectionConfig selection_;
    SelectionBuffer buffer_;
    std::int64_t warmup_quota_;
    std::int64_t learned_ = 0;
    RunRecorder* recorder_;
};

// Stage 3: LSTM over sliding windows of consecutive records. Trains once the
// warm-up quota of records has been observed, then refreshes on a fixed
// cadence; between trainings the parameters are frozen. Before the first
// training the stage verifies by pass-through (the upstream normal flag
// stands), like stage 4's committee-missing bypass.
class LstmStage : public SequenceVerifyStage {
public:
    struct Options {
        int hidden_dim = 32;
        int seq_len = 8;
        double learning_rate = 0.01;
        int epochs = 5;
        int batch_size = 32;
        std::int64_t warmup_records = 2000;
        std::int64_t refresh_interval = 50000;
        std::uint64_t seed = 0;
    };

    LstmStage(int n_features, const LabelSpace& space, Options options,
              SelectionConfig selection, RunRecorder* recorder);

    void observe(const FlowRecord& record) override;
    int classify(const FlowRecord& record) override;

    bool trained() const { return trained_; }
    const FeatureMask& mask() const { return mask_; }

private:
    void train_from_history(std::int64_t arrival_index);

    int n_features_;
    LabelSpace space_;
    Options options_;
    SelectionConfig selection_;
    RunRecorder* recorder_;

    std::deque<FlowRecord> history_;
    std::size_t history_capacity_;
    std::int64_t observed_ = 0;

    FeatureMask mask_;
    LstmParams params_;
    bool trained_ = false;
    bool passthrough_journaled_ = false;
    int refresh_count_ = 0;
};

// Stage 4: one binary committee per attack class, trained from the records
// stage 2 routes to that class. Classes without a trained committee pass
// through confirmed (journaled as a bypass).
class CommitteeStage : public CommitteeVerifyStage {
public:
    CommitteeStage(int n_features, const LabelSpace& space, CommitteeConfig cfg,
                   SelectionConfig selection, std::int64_t refresh_interval,
                   RunRecorder* recorder);

    VerifyDecision verify(const FlowRecord& record, int claimed_class) override;
    void learn(const FlowRecord& record, int claimed_class) override;

    bool has_committee(int class_id) const;

private:
    struct PerClass {
        std::deque<LabeledExample> buffer;
        std::optional<ClassCommittee> committee;
        FeatureMask mask;
        std::int64_t last_train_attempt = -1;
    };

    void try_train(int class_id, std::int64_t arrival_index);

    int n_features_;
    LabelSpace space_;
    CommitteeConfig cfg_;
    SelectionConfig selection_;
    std::int64_t refresh_interval_;
    RunRecorder* recorder_;
    SelectionBuffer selection_buffer_;
    std::map<int, PerClass> per_class_;
};

}  // namespace cascade
