#pragma once

#include "cascade/ingest.hpp"
#include "cascade/journal.hpp"
#include "cascade/metrics.hpp"
#include "cascade/stages.hpp"
#include "cascade/types.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>

namespace cascade {

enum class WorkerMode { single, concurrent };

// Per-record routing outcome; everything tally accounting needs.
struct RoutingTrace {
    std::int64_t arrival_index = 0;
    int true_class = 0;
    bool s1_attack = false;
    std::optional<int> s2_class;
    std::optional<bool> s4_confirmed;
    std::optional<int> s3_class;
    Verdict verdict;
};

// Applies the stage-3/stage-4 accounting rules for one terminal record:
//   stage 3 terminal: TN'/TP'/FP'/FN' by attack-vs-normal agreement, except
//   that records demoted at stage 4 never add FN' (their miss was already
//   counted as FN'' at demotion);
//   stage 4 terminal: TP'' on exact class match, else FP'';
//   stage 4 demotion of a truly-attack record: FN''.
// Also fills the per-stage confusion matrices and the final KxK confusion.
void apply_accounting(StageTallies& tallies, CountMatrix& final_confusion,
                      const RoutingTrace& trace, const LabelSpace& space);

// Binary views of the per-stage confusion matrices (positive = attack;
// stage 4: positive = confirmed-as-claimed).
TotalTallies stage1_binary_totals(const CountMatrix& stage1);
TotalTallies multiclass_binary_totals(const CountMatrix& confusion, int normal_id);
TotalTallies stage4_binary_totals(const std::map<int, CountMatrix>& per_class);

struct RunResult {
    std::int64_t n_records = 0;
    std::vector<Verdict> verdicts;
    StageTallies stage_tallies;
    TotalTallies totals;
    MetricReport final_metrics;
    std::array<MetricReport, 4> per_stage_metrics;
    std::vector<ClassMetrics> per_class;
    CountMatrix final_confusion;
    std::array<double, 4> stage_seconds{};
    double total_seconds = 0.0;
    std::vector<std::pair<int, DriftEvent>> drift_events;
    std::vector<MaskEvent> mask_history;
};

struct StageSet {
    std::unique_ptr<BinaryDetectStage> s1;
    std::unique_ptr<AttackClassStage> s2;
    std::unique_ptr<SequenceVerifyStage> s3;
    std::unique_ptr<CommitteeVerifyStage> s4;
};

struct PipelineOptions {
    HatConfig stage1_cfg;
    HatConfig stage2_cfg;
    std::int64_t stage1_warmup = 500;
    std::int64_t stage2_warmup = 500;
    LstmStage::Options stage3;
    CommitteeConfig stage4;
    std::int64_t stage4_refresh = 50000;  // committee refresh cadence (stage 3's by default)
    SelectionConfig selection;
    bool normalize = true;
    std::uint64_t seed = 0;
    WorkerMode mode = WorkerMode::single;
};

// Production stages: binary HAT, multiclass HAT, LSTM verifier, per-class
// committees, with per-stage seeds derived from the run seed.
StageSet build_stages(const PipelineOptions& options, const LabelSpace& space, int n_features,
                      RunRecorder* recorder);

// The four-stage router. Owns normalization, tallies, timing and verdicts;
// stage model behavior lives behind the StageSet seams.
class Engine {
public:
    Engine(LabelSpace space, int n_features, PipelineOptions options, StageSet stages,
           RunRecorder* recorder);

    RunResult run(RecordSource& source);

private:
    RunResult run_single(RecordSource& source);
    RunResult run_concurrent(RecordSource& source);
    RoutingTrace route_one(const FlowRecord& record, std::array<double, 4>& stage_seconds);
    FlowRecord prepare(FlowRecord record);
    RunResult finalize(std::vector<RoutingTrace> traces, StageTallies tallies,
                       CountMatrix final_confusion, std::array<double, 4> stage_seconds,
                       double total_seconds) const;

    LabelSpace space_;
    int n_features_;
    PipelineOptions options_;
    StageSet stages_;
    RunRecorder* recorder_;
    OnlineNormalizer normalizer_;
};

}  // namespace cascade
