#include "cascade/pipeline.hpp"

#include "cascade/errors.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace cascade {

void apply_accounting(StageTallies& tallies, CountMatrix& final_confusion,
                      const RoutingTrace& trace, const LabelSpace& space) {
    const int normal = space.normal_id();
    const bool truly_attack = trace.true_class != normal;

    tallies.stage1(truly_attack ? 1 : 0, trace.s1_attack ? 1 : 0) += 1;
    if (trace.s2_class) {
        tallies.stage2(trace.true_class, *trace.s2_class) += 1;
    }
    if (trace.s4_confirmed) {
        const int claimed = *trace.s2_class;
        CountMatrix& m = tallies.stage4[claimed];
        if (m.size() == 0) m = CountMatrix::Zero(2, 2);
        m(trace.true_class == claimed ? 1 : 0, *trace.s4_confirmed ? 1 : 0) += 1;
    }
    if (trace.s3_class) {
        tallies.stage3(trace.true_class, *trace.s3_class) += 1;
    }

    const Verdict& v = trace.verdict;
    if (v.terminal_stage == 4) {
        if (trace.true_class == v.predicted_class) {
            tallies.tp_dprime += 1;
        } else {
            tallies.fp_dprime += 1;
        }
    } else {
        const bool demoted = v.demoted();
        if (demoted && truly_attack) tallies.fn_dprime += 1;
        const bool predicted_attack = v.predicted_class != normal;
        if (predicted_attack) {
            if (truly_attack) {
                tallies.tp_prime += 1;
            } else {
                tallies.fp_prime += 1;
            }
        } else if (!truly_attack) {
            tallies.tn_prime += 1;
        } else if (!demoted) {
            tallies.fn_prime += 1;  // demoted misses were already counted as FN''
        }
    }

    final_confusion(trace.true_class, v.predicted_class) += 1;
}

TotalTallies stage1_binary_totals(const CountMatrix& m) {
    return TotalTallies{m(1, 1), m(0, 1), m(0, 0), m(1, 0)};
}

TotalTallies multiclass_binary_totals(const CountMatrix& confusion, int normal_id) {
    TotalTallies t;
    for (Eigen::Index r = 0; r < confusion.rows(); ++r) {
        for (Eigen::Index c = 0; c < confusion.cols(); ++c) {
            const std::int64_t v = confusion(r, c);
            if (r == normal_id) {
                (c == normal_id ? t.tn_t : t.fp_t) += v;
            } else {
                (c == normal_id ? t.fn_t : t.tp_t) += v;
            }
        }
    }
    return t;
}

TotalTallies stage4_binary_totals(const std::map<int, CountMatrix>& per_class) {
    TotalTallies t;
    for (const auto& [cls, m] : per_class) {
        t.tp_t += m(1, 1);
        t.fn_t += m(1, 0);
        t.fp_t += m(0, 1);
        t.tn_t += m(0, 0);
    }
    return t;
}

StageSet build_stages(const PipelineOptions& options, const LabelSpace& space, int n_features,
                      RunRecorder* recorder) {
    StageSet stages;
    stages.s1 = std::make_unique<HatStage>(1, n_features, 2, options.stage1_cfg, options.selection,
                                           options.stage1_warmup, recorder);
    stages.s2 = std::make_unique<HatStage>(2, n_features, space.size(), options.stage2_cfg,
                                           options.selection, options.stage2_warmup, recorder);
    LstmStage::Options s3 = options.stage3;
    s3.seed = options.seed ^ 0x8f6e273b9d1c4a55ULL;
    stages.s3 = std::make_unique<LstmStage>(n_features, space, s3, options.selection, recorder);
    CommitteeConfig s4 = options.stage4;
    s4.seed = options.seed ^ 0x1d9c4b55fa37260eULL;
    stages.s4 = std::make_unique<CommitteeStage>(n_features, space, s4, options.selection,
                                                 options.stage4_refresh, recorder);
    return stages;
}

Engine::Engine(LabelSpace space, int n_features, PipelineOptions options, StageSet stages,
               RunRecorder* recorder)
    : space_(std::move(space)),
      n_features_(n_features),
      options_(std::move(options)),
      stages_(std::move(stages)),
      recorder_(recorder),
      normalizer_(n_features) {
    if (!stages_.s1 || !stages_.s2 || !stages_.s3 || !stages_.s4) {
        throw std::invalid_argument("Engine: missing stage");
    }
}

FlowRecord Engine::prepare(FlowRecord record) {
    if (record.features.size() != n_features_) {
        throw DataError("record " + std::to_string(record.arrival_index) + ": feature arity " +
                        std::to_string(record.features.size()) + ", expected " +
                        std::to_string(n_features_));
    }
    if (!space_.valid_id(record.true_class)) {
        throw DataError("record " + std::to_string(record.arrival_index) + ": class id out of range");
    }
    return options_.normalize ? normalizer_.normalize(std::move(record)) : record;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

class StageTimer {
public:
    explicit StageTimer(double& sink) : sink_(sink), t0_(Clock::now()) {}
    ~StageTimer() { sink_ += seconds_since(t0_); }

private:
    double& sink_;
    Clock::time_point t0_;
};

}  // namespace

RoutingTrace Engine::route_one(const FlowRecord& record, std::array<double, 4>& stage_seconds) {
    RoutingTrace trace;
    trace.arrival_index = record.arrival_index;
    trace.true_class = record.true_class;

    {
        StageTimer timer(stage_seconds[2]);
        stages_.s3->observe(record);
    }
    {
        StageTimer timer(stage_seconds[0]);
        trace.s1_attack = stages_.s1->predict_attack(record);
        stages_.s1->learn(record, record.true_class != space_.normal_id());
    }

    Verdict verdict;
    verdict.record_ref = record.arrival_index;
    verdict.path = {1};

    auto terminal_at_s3 = [&]() {
        verdict.path.push_back(3);
        StageTimer timer(stage_seconds[2]);
        const int cls = stages_.s3->classify(record);
        trace.s3_class = cls;
        verdict.predicted_class = cls;
        verdict.terminal_stage = 3;
    };

    if (!trace.s1_attack) {
        terminal_at_s3();
    } else {
        verdict.path.push_back(2);
        int claimed = 0;
        {
            StageTimer timer(stage_seconds[1]);
            claimed = stages_.s2->predict_class(record);
            stages_.s2->learn(record);
        }
        trace.s2_class = claimed;
        if (claimed == space_.normal_id()) {
            terminal_at_s3();
        } else {
            verdict.path.push_back(4);
            VerifyDecision decision;
            {
                StageTimer timer(stage_seconds[3]);
                decision = stages_.s4->verify(record, claimed);
                stages_.s4->learn(record, claimed);
            }
            trace.s4_confirmed = decision.confirmed;
            if (decision.confirmed) {
                verdict.predicted_class = claimed;
                verdict.terminal_stage = 4;
            } else {
                terminal_at_s3();
            }
        }
    }
    trace.verdict = std::move(verdict);
    return trace;
}

RunResult Engine::finalize(std::vector<RoutingTrace> traces, StageTallies tallies,
                           CountMatrix final_confusion, std::array<double, 4> stage_seconds,
                           double total_seconds) const {
    std::sort(traces.begin(), traces.end(),
              [](const RoutingTrace& a, const RoutingTrace& b) {
                  return a.arrival_index < b.arrival_index;
              });

    RunResult result;
    result.n_records = static_cast<std::int64_t>(traces.size());
    result.verdicts.reserve(traces.size());
    for (auto& trace : traces) {
        if (!is_admissible_path(trace.verdict.path)) {
            throw std::logic_error("router produced an inadmissible path");
        }
        result.verdicts.push_back(std::move(trace.verdict));
    }
    result.stage_tallies = std::move(tallies);
    result.final_confusion = std::move(final_confusion);
    result.totals = aggregate_totals(result.stage_tallies);
    result.final_metrics = compute_metrics(result.totals);
    result.per_stage_metrics[0] = compute_metrics(stage1_binary_totals(result.stage_tallies.stage1));
    result.per_stage_metrics[1] =
        compute_metrics(multiclass_binary_totals(result.stage_tallies.stage2, space_.normal_id()));
    result.per_stage_metrics[2] =
        compute_metrics(multiclass_binary_totals(result.stage_tallies.stage3, space_.normal_id()));
    result.per_stage_metrics[3] = compute_metrics(stage4_binary_totals(result.stage_tallies.stage4));
    result.per_class = per_class_report(result.final_confusion, space_);
    result.stage_seconds = stage_seconds;
    result.total_seconds = total_seconds;
    if (recorder_) {
        result.drift_events = recorder_->drift_events();
        result.mask_history = recorder_->mask_history();
    }
    return result;
}

RunResult Engine::run(RecordSource& source) {
    if (recorder_) {
        recorder_->event(0, 0, "run_start",
                         std::string("mode=") +
                             (options_.mode == WorkerMode::single ? "single" : "concurrent") +
                             " normalize=" + (options_.normalize ? "on" : "off"));
    }
    return options_.mode == WorkerMode::single ? run_single(source) : run_concurrent(source);
}

RunResult Engine::run_single(RecordSource& source) {
    const auto wall0 = Clock::now();
    const int k = space_.size();
    StageTallies tallies;
    tallies.stage2 = CountMatrix::Zero(k, k);
    tallies.stage3 = CountMatrix::Zero(k, k);
    CountMatrix final_confusion = CountMatrix::Zero(k, k);
    std::array<double, 4> stage_seconds{};
    std::vector<RoutingTrace> traces;

    while (auto raw = source.next()) {
        const FlowRecord record = prepare(std::move(*raw));
        RoutingTrace trace = route_one(record, stage_seconds);
        apply_accounting(tallies, final_confusion, trace, space_);
        traces.push_back(std::move(trace));
    }
    return finalize(std::move(traces), std::move(tallies), std::move(final_confusion),
                    stage_seconds, seconds_since(wall0));
}

namespace {

// Bounded MPSC queue used by the concurrent driver. pop() returns nullopt
// once every producer is done and the queue is drained.
template <typename T>
class BoundedQueue {
public:
    BoundedQueue(std::size_t capacity, int producers)
        : capacity_(capacity), producers_(producers) {}

    void push(T item) {
        std::unique_lock<std::mutex> lock(mu_);
        cv_space_.wait(lock, [&] { return items_.size() < capacity_; });
        items_.push_back(std::move(item));
        cv_item_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock<std::mutex> lock(mu_);
        cv_item_.wait(lock, [&] { return !items_.empty() || producers_ == 0; });
        return take(lock);
    }

    std::optional<T> try_pop() {
        std::unique_lock<std::mutex> lock(mu_);
        if (items_.empty()) return std::nullopt;
        return take(lock);
    }

    bool exhausted() {
        std::lock_guard<std::mutex> lock(mu_);
        return items_.empty() && producers_ == 0;
    }

    void producer_done() {
        std::lock_guard<std::mutex> lock(mu_);
        producers_ -= 1;
        if (producers_ == 0) cv_item_.notify_all();
    }

private:
    std::optional<T> take(std::unique_lock<std::mutex>& lock) {
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        cv_space_.notify_one();
        lock.unlock();
        return item;
    }

    std::mutex mu_;
    std::condition_variable cv_item_, cv_space_;
    std::deque<T> items_;
    std::size_t capacity_;
    int producers_;
};

struct HistoryMsg {
    FlowRecord record;
    bool classify = false;
    RoutingTrace trace;
};

struct StageMsg {
    FlowRecord record;
    RoutingTrace trace;
};

}  // namespace

RunResult Engine::run_concurrent(RecordSource& source) {
    const auto wall0 = Clock::now();
    constexpr std::size_t kQueueCapacity = 256;

    BoundedQueue<FlowRecord> q_ingest(kQueueCapacity, 1);
    BoundedQueue<StageMsg> q12(kQueueCapacity, 1);
    BoundedQueue<HistoryMsg> q13(kQueueCapacity, 1);
    BoundedQueue<StageMsg> q24(kQueueCapacity, 1);
    BoundedQueue<StageMsg> q23(kQueueCapacity, 1);
    BoundedQueue<StageMsg> q43(kQueueCapacity, 1);
    BoundedQueue<RoutingTrace> q_out(kQueueCapacity * 4, 2);  // stage 3 + stage 4

    std::array<double, 4> stage_seconds{};

    std::thread t1([&] {
        double secs = 0.0;
        while (auto item = q_ingest.pop()) {
            FlowRecord record = std::move(*item);
            RoutingTrace trace;
            trace.arrival_index = record.arrival_index;
            trace.true_class = record.true_class;
            {
                StageTimer timer(secs);
                trace.s1_attack = stages_.s1->predict_attack(record);
                stages_.s1->learn(record, record.true_class != space_.normal_id());
            }
            trace.verdict.record_ref = record.arrival_index;
            trace.verdict.path = {1};
            const bool attack = trace.s1_attack;
            q13.push(HistoryMsg{record, !attack, trace});
            if (attack) q12.push(StageMsg{std::move(record), std::move(trace)});
        }
        q13.producer_done();
        q12.producer_done();
        stage_seconds[0] = secs;
    });

    std::thread t2([&] {
        double secs = 0.0;
        while (auto item = q12.pop()) {
            StageMsg msg = std::move(*item);
            int claimed = 0;
            {
                StageTimer timer(secs);
                claimed = stages_.s2->predict_class(msg.record);
                stages_.s2->learn(msg.record);
            }
            msg.trace.s2_class = claimed;
            msg.trace.verdict.path.push_back(2);
            if (claimed == space_.normal_id()) {
                q23.push(std::move(msg));
            } else {
                q24.push(std::move(msg));
            }
        }
        q23.producer_done();
        q24.producer_done();
        stage_seconds[1] = secs;
    });

    std::thread t4([&] {
        double secs = 0.0;
        while (auto item = q24.pop()) {
            StageMsg msg = std::move(*item);
            const int claimed = *msg.trace.s2_class;
            VerifyDecision decision;
            {
                StageTimer timer(secs);
                decision = stages_.s4->verify(msg.record, claimed);
                stages_.s4->learn(msg.record, claimed);
            }
            msg.trace.s4_confirmed = decision.confirmed;
            msg.trace.verdict.path.push_back(4);
            if (decision.confirmed) {
                msg.trace.verdict.predicted_class = claimed;
                msg.trace.verdict.terminal_stage = 4;
                q_out.push(std::move(msg.trace));
            } else {
                q43.push(std::move(msg));
            }
        }
        q43.producer_done();
        q_out.producer_done();
        stage_seconds[3] = secs;
    });

    std::thread t3([&] {
        double secs = 0.0;
        std::int64_t last_observed = -1;
        std::vector<StageMsg> pending;

        auto serve = [&](StageMsg msg) {
            msg.trace.verdict.path.push_back(3);
            int cls = 0;
            {
                StageTimer timer(secs);
                cls = stages_.s3->classify(msg.record);
            }
            msg.trace.s3_class = cls;
            msg.trace.verdict.predicted_class = cls;
            msg.trace.verdict.terminal_stage = 3;
            q_out.push(std::move(msg.trace));
        };
        auto serve_ready_pending = [&] {
            for (std::size_t i = 0; i < pending.size();) {
                if (pending[i].record.arrival_index <= last_observed) {
                    StageMsg msg = std::move(pending[i]);
                    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
                    serve(std::move(msg));
                } else {
                    ++i;
                }
            }
        };

        while (true) {
            bool progress = false;
            // History first, so classification requests become servable, but
            // bounded so the request queues cannot starve.
            for (int drained = 0; drained < 128; ++drained) {
                auto h = q13.try_pop();
                if (!h) break;
                progress = true;
                {
                    StageTimer timer(secs);
                    stages_.s3->observe(h->record);
                }
                last_observed = h->record.arrival_index;
                if (h->classify) {
                    serve(StageMsg{std::move(h->record), std::move(h->trace)});
                }
            }
            serve_ready_pending();
            for (auto* q : {&q23, &q43}) {
                while (auto r = q->try_pop()) {
                    progress = true;
                    if (r->record.arrival_index <= last_observed) {
                        serve(std::move(*r));
                    } else {
                        pending.push_back(std::move(*r));
                    }
                }
            }
            if (!progress) {
                if (q13.exhausted() && q23.exhausted() && q43.exhausted() && pending.empty()) {
                    break;
                }
                std::this_thread::sleep_for(std::chrono::microseconds(50));
            }
        }
        q_out.producer_done();
        stage_seconds[2] = secs;
    });

    std::vector<RoutingTrace> traces;
    std::thread collector([&] {
        while (auto trace = q_out.pop()) {
            traces.push_back(std::move(*trace));
        }
    });

    while (auto raw = source.next()) {
        q_ingest.push(prepare(std::move(*raw)));
    }
    q_ingest.producer_done();

    t1.join();
    t2.join();
    t4.join();
    t3.join();
    collector.join();

    const int k = space_.size();
    StageTallies tallies;
    tallies.stage2 = CountMatrix::Zero(k, k);
    tallies.stage3 = CountMatrix::Zero(k, k);
    CountMatrix final_confusion = CountMatrix::Zero(k, k);
    for (const auto& trace : traces) {
        apply_accounting(tallies, final_confusion, trace, space_);
    }
    return finalize(std::move(traces), std::move(tallies), std::move(final_confusion),
                    stage_seconds, seconds_since(wall0));
}

}  // namespace cascade
