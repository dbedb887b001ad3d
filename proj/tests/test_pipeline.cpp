#include "cascade/errors.hpp"
#include "cascade/pipeline.hpp"
#include "cascade/report.hpp"
#include "cascade/rng.hpp"

#include <doctest.h>

#include <set>

using namespace cascade;

namespace {

LabelSpace four_class_space() { return LabelSpace({"Normal", "DoS", "DDoS", "XSS"}, 0); }

// Scripted predictors: behavior driven by a seeded hash of the arrival
// index, covering every routing branch.
struct StubS1 : BinaryDetectStage {
    std::uint64_t salt;
    explicit StubS1(std::uint64_t s) : salt(s) {}
    bool predict_attack(const FlowRecord& r) override {
        return ((static_cast<std::uint64_t>(r.arrival_index) * 2654435761u + salt) >> 3) % 5 != 0;
    }
    void learn(const FlowRecord&, bool) override {}
};

struct StubS2 : AttackClassStage {
    std::uint64_t salt;
    int k;
    StubS2(std::uint64_t s, int classes) : salt(s), k(classes) {}
    int predict_class(const FlowRecord& r) override {
        return static_cast<int>(((static_cast<std::uint64_t>(r.arrival_index) ^ salt) * 40503u >> 2) %
                                static_cast<std::uint64_t>(k));
    }
    void learn(const FlowRecord&) override {}
};

struct StubS3 : SequenceVerifyStage {
    std::uint64_t salt;
    int k;
    StubS3(std::uint64_t s, int classes) : salt(s), k(classes) {}
    void observe(const FlowRecord&) override {}
    int classify(const FlowRecord& r) override {
        return static_cast<int>(((static_cast<std::uint64_t>(r.arrival_index) + salt) * 69069u >> 4) %
                                static_cast<std::uint64_t>(k));
    }
};

struct StubS4 : CommitteeVerifyStage {
    std::uint64_t salt;
    explicit StubS4(std::uint64_t s) : salt(s) {}
    VerifyDecision verify(const FlowRecord& r, int claimed) override {
        const bool confirmed =
            ((static_cast<std::uint64_t>(r.arrival_index) + static_cast<std::uint64_t>(claimed)) * salt >> 5) % 3 != 0;
        return VerifyDecision{confirmed, false};
    }
    void learn(const FlowRecord&, int) override {}
};

StageSet stub_stages(std::uint64_t salt, int k) {
    StageSet s;
    s.s1 = std::make_unique<StubS1>(salt);
    s.s2 = std::make_unique<StubS2>(salt * 3 + 1, k);
    s.s3 = std::make_unique<StubS3>(salt * 5 + 2, k);
    s.s4 = std::make_unique<StubS4>(salt * 7 + 3);
    return s;
}

std::vector<FlowRecord> random_records(Rng& rng, int n, int f, int k) {
    std::vector<FlowRecord> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        FlowRecord r;
        r.arrival_index = i;
        r.true_class = static_cast<int>(rng.index(static_cast<std::size_t>(k)));
        r.features.resize(f);
        for (int j = 0; j < f; ++j) r.features[j] = rng.uniform01();
        out.push_back(std::move(r));
    }
    return out;
}

// Independent recount of the seven counters from verdicts + truths.
struct Recount {
    std::int64_t tp_p = 0, fp_p = 0, tn_p = 0, fn_p = 0, tp_d = 0, fp_d = 0, fn_d = 0;
};

Recount recount_oracle(const std::vector<Verdict>& verdicts, const std::vector<int>& truths,
                       int normal_id) {
    Recount r;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const Verdict& v = verdicts[i];
        const int truth = truths[static_cast<std::size_t>(v.record_ref)];
        const bool truly_attack = truth != normal_id;
        if (v.terminal_stage == 4) {
            if (truth == v.predicted_class) {
                r.tp_d++;
            } else {
                r.fp_d++;
            }
            continue;
        }
        const bool demoted = v.path.size() == 4;
        if (demoted && truly_attack) r.fn_d++;
        const bool predicted_attack = v.predicted_class != normal_id;
        if (predicted_attack && truly_attack) r.tp_p++;
        if (predicted_attack && !truly_attack) r.fp_p++;
        if (!predicted_attack && !truly_attack) r.tn_p++;
        if (!predicted_attack && truly_attack && !demoted) r.fn_p++;
    }
    return r;
}

PipelineOptions fast_options() {
    PipelineOptions o;
    o.stage3.hidden_dim = 8;
    o.stage3.warmup_records = 300;
    o.stage3.epochs = 2;
    o.stage4.train_buffer_size = 200;
    o.stage1_warmup = 100;
    o.stage2_warmup = 100;
    return o;
}

SyntheticSpec smoke_spec(int k_attack, std::int64_t n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n_features = 6;
    spec.n_instances = n;
    spec.seed = seed;
    spec.class_names = {"Normal"};
    spec.normal_id = 0;
    spec.priors = {0.5};
    Rng rng(seed * 11 + 1);
    for (int c = 0; c < k_attack; ++c) {
        spec.class_names.push_back("Attack" + std::to_string(c + 1));
        spec.priors.push_back(0.5 / k_attack);
    }
    for (int c = 0; c <= k_attack; ++c) {
        ClassProfile p;
        p.mean.resize(6);
        for (int f = 0; f < 6; ++f) p.mean[f] = rng.uniform(0.1, 0.9);
        p.stddev = Eigen::VectorXd::Constant(6, 0.04);
        spec.profiles.push_back(std::move(p));
    }
    return spec;
}

}  // namespace

TEST_CASE("accounting rules on single traces") {
    const LabelSpace space = four_class_space();
    StageTallies t;
    t.stage2 = CountMatrix::Zero(4, 4);
    t.stage3 = CountMatrix::Zero(4, 4);
    CountMatrix confusion = CountMatrix::Zero(4, 4);

    SUBCASE("confirmed attack with matching truth is TP''") {
        RoutingTrace tr;
        tr.true_class = 1;
        tr.s1_attack = true;
        tr.s2_class = 1;
        tr.s4_confirmed = true;
        tr.verdict = Verdict{0, 1, {1, 2, 4}, 4};
        apply_accounting(t, confusion, tr, space);
        CHECK(t.tp_dprime == 1);
        CHECK(t.fp_dprime == 0);
        CHECK(t.stage4.at(1)(1, 1) == 1);
    }
    SUBCASE("stage-3 normal verdict on a true attack is FN'") {
        RoutingTrace tr;
        tr.true_class = 1;
        tr.s1_attack = false;
        tr.s3_class = 0;
        tr.verdict = Verdict{0, 0, {1, 3}, 3};
        apply_accounting(t, confusion, tr, space);
        CHECK(t.fn_prime == 1);
        CHECK(t.tn_prime == 0);
    }
    SUBCASE("demotion of a true attack books FN'' once and suppresses FN'") {
        RoutingTrace tr;
        tr.true_class = 1;
        tr.s1_attack = true;
        tr.s2_class = 2;  // claimed DDoS, demoted
        tr.s4_confirmed = false;
        tr.s3_class = 0;  // stage 3 then says normal
        tr.verdict = Verdict{0, 0, {1, 2, 4, 3}, 3};
        apply_accounting(t, confusion, tr, space);
        CHECK(t.fn_dprime == 1);
        CHECK(t.fn_prime == 0);
        CHECK(t.tn_prime == 0);
        const std::int64_t sum = t.tp_prime + t.fp_prime + t.tn_prime + t.fn_prime +
                                 t.tp_dprime + t.fp_dprime + t.fn_dprime;
        CHECK(sum == 1);  // exactly one FN contribution for this record
    }
    SUBCASE("demoted record that stage 3 flags as attack books FN'' and TP'") {
        RoutingTrace tr;
        tr.true_class = 1;
        tr.s1_attack = true;
        tr.s2_class = 2;
        tr.s4_confirmed = false;
        tr.s3_class = 1;
        tr.verdict = Verdict{0, 1, {1, 2, 4, 3}, 3};
        apply_accounting(t, confusion, tr, space);
        CHECK(t.fn_dprime == 1);
        CHECK(t.tp_prime == 1);
        CHECK(t.fn_prime == 0);
    }
    SUBCASE("confirmed committee verdict on a truly-normal record is FP''") {
        RoutingTrace tr;
        tr.true_class = 0;
        tr.s1_attack = true;
        tr.s2_class = 3;
        tr.s4_confirmed = true;
        tr.verdict = Verdict{0, 3, {1, 2, 4}, 4};
        apply_accounting(t, confusion, tr, space);
        CHECK(t.fp_dprime == 1);
        CHECK(t.stage4.at(3)(0, 1) == 1);
    }
}

TEST_CASE("forced routes produce the expected paths") {
    const LabelSpace space = four_class_space();

    struct FixedS1 : BinaryDetectStage {
        bool attack;
        explicit FixedS1(bool a) : attack(a) {}
        bool predict_attack(const FlowRecord&) override { return attack; }
        void learn(const FlowRecord&, bool) override {}
    };
    struct FixedS2 : AttackClassStage {
        int cls;
        explicit FixedS2(int c) : cls(c) {}
        int predict_class(const FlowRecord&) override { return cls; }
        void learn(const FlowRecord&) override {}
    };
    struct FixedS3 : SequenceVerifyStage {
        int cls;
        explicit FixedS3(int c) : cls(c) {}
        void observe(const FlowRecord&) override {}
        int classify(const FlowRecord&) override { return cls; }
    };
    struct FixedS4 : CommitteeVerifyStage {
        bool confirm;
        explicit FixedS4(bool c) : confirm(c) {}
        VerifyDecision verify(const FlowRecord&, int) override { return {confirm, false}; }
        void learn(const FlowRecord&, int) override {}
    };

    auto run_fixed = [&](bool s1, int s2, bool s4, int s3) {
        StageSet stages;
        stages.s1 = std::make_unique<FixedS1>(s1);
        stages.s2 = std::make_unique<FixedS2>(s2);
        stages.s3 = std::make_unique<FixedS3>(s3);
        stages.s4 = std::make_unique<FixedS4>(s4);
        PipelineOptions options;
        options.normalize = false;
        Engine engine(space, 2, options, std::move(stages), nullptr);
        std::vector<FlowRecord> one(1);
        one[0].features = Eigen::VectorXd::Constant(2, 0.5);
        one[0].true_class = 1;
        VectorSource source(one);
        return engine.run(source);
    };

    const RunResult confirmed = run_fixed(true, 1, true, 0);
    CHECK(confirmed.verdicts[0].path == std::vector<int>{1, 2, 4});
    CHECK(confirmed.verdicts[0].predicted_class == 1);

    const RunResult straight_normal = run_fixed(false, 1, true, 0);
    CHECK(straight_normal.verdicts[0].path == std::vector<int>{1, 3});
    CHECK(straight_normal.verdicts[0].predicted_class == 0);

    const RunResult stage2_normal = run_fixed(true, 0, true, 3);
    CHECK(stage2_normal.verdicts[0].path == std::vector<int>{1, 2, 3});
    CHECK(stage2_normal.verdicts[0].predicted_class == 3);

    const RunResult demoted = run_fixed(true, 2, false, 0);
    CHECK(demoted.verdicts[0].path == std::vector<int>{1, 2, 4, 3});
    CHECK(demoted.verdicts[0].terminal_stage == 3);
}

TEST_CASE("fuzzed stage behaviors: path legality, conservation, recount oracle") {
    const LabelSpace space = four_class_space();
    Rng rng(31415);
    for (std::uint64_t salt : {11ull, 222ull, 3333ull}) {
        PipelineOptions options;
        options.normalize = false;
        Engine engine(space, 3, options, stub_stages(salt, space.size()), nullptr);

        const auto records = random_records(rng, 20000, 3, space.size());
        std::vector<int> truths;
        truths.reserve(records.size());
        for (const auto& r : records) truths.push_back(r.true_class);
        VectorSource source(records);
        const RunResult result = engine.run(source);

        REQUIRE(result.n_records == 20000);
        REQUIRE(result.verdicts.size() == 20000);
        std::set<std::vector<int>> seen;
        for (const auto& v : result.verdicts) {
            REQUIRE(is_admissible_path(v.path));
            seen.insert(v.path);
            if (v.predicted_class == space.normal_id()) REQUIRE(v.terminal_stage == 3);
        }
        CHECK(seen.size() == 4);  // the stubs exercise every admissible path

        const Recount oracle = recount_oracle(result.verdicts, truths, space.normal_id());
        CHECK(result.stage_tallies.tp_prime == oracle.tp_p);
        CHECK(result.stage_tallies.fp_prime == oracle.fp_p);
        CHECK(result.stage_tallies.tn_prime == oracle.tn_p);
        CHECK(result.stage_tallies.fn_prime == oracle.fn_p);
        CHECK(result.stage_tallies.tp_dprime == oracle.tp_d);
        CHECK(result.stage_tallies.fp_dprime == oracle.fp_d);
        CHECK(result.stage_tallies.fn_dprime == oracle.fn_d);

        const TotalTallies totals = result.totals;
        CHECK(totals.tp_t == oracle.tp_p + oracle.tp_d);
        CHECK(totals.fp_t == oracle.fp_p + oracle.fp_d);
        CHECK(totals.tn_t == oracle.tn_p);
        CHECK(totals.fn_t == oracle.fn_p + oracle.fn_d);
    }
}

TEST_CASE("per-stage binary views") {
    CountMatrix s1(2, 2);
    s1 << 50, 10,  // true normal: 50 tn, 10 fp
          5, 35;   // true attack: 5 fn, 35 tp
    const TotalTallies t1 = stage1_binary_totals(s1);
    CHECK(t1.tp_t == 35);
    CHECK(t1.fp_t == 10);
    CHECK(t1.tn_t == 50);
    CHECK(t1.fn_t == 5);

    CountMatrix m(3, 3);  // classes: 0=normal, 1, 2
    m << 20, 2, 3,
         1, 10, 4,
         2, 5, 8;
    const TotalTallies t2 = multiclass_binary_totals(m, 0);
    CHECK(t2.tn_t == 20);
    CHECK(t2.fp_t == 5);
    CHECK(t2.fn_t == 3);
    CHECK(t2.tp_t == 27);

    std::map<int, CountMatrix> s4;
    s4[1] = CountMatrix(2, 2);
    s4[1] << 7, 3, 2, 8;
    s4[2] = CountMatrix(2, 2);
    s4[2] << 1, 1, 1, 1;
    const TotalTallies t4 = stage4_binary_totals(s4);
    CHECK(t4.tn_t == 8);
    CHECK(t4.fp_t == 4);
    CHECK(t4.fn_t == 3);
    CHECK(t4.tp_t == 9);
}

TEST_CASE("empty stream yields zero counts and absent metrics") {
    const LabelSpace space = four_class_space();
    PipelineOptions options;
    Engine engine(space, 4, options, stub_stages(1, space.size()), nullptr);
    VectorSource source({});
    const RunResult result = engine.run(source);
    CHECK(result.n_records == 0);
    CHECK(result.verdicts.empty());
    CHECK(result.totals.total() == 0);
    CHECK_FALSE(result.final_metrics.acc.defined());
    CHECK_FALSE(result.per_stage_metrics[0].acc.defined());
}

TEST_CASE("untrained stage 3 verifies by pass-through") {
    const LabelSpace space = four_class_space();
    RunRecorder recorder;
    LstmStage::Options options;
    options.warmup_records = 1000;
    options.hidden_dim = 4;
    LstmStage stage(3, space, options, SelectionConfig{}, &recorder);

    Rng rng(40);
    FlowRecord rec;
    rec.features = Eigen::VectorXd::Constant(3, 0.5);
    for (int i = 0; i < 50; ++i) {
        rec.arrival_index = i;
        rec.true_class = static_cast<int>(rng.index(4));
        stage.observe(rec);
        CHECK(stage.classify(rec) == space.normal_id());
    }
    CHECK_FALSE(stage.trained());
    CHECK(recorder.journal_text().find("passthrough") != std::string::npos);
}

TEST_CASE("production stages on a normal-only stream") {
    SyntheticSpec spec = smoke_spec(1, 5000, 77);
    spec.priors = {1.0, 0.0};
    const LabelSpace space = spec.label_space();

    RunRecorder recorder;
    PipelineOptions options = fast_options();
    options.seed = 9;
    Engine engine(space, spec.n_features, options,
                  build_stages(options, space, spec.n_features, &recorder), &recorder);
    SyntheticStream source(spec);
    const RunResult result = engine.run(source);

    CHECK(result.n_records == 5000);
    CHECK(result.totals.tn_t >= 4500);  // nearly everything verified normal
    CHECK(result.totals.fp_t + result.totals.tp_t <= 500);
    CHECK(result.stage_tallies.fn_prime == 0);  // no attacks exist to miss
}

TEST_CASE("production pipeline smoke run collects drift, masks and timing") {
    SyntheticSpec spec = smoke_spec(2, 4000, 31);
    DriftPoint d;
    d.arrival_index = 2000;
    d.class_id = 1;
    d.shift = Eigen::VectorXd::Constant(6, 0.35);
    spec.drift_points = {d};
    const LabelSpace space = spec.label_space();

    RunRecorder recorder;
    PipelineOptions options = fast_options();
    options.seed = 5;
    Engine engine(space, spec.n_features, options,
                  build_stages(options, space, spec.n_features, &recorder), &recorder);
    SyntheticStream source(spec);
    const RunResult result = engine.run(source);

    CHECK(result.n_records == 4000);
    for (const auto& v : result.verdicts) REQUIRE(is_admissible_path(v.path));
    CHECK(result.total_seconds > 0.0);
    for (int s = 0; s < 4; ++s) CHECK(result.stage_seconds[std::size_t(s)] <= result.total_seconds);
    CHECK_FALSE(result.mask_history.empty());
    const std::string journal = recorder.journal_text();
    CHECK(journal.find("|mask|") != std::string::npos);
    CHECK(journal.find("run_start") != std::string::npos);
}

TEST_CASE("single-worker determinism") {
    SyntheticSpec spec = smoke_spec(2, 3000, 13);
    const LabelSpace space = spec.label_space();
    auto run_once = [&]() {
        PipelineOptions options = fast_options();
        options.seed = 21;
        Engine engine(space, spec.n_features, options,
                      build_stages(options, space, spec.n_features, nullptr), nullptr);
        SyntheticStream source(spec);
        return engine.run(source);
    };
    const RunResult a = run_once();
    const RunResult b = run_once();
    CHECK(a.stage_tallies.tp_prime == b.stage_tallies.tp_prime);
    CHECK(a.stage_tallies.fn_dprime == b.stage_tallies.fn_dprime);
    CHECK(a.final_confusion == b.final_confusion);
    REQUIRE(a.verdicts.size() == b.verdicts.size());
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
        CHECK(a.verdicts[i].predicted_class == b.verdicts[i].predicted_class);
        CHECK(a.verdicts[i].path == b.verdicts[i].path);
    }
}

TEST_CASE("concurrent mode conserves records and path legality") {
    SyntheticSpec spec = smoke_spec(2, 8000, 17);
    const LabelSpace space = spec.label_space();
    RunRecorder recorder;
    PipelineOptions options = fast_options();
    options.seed = 3;
    options.mode = WorkerMode::concurrent;
    Engine engine(space, spec.n_features, options,
                  build_stages(options, space, spec.n_features, &recorder), &recorder);
    SyntheticStream source(spec);
    const RunResult result = engine.run(source);

    REQUIRE(result.n_records == 8000);
    REQUIRE(result.verdicts.size() == 8000);
    std::set<std::int64_t> refs;
    for (const auto& v : result.verdicts) {
        REQUIRE(is_admissible_path(v.path));
        refs.insert(v.record_ref);
    }
    CHECK(refs.size() == 8000);  // one terminal verdict per record

    std::vector<int> truths;
    SyntheticStream replay(spec);
    while (auto r = replay.next()) truths.push_back(r->true_class);
    const Recount oracle = recount_oracle(result.verdicts, truths, space.normal_id());
    CHECK(result.stage_tallies.tp_prime == oracle.tp_p);
    CHECK(result.stage_tallies.fp_prime == oracle.fp_p);
    CHECK(result.stage_tallies.tn_prime == oracle.tn_p);
    CHECK(result.stage_tallies.fn_prime == oracle.fn_p);
    CHECK(result.stage_tallies.tp_dprime == oracle.tp_d);
    CHECK(result.stage_tallies.fp_dprime == oracle.fp_d);
    CHECK(result.stage_tallies.fn_dprime == oracle.fn_d);
}
