#include "cascade/metrics.hpp"
#include "cascade/rng.hpp"
#include "cascade/types.hpp"

#include <doctest.h>

#include <cmath>

using namespace cascade;

namespace {

// Independent recount: metrics straight from a (true, predicted) pair list.
struct BruteMetrics {
    double acc = -1, prec = -1, tpr = -1, far = -1, f1 = -1;  // -1 = undefined
};

BruteMetrics brute_force_metrics(const std::vector<std::pair<int, int>>& pairs) {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& [truth, pred] : pairs) {
        if (truth == 1 && pred == 1) ++tp;
        if (truth == 0 && pred == 1) ++fp;
        if (truth == 0 && pred == 0) ++tn;
        if (truth == 1 && pred == 0) ++fn;
    }
    BruteMetrics m;
    const long long total = tp + fp + tn + fn;
    if (total > 0) m.acc = 100.0 * double(tp + tn) / double(total);
    if (tp + fp > 0) m.prec = 100.0 * double(tp) / double(tp + fp);
    if (tp + fn > 0) m.tpr = 100.0 * double(tp) / double(tp + fn);
    if (tp + fp > 0) m.far = 100.0 * double(fp) / double(tp + fp);
    if (m.prec >= 0 && m.tpr >= 0 && m.prec + m.tpr > 0) {
        m.f1 = 2.0 * m.prec * m.tpr / (m.prec + m.tpr);
    }
    return m;
}

}  // namespace

TEST_CASE("aggregate_totals follows the stage-sum equations") {
    StageTallies t;
    t.tp_prime = 5;
    t.tp_dprime = 7;
    CHECK(aggregate_totals(t).tp_t == 12);

    StageTallies zero;
    const TotalTallies z = aggregate_totals(zero);
    CHECK(z.tp_t == 0);
    CHECK(z.fp_t == 0);
    CHECK(z.tn_t == 0);
    CHECK(z.fn_t == 0);

    StageTallies mixed;
    mixed.tp_prime = 3;
    mixed.fp_prime = 1;
    mixed.tn_prime = 10;
    mixed.fn_prime = 2;
    mixed.tp_dprime = 4;
    mixed.fp_dprime = 2;
    mixed.fn_dprime = 1;
    const TotalTallies m = aggregate_totals(mixed);
    CHECK(m.tp_t == 7);
    CHECK(m.fp_t == 3);
    CHECK(m.tn_t == 10);
    CHECK(m.fn_t == 3);
}

TEST_CASE("compute_metrics on a hand-evaluated tally") {
    const MetricReport r = compute_metrics(TotalTallies{90, 10, 95, 5});
    CHECK(r.acc.value() == doctest::Approx(92.5).epsilon(1e-12));
    CHECK(r.prec.value() == doctest::Approx(90.0).epsilon(1e-12));
    CHECK(r.tpr.value() == doctest::Approx(100.0 * 90.0 / 95.0).epsilon(1e-12));
    CHECK(r.far.value() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(r.tpr.value() == doctest::Approx(94.7368).epsilon(1e-4));
    CHECK(r.f1.value() == doctest::Approx(92.3077).epsilon(1e-4));
}

TEST_CASE("compute_metrics perfect classifier") {
    const MetricReport r = compute_metrics(TotalTallies{42, 0, 17, 0});
    CHECK(r.acc.value() == 100.0);
    CHECK(r.prec.value() == 100.0);
    CHECK(r.tpr.value() == 100.0);
    CHECK(r.far.value() == 0.0);
    CHECK(r.f1.value() == 100.0);
}

TEST_CASE("compute_metrics reports undefined ratios as absent") {
    const MetricReport r = compute_metrics(TotalTallies{0, 0, 10, 0});
    CHECK(r.acc.value() == 100.0);
    CHECK_FALSE(r.prec.defined());
    CHECK_FALSE(r.tpr.defined());
    CHECK_FALSE(r.far.defined());
    CHECK_FALSE(r.f1.defined());
    CHECK(!r.prec.note.empty());

    const MetricReport empty = compute_metrics(TotalTallies{0, 0, 0, 0});
    CHECK_FALSE(empty.acc.defined());
}

TEST_CASE("FAR and precision are complements whenever defined") {
    Rng rng(20240817);
    for (int trial = 0; trial < 1000; ++trial) {
        TotalTallies t;
        t.tp_t = static_cast<std::int64_t>(rng.index(1000));
        t.fp_t = static_cast<std::int64_t>(rng.index(1000));
        t.tn_t = static_cast<std::int64_t>(rng.index(1000));
        t.fn_t = static_cast<std::int64_t>(rng.index(1000));
        const MetricReport r = compute_metrics(t);
        if (r.prec.defined()) {
            REQUIRE(r.far.defined());
            CHECK(std::abs(r.far.value() + r.prec.value() - 100.0) <= 1e-9);
        }
        for (const MetricValue* v : {&r.acc, &r.prec, &r.tpr, &r.far, &r.f1}) {
            if (v->defined()) {
                CHECK(v->value() >= 0.0);
                CHECK(v->value() <= 100.0);
            }
        }
    }
}

TEST_CASE("compute_metrics matches a brute-force recount of random label streams") {
    Rng rng(911);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.index(10000);
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(n);
        long long tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int truth = static_cast<int>(rng.index(2));
            const int pred = static_cast<int>(rng.index(2));
            pairs.emplace_back(truth, pred);
            tp += truth == 1 && pred == 1;
            fp += truth == 0 && pred == 1;
            tn += truth == 0 && pred == 0;
            fn += truth == 1 && pred == 0;
        }
        const BruteMetrics expected = brute_force_metrics(pairs);
        const MetricReport r = compute_metrics(TotalTallies{tp, fp, tn, fn});
        CHECK(r.acc.value() == doctest::Approx(expected.acc).epsilon(1e-12));
        if (expected.prec < 0) {
            CHECK_FALSE(r.prec.defined());
        } else {
            CHECK(r.prec.value() == doctest::Approx(expected.prec).epsilon(1e-12));
        }
        if (expected.tpr < 0) {
            CHECK_FALSE(r.tpr.defined());
        } else {
            CHECK(r.tpr.value() == doctest::Approx(expected.tpr).epsilon(1e-12));
        }
        if (expected.f1 < 0) {
            CHECK_FALSE(r.f1.defined());
        } else {
            CHECK(r.f1.value() == doctest::Approx(expected.f1).epsilon(1e-12));
        }
    }
}

TEST_CASE("per_class_report on a hand confusion matrix") {
    const LabelSpace space({"A", "B"}, 0);
    CountMatrix confusion(2, 2);
    confusion << 8, 2,  // 8 A->A, 2 A->B
                 1, 9;  // 1 B->A, 9 B->B
    const auto rows = per_class_report(confusion, space);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].tpr.value() == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(rows[0].far.value() == doctest::Approx(100.0 / 9.0).epsilon(1e-12));
    CHECK(rows[0].instances == 10);
    CHECK(rows[1].instances == 10);

    // Per-class FAR + per-class precision = 100 for every predicted class.
    for (int c = 0; c < 2; ++c) {
        const double tp = double(confusion(c, c));
        const double fp = double(confusion.col(c).sum()) - tp;
        const double prec = 100.0 * tp / (tp + fp);
        CHECK(std::abs(rows[std::size_t(c)].far.value() + prec - 100.0) <= 1e-9);
    }
}

TEST_CASE("per_class_report all-correct and never-predicted cases") {
    const LabelSpace space({"Normal", "DoS"}, 0);
    CountMatrix all_correct(2, 2);
    all_correct << 5, 0, 0, 7;
    const auto rows = per_class_report(all_correct, space);
    CHECK(rows[0].tpr.value() == 100.0);
    CHECK(rows[0].far.value() == 0.0);

    CountMatrix silent(2, 2);
    silent << 5, 0, 5, 0;  // DoS instances exist but DoS is never predicted
    const auto rows2 = per_class_report(silent, space);
    CHECK(rows2[1].tpr.value() == 0.0);
    CHECK_FALSE(rows2[1].far.defined());

    CountMatrix vacant = CountMatrix::Zero(2, 2);
    const auto rows3 = per_class_report(vacant, space);
    CHECK_FALSE(rows3[0].tpr.defined());
    CHECK_FALSE(rows3[0].far.defined());
}

TEST_CASE("verdict path catalogue") {
    CHECK(is_admissible_path({1, 3}));
    CHECK(is_admissible_path({1, 2, 3}));
    CHECK(is_admissible_path({1, 2, 4}));
    CHECK(is_admissible_path({1, 2, 4, 3}));
    CHECK_FALSE(is_admissible_path({1}));
    CHECK_FALSE(is_admissible_path({1, 4}));
    CHECK_FALSE(is_admissible_path({1, 2}));
    CHECK_FALSE(is_admissible_path({2, 3}));
    CHECK_FALSE(is_admissible_path({1, 3, 4}));

    Verdict demoted;
    demoted.path = {1, 2, 4, 3};
    CHECK(demoted.demoted());
    Verdict straight;
    straight.path = {1, 3};
    CHECK_FALSE(straight.demoted());
}

TEST_CASE("label space structure") {
    const LabelSpace space({"DoS", "Normal", "XSS"}, 1);
    CHECK(space.size() == 3);
    CHECK(space.normal_id() == 1);
    CHECK(space.attack_ids() == std::vector<int>{0, 2});
    CHECK(space.is_attack(0));
    CHECK_FALSE(space.is_attack(1));
    CHECK(space.id_of("XSS") == 2);
    CHECK(space.id_of("nope") == -1);

    CHECK_THROWS_AS(LabelSpace({}, 0), std::invalid_argument);
    CHECK_THROWS_AS(LabelSpace({"only"}, 0), std::invalid_argument);
    CHECK_THROWS_AS(LabelSpace({"a", "a"}, 0), std::invalid_argument);
    CHECK_THROWS_AS(LabelSpace({"a", "b"}, 5), std::invalid_argument);
}

TEST_CASE("metric serialization omits absent values") {
    MetricReport r = compute_metrics(TotalTallies{0, 0, 10, 0});
    const std::string kv = metric_kv_lines("final", r);
    CHECK(kv.find("final.acc=100") != std::string::npos);
    CHECK(kv.find("prec") == std::string::npos);
    CHECK(kv.find("far") == std::string::npos);

    CHECK(format_percent_cell(defined_metric(3.24)) == "03.24");
    CHECK(format_percent_cell(defined_metric(98.91)) == "98.91");
    CHECK(format_percent_cell(defined_metric(100.0)) == "100.00");
    CHECK(format_percent_cell(absent_metric("x")) == "--");
}
