#include <doctest.h>

#include "impflow/metrics.hpp"

using namespace impflow;

namespace {

FlowOutcome outcome(FlowId id, bool met, std::initializer_list<double> importances,
                    int split_class = -1) {
    FlowOutcome o;
    o.flow.id = id;
    o.flow.deadline = 10 * kMillisecond;
    o.flow.split_class = split_class;
    int i = 0;
    for (double m : importances)
        o.flow.units.push_back({m, 1000, "u" + std::to_string(id) + "_" + std::to_string(i++)});
    o.state = met ? FlowState::Completed : FlowState::Expired;
    o.delivered_at = met ? 9 * kMillisecond : kNoTime;
    o.met_deadline = met;
    return o;
}

} // namespace

TEST_CASE("goodput") {
    SimResult r;
    r.outcomes.push_back(outcome(0, true, {1, 1}));
    r.outcomes.push_back(outcome(1, true, {1, 1, 1}));
    r.outcomes.push_back(outcome(2, false, {1, 1, 1, 1}));
    CHECK(goodput(r) == 5000);
    SUBCASE("nothing met") {
        SimResult none;
        none.outcomes.push_back(outcome(0, false, {1}));
        CHECK(goodput(none) == 0);
    }
    SUBCASE("three of four equal flows") {
        SimResult fig;
        for (int i = 0; i < 4; ++i)
            fig.outcomes.push_back(outcome(i, i < 3, {1, 1, 1, 1}));
        CHECK(goodput(fig) == 3 * 4000);
    }
}

TEST_CASE("aggregated importance") {
    SimResult r;
    r.outcomes.push_back(outcome(0, true, {10, 10, 1, 1}));
    CHECK(aggregated_importance(r) == doctest::Approx(22.0));
    r.outcomes.push_back(outcome(1, false, {10, 10}));
    CHECK(aggregated_importance(r) == doctest::Approx(22.0));
    SUBCASE("only the important child met its deadline") {
        SimResult split;
        split.outcomes.push_back(outcome(0, true, {10, 10}, 0));
        split.outcomes.push_back(outcome(1, false, {1, 1}, 1));
        CHECK(aggregated_importance(split) == doctest::Approx(20.0));
    }
}

TEST_CASE("deadline ratio") {
    SimResult r;
    for (int i = 0; i < 4; ++i)
        r.outcomes.push_back(outcome(i, i < 3, {1}));
    CHECK(deadline_ratio(r, FlowClass::All) == doctest::Approx(0.75));
    SUBCASE("class split") {
        SimResult s;
        s.outcomes.push_back(outcome(0, true, {10}, 0));
        s.outcomes.push_back(outcome(1, true, {10}, 0));
        s.outcomes.push_back(outcome(2, false, {1}, 1));
        CHECK(deadline_ratio(s, FlowClass::Important) == doctest::Approx(1.0));
        CHECK(deadline_ratio(s, FlowClass::Regular) == doctest::Approx(0.0));
    }
    SUBCASE("empty class is an error") {
        SimResult s;
        s.outcomes.push_back(outcome(0, true, {10}));
        CHECK_THROWS_AS(deadline_ratio(s, FlowClass::Important), SimError);
    }
}

TEST_CASE("precision at K") {
    GroundTruth truth;
    truth.queries["q"] = {"a", "b", "c", "d", "e"};

    SUBCASE("received exactly the top-K") {
        std::set<std::string> received{"a", "b", "c"};
        CHECK(precision_at_k(received, truth, 3) == doctest::Approx(1.0));
    }
    SUBCASE("half the received units are relevant") {
        std::set<std::string> received{"a", "b", "x", "y"};
        CHECK(precision_at_k(received, truth, 3) == doctest::Approx(0.5));
    }
    SUBCASE("nothing received is defined as zero") {
        CHECK(precision_at_k({}, truth, 3) == 0.0);
    }
    SUBCASE("paper mode: any subset of the top-K scores 1.0") {
        std::set<std::string> received{"b"};
        CHECK(precision_at_k(received, truth, 4) == doctest::Approx(1.0));
    }
    SUBCASE("conventional mode divides by K") {
        std::set<std::string> received{"a", "b"};
        CHECK(precision_at_k(received, truth, 4, PrecisionMode::Conventional) ==
              doctest::Approx(0.5));
    }
    SUBCASE("K beyond the truth list is an error") {
        CHECK_THROWS_AS(precision_at_k({{"a"}}, truth, 6), SimError);
    }
    SUBCASE("macro average over queries") {
        GroundTruth two = truth;
        two.queries["r"] = {"x", "y"};
        std::set<std::string> received{"a", "x"};
        // q: 1/2 relevant of 2 received; r: 1/2
        CHECK(precision_at_k(received, two, 2) == doctest::Approx(0.5));
    }
}

TEST_CASE("report assembly") {
    SimResult r;
    r.outcomes.push_back(outcome(0, true, {10, 10}, 0));
    r.outcomes.push_back(outcome(1, false, {1, 1}, 1));
    GroundTruth truth;
    truth.queries["q"] = {"u0_0", "u0_1", "u1_0"};
    auto report = build_report(r, truth, {2, 3});
    CHECK(report.goodput_bytes == 2000);
    CHECK(report.aggregated_importance == doctest::Approx(20.0));
    CHECK(report.deadline_ratio_overall == doctest::Approx(0.5));
    CHECK(report.deadline_ratio_important == doctest::Approx(1.0));
    CHECK(report.deadline_ratio_regular == doctest::Approx(0.0));
    CHECK(report.precision_at_k.at(2) == doctest::Approx(1.0));
    CHECK(report.precision_at_k.at(3) == doctest::Approx(1.0));
}
