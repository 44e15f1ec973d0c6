#include <doctest.h>

#include <sstream>

#include "impflow/workload.hpp"

using namespace impflow;

TEST_CASE("synthetic generation") {
    auto topo = Topology::bcube(5, 2);
    WorkloadSpec spec;
    spec.pattern = TrafficPattern::RandomPairs;
    spec.num_flows = 1000;
    spec.load = LoadRegime::Light;
    spec.deadline_mean = 30 * kMillisecond;
    spec.seed = 4;

    SUBCASE("light-regime sizes average about 26 KB") {
        auto flows = gen_synthetic(spec, topo);
        REQUIRE(flows.size() == 1000);
        double mean = 0.0;
        for (const auto& f : flows)
            mean += static_cast<double>(f.size_bytes());
        mean /= 1000.0;
        CHECK(mean > 26000.0 * 0.95);
        CHECK(mean < 26000.0 * 1.05);
    }
    SUBCASE("heavy regime stays in its band") {
        spec.load = LoadRegime::Heavy;
        for (const auto& f : gen_synthetic(spec, topo)) {
            CHECK(f.size_bytes() >= 100000);
            CHECK(f.size_bytes() <= 150000);
        }
    }
    SUBCASE("deadlines respect the floor, sizes are whole units") {
        auto flows = gen_synthetic(spec, topo);
        for (const auto& f : flows) {
            CHECK(f.deadline - f.begin >= spec.deadline_floor);
            CHECK(f.size_bytes() % spec.unit_size == 0);
            CHECK(f.src != f.dst);
        }
    }
    SUBCASE("fixed seed regenerates the identical list") {
        auto a = gen_synthetic(spec, topo);
        auto b = gen_synthetic(spec, topo);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].src == b[i].src);
            CHECK(a[i].dst == b[i].dst);
            CHECK(a[i].deadline == b[i].deadline);
            CHECK(a[i].size_bytes() == b[i].size_bytes());
        }
    }
    SUBCASE("bimodal importance: high half rounded up") {
        auto flows = gen_synthetic(spec, topo);
        for (const auto& f : flows) {
            int high = 0;
            for (const auto& u : f.units) {
                CHECK((u.importance == 10.0 || u.importance == 1.0));
                if (u.importance == 10.0)
                    ++high;
            }
            CHECK(high == (static_cast<int>(f.units.size()) + 1) / 2);
        }
    }
}

TEST_CASE("partition-aggregate generation") {
    auto topo = Topology::bcube(5, 2);
    WorkloadSpec spec;
    spec.load = LoadRegime::Light;
    spec.deadline_mean = 30 * kMillisecond;

    SUBCASE("124 flows, one aggregator") {
        spec.seed = 8;
        auto flows = gen_partition_aggregate(spec, topo);
        REQUIRE(flows.size() == 124);
        NodeIndex dst = flows[0].dst;
        for (const auto& f : flows) {
            CHECK(f.dst == dst);
            CHECK(f.src != dst);
            CHECK(f.begin == 0);
        }
    }
    SUBCASE("two-server build yields one flow") {
        auto small = Topology::bcube(2, 0);
        spec.seed = 3;
        CHECK(gen_partition_aggregate(spec, small).size() == 1);
    }
    SUBCASE("mean aggregate demand near 0.86 Gbps") {
        double mean = 0.0;
        const int seeds = 100;
        for (int s = 1; s <= seeds; ++s) {
            spec.seed = static_cast<std::uint64_t>(s);
            mean += aggregate_demand(gen_partition_aggregate(spec, topo),
                                     spec.deadline_mean);
        }
        mean /= seeds;
        CHECK(mean > 0.86e9 * 0.95);
        CHECK(mean < 0.86e9 * 1.05);
    }
}

TEST_CASE("trace files") {
    SUBCASE("empty trace") {
        std::istringstream in("# nothing here\n");
        auto data = parse_trace(in, "test");
        CHECK(data.flows.empty());
        CHECK(data.truth.queries.empty());
    }
    SUBCASE("round-trip identity") {
        std::string text =
            "FLOW 0 3 7 0 20000\n"
            "UNIT 0 u1 1000 10\n"
            "UNIT 0 u2 1000 2.5\n"
            "FLOW 1 4 7 100 30000\n"
            "UNIT 1 u3 500 1\n"
            "TRUTH q1 u1 u3 u2\n";
        std::istringstream in(text);
        auto data = parse_trace(in, "test");
        REQUIRE(data.flows.size() == 2);
        CHECK(data.flows[0].units.size() == 2);
        CHECK(data.flows[0].deadline == 20 * kMillisecond);
        REQUIRE(data.truth.queries.count("q1"));
        std::ostringstream out;
        save_trace(out, data);
        CHECK(out.str() == text);
    }
    SUBCASE("duplicate rank id is an error with a line number") {
        std::istringstream in(
            "FLOW 0 1 2 0 20000\n"
            "UNIT 0 u1 1000 1\n"
            "UNIT 0 u1 1000 1\n");
        try {
            parse_trace(in, "fixture");
            FAIL("expected a parse error");
        } catch (const SimError& e) {
            CHECK(std::string(e.what()).find("fixture:3") != std::string::npos);
        }
    }
    SUBCASE("malformed line reports its number") {
        std::istringstream in("FLOW 0 1 2 0\n");
        try {
            parse_trace(in, "fixture");
            FAIL("expected a parse error");
        } catch (const SimError& e) {
            CHECK(std::string(e.what()).find("fixture:1") != std::string::npos);
        }
    }
    SUBCASE("unknown truth rank is a warning, not an error") {
        std::istringstream in(
            "FLOW 0 1 2 0 20000\n"
            "UNIT 0 u1 1000 1\n"
            "TRUTH q u1 missing\n");
        auto data = parse_trace(in, "test");
        CHECK(data.truth.queries.at("q").size() == 2);
    }
}
