#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "gsi/io.hpp"

using namespace gsi;
using namespace gsi::io;

TEST_CASE("trajectory line round trip", "[io]") {
    TrajectoryRecord r;
    r.participant_id = "CAS003";
    r.role = sim::Role::CAS;
    r.mode = sim::ModeTag::AutonomousFast;
    r.trial = 2;
    r.t = 1.5;
    r.d = 2.0816;
    r.v = 0.748;
    r.bearing = 0.1234;

    std::ostringstream os;
    write_trajectory_line(os, r);
    const auto parsed = parse_trajectory_line(os.str().substr(0, os.str().size() - 1), 1);
    CHECK(parsed.participant_id == "CAS003");
    CHECK(parsed.role == sim::Role::CAS);
    CHECK(parsed.mode == sim::ModeTag::AutonomousFast);
    CHECK(parsed.trial == 2);
    CHECK(parsed.t == 1.5);
    CHECK(parsed.d == 2.0816);
    CHECK(parsed.v == 0.748);
    REQUIRE(parsed.bearing.has_value());
    CHECK(*parsed.bearing == 0.1234);
}

TEST_CASE("strict trajectory parsing", "[io]") {
    const std::string good =
        R"({"participant_id":"BYS001","role":"BYS","mode":"AS","trial":1,"t":0.1,"d":2.5,"v":0.3})";
    CHECK_NOTHROW(parse_trajectory_line(good, 1));

    SECTION("unknown field rejected") {
        const std::string bad =
            R"({"participant_id":"BYS001","role":"BYS","mode":"AS","trial":1,"t":0.1,"d":2.5,"v":0.3,"x":1})";
        CHECK_THROWS_AS(parse_trajectory_line(bad, 3), parse_error);
        try {
            parse_trajectory_line(bad, 3);
        } catch (const parse_error& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("'x'") != std::string::npos);
        }
    }
    SECTION("missing field rejected") {
        const std::string bad = R"({"participant_id":"BYS001","role":"BYS","mode":"AS","trial":1})";
        CHECK_THROWS_AS(parse_trajectory_line(bad, 1), parse_error);
    }
    SECTION("bad values rejected") {
        CHECK_THROWS_AS(parse_trajectory_line(
                            R"({"participant_id":"a","role":"XX","mode":"AS","trial":1,"t":0,"d":1,"v":0})", 1),
                        parse_error);
        CHECK_THROWS_AS(parse_trajectory_line(
                            R"({"participant_id":"a","role":"BYS","mode":"AS","trial":3,"t":0,"d":1,"v":0})", 1),
                        parse_error);
        CHECK_THROWS_AS(parse_trajectory_line(
                            R"({"participant_id":"a","role":"BYS","mode":"AS","trial":1,"t":0,"d":-1,"v":0})", 1),
                        parse_error);
        CHECK_THROWS_AS(parse_trajectory_line("not json", 1), parse_error);
        CHECK_THROWS_AS(parse_trajectory_line("[1,2]", 1), parse_error);
    }
}

TEST_CASE("rating parsing and normalization precedence", "[io]") {
    const std::string likert =
        R"({"participant_id":"CAS001","role":"CAS","mode":"TO","trial":1,"item":"Q3_approach","value":4,"scale_points":5})";
    auto r = parse_rating_line(likert, 1);
    CHECK(r.normalized() == 0.75);

    const std::string continuous =
        R"({"participant_id":"CAS001","role":"CAS","mode":"TO","trial":1,"item":"Q3_approach","value":4,"scale_points":5,"value_norm":0.81})";
    r = parse_rating_line(continuous, 1);
    CHECK(r.normalized() == 0.81);

    SECTION("range checks") {
        const std::string bad_value =
            R"({"participant_id":"a","role":"CAS","mode":"TO","trial":1,"item":"q","value":6,"scale_points":5})";
        CHECK_THROWS_AS(parse_rating_line(bad_value, 1), parse_error);
        const std::string bad_norm =
            R"({"participant_id":"a","role":"CAS","mode":"TO","trial":1,"item":"q","value":3,"scale_points":5,"value_norm":1.2})";
        CHECK_THROWS_AS(parse_rating_line(bad_norm, 1), parse_error);
        const std::string bad_scale =
            R"({"participant_id":"a","role":"CAS","mode":"TO","trial":1,"item":"q","value":3,"scale_points":9})";
        CHECK_THROWS_AS(parse_rating_line(bad_scale, 1), parse_error);
    }
}

TEST_CASE("segment grouping", "[io]") {
    std::vector<TrajectoryRecord> recs;
    auto push = [&](const std::string& pid, sim::ModeTag mode, int trial, double t) {
        TrajectoryRecord r;
        r.participant_id = pid;
        r.role = sim::Role::BYS;
        r.mode = mode;
        r.trial = trial;
        r.t = t;
        r.d = 1.0;
        recs.push_back(r);
    };

    SECTION("well-formed groups") {
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.0);
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.1);
        push("A", sim::ModeTag::AutonomousFast, 1, 0.0);
        const auto groups = group_segments(recs);
        CHECK(groups.size() == 2);
    }
    SECTION("non-monotone time") {
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.5);
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.1);
        CHECK_THROWS_AS(group_segments(recs), parse_error);
    }
    SECTION("interleaved segments") {
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.0);
        push("A", sim::ModeTag::AutonomousFast, 1, 0.0);
        push("A", sim::ModeTag::AutonomousSlow, 1, 0.1);
        CHECK_THROWS_AS(group_segments(recs), parse_error);
    }
}

TEST_CASE("fmt6 prints 6 significant digits", "[io]") {
    CHECK(fmt6(0.19135802469) == "0.191358");
    CHECK(fmt6(1.0) == "1");
    CHECK(fmt6(-0.25) == "-0.25");
    CHECK(fmt6(1234567.0) == "1.23457e+06");
}

TEST_CASE("csv round trip", "[io]") {
    std::ostringstream os;
    CsvWriter w(os);
    w.header({"a", "b", "c"});
    w.row({"1", "x", "0.5"});
    std::istringstream is(os.str());
    const auto rows = read_csv(is);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
    CHECK(rows[1] == std::vector<std::string>{"1", "x", "0.5"});
}
