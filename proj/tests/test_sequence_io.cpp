#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "tpplab/errors.hpp"
#include "tpplab/sequence.hpp"

using namespace tpplab;

namespace {

std::string temp_path(const char* stem) {
    return std::string("tpplab_test_") + stem + ".jsonl";
}

} // namespace

TEST_CASE("sequence: count_before uses the strict past") {
    EventSequence s;
    s.T = 10.0;
    s.t = {1.0, 2.0, 5.0};
    CHECK(s.count_before(0.5) == 0);
    CHECK(s.count_before(1.0) == 0); // the event at t = 1 is not before t = 1
    CHECK(s.count_before(1.5) == 1);
    CHECK(s.count_before(2.0) == 1);
    CHECK(s.count_before(5.0) == 2);
    CHECK(s.count_before(10.0) == 3);
    CHECK(s.interval_index(3.0) == 2);
}

TEST_CASE("sequence: validation accepts the boundary case t_N = T") {
    EventSequence s;
    s.T = 2.0;
    s.t = {0.5, 1.0, 2.0};
    CHECK_NOTHROW(validate_sequence(s));
}

TEST_CASE("sequence: validation rejects malformed records") {
    EventSequence s;
    s.T = 1.0;

    SUBCASE("event at exactly zero") {
        s.t = {0.0, 0.5};
        CHECK_THROWS_AS(validate_sequence(s), ConfigError);
    }
    SUBCASE("non-increasing times") {
        s.t = {0.5, 0.5};
        CHECK_THROWS_AS(validate_sequence(s), ConfigError);
    }
    SUBCASE("decreasing times") {
        s.t = {0.7, 0.3};
        CHECK_THROWS_AS(validate_sequence(s), ConfigError);
    }
    SUBCASE("event beyond the horizon") {
        s.t = {1.5};
        CHECK_THROWS_AS(validate_sequence(s), ConfigError);
    }
    SUBCASE("non-positive horizon") {
        s.t = {};
        s.T = 0.0;
        CHECK_THROWS_AS(validate_sequence(s), ConfigError);
    }
}

TEST_CASE("sequence io: JSONL round-trip preserves every time exactly") {
    std::vector<EventSequence> seqs(3);
    seqs[0].T = 1.0;
    seqs[0].t = {0.3333333333333333, 0.9999999999999999};
    seqs[1].T = 2.5;
    seqs[1].t = {};
    seqs[2].T = 10.0;
    seqs[2].t = {1e-12, 0.1, 9.999999999, 10.0};

    const std::string path = temp_path("roundtrip");
    write_jsonl(path, seqs);
    const std::vector<EventSequence> back = read_jsonl(path);
    std::remove(path.c_str());

    REQUIRE(back.size() == seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        CHECK(back[i].T == seqs[i].T);
        REQUIRE(back[i].t.size() == seqs[i].t.size());
        for (std::size_t j = 0; j < seqs[i].t.size(); ++j) {
            CHECK(back[i].t[j] == seqs[i].t[j]); // bitwise, not approximate
        }
    }
}

TEST_CASE("sequence io: empty batch writes an empty file that reads back empty") {
    const std::string path = temp_path("empty");
    write_jsonl(path, {});
    CHECK(read_jsonl(path).empty());
    std::remove(path.c_str());
}

TEST_CASE("sequence io: reader rejects invalid records and missing files") {
    CHECK_THROWS_AS(read_jsonl("definitely_missing_dir/nothing.jsonl"), IoError);

    const std::string path = temp_path("badrec");
    {
        FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("{\"t\": [0.5, 0.2], \"T\": 1.0}\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_jsonl(path), ConfigError);
    {
        FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("not json at all\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(read_jsonl(path), IoError);
    std::remove(path.c_str());
}
