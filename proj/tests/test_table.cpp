#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "spinring/errors.hpp"
#include "spinring/table.hpp"

using namespace spinring;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("spinring_table_" + name);
}

std::vector<SampleRow> tricky_rows() {
    return {
        {0.0, 1, "z", 0.1},
        {0.1, 2, "z", -1.0 / 3.0},
        {5.0, 1, "z:pre", 5e-324},              // smallest denormal
        {5.0, 0, "energy", -0.0},
        {12.5, 3, "x", 1.7976931348623157e308}, // largest finite
        {1000.0, 0, "staggered", 3.141592653589793},
        {2.0, 4, "zz@1", -2.8784978480195659e-12},
    };
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("csv round-trip preserves every bit") {
    const auto rows = tricky_rows();
    const auto path = temp_file("roundtrip.csv");
    export_table(rows, path, TableFormat::csv);
    const auto back = import_table(path);

    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i] == rows[i]);
        // operator== treats -0.0 == 0.0; compare the raw bits too
        CHECK(std::memcmp(&back[i].t, &rows[i].t, sizeof(double)) == 0);
        CHECK(std::memcmp(&back[i].value, &rows[i].value, sizeof(double)) == 0);
    }
    CHECK(std::signbit(back[3].value));
}

TEST_CASE("json round-trip preserves every bit") {
    const auto rows = tricky_rows();
    const auto path = temp_file("roundtrip.json");
    export_table(rows, path, TableFormat::json);
    const auto back = import_table(path);

    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i] == rows[i]);
        CHECK(std::memcmp(&back[i].value, &rows[i].value, sizeof(double)) == 0);
    }
}

TEST_CASE("format is detected from content, not extension") {
    const auto rows = tricky_rows();
    const auto path = temp_file("json_named.csv");
    export_table(rows, path, TableFormat::json);
    CHECK(import_table(path) == rows);
}

TEST_CASE("empty tables export a bare header and import as empty") {
    const auto path = temp_file("empty.csv");
    export_table({}, path, TableFormat::csv);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,site,axis,value");
    CHECK(!std::getline(in, line));
    CHECK(import_table(path).empty());

    const auto jpath = temp_file("empty.json");
    export_table({}, jpath, TableFormat::json);
    CHECK(import_table(jpath).empty());
}

TEST_CASE("exports are deterministic byte for byte") {
    const auto rows = tricky_rows();
    const auto a = temp_file("det_a.csv");
    const auto b = temp_file("det_b.csv");
    export_table(rows, a, TableFormat::csv);
    export_table(rows, b, TableFormat::csv);
    CHECK(fnv1a64_file(a) == fnv1a64_file(b));
}

TEST_CASE("axis tags that would corrupt the container are rejected") {
    const auto path = temp_file("badtag.csv");
    for (std::string tag : {"a,b", "a\"b", "a\nb", "a\rb"}) {
        std::vector<SampleRow> rows = {{0.0, 1, tag, 1.0}};
        CHECK_THROWS_AS(export_table(rows, path, TableFormat::csv), ContractViolation);
        CHECK_THROWS_AS(export_table(rows, path, TableFormat::json), ContractViolation);
    }
}

TEST_CASE("csv import rejects malformed files") {
    const auto path = temp_file("malformed.csv");

    write_text(path, "time,site,axis,value\n0,1,z,1\n");
    CHECK_THROWS_AS(import_table(path), IoError);

    write_text(path, "t,site,axis,value\n0,1,z\n");
    CHECK_THROWS_AS(import_table(path), IoError);

    write_text(path, "t,site,axis,value\n0,1,z,1,9\n");
    CHECK_THROWS_AS(import_table(path), IoError);

    write_text(path, "t,site,axis,value\nnope,1,z,1\n");
    CHECK_THROWS_AS(import_table(path), IoError);

    write_text(path, "t,site,axis,value\n0,1.5,z,1\n");
    CHECK_THROWS_AS(import_table(path), IoError);

    CHECK_THROWS_AS(import_table(temp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("fnv1a64 matches the published test vectors") {
    auto hash = [](const std::string& s) { return fnv1a64_bytes(s.data(), s.size()); };
    CHECK(hash("") == 0xcbf29ce484222325ull);
    CHECK(hash("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hash("foobar") == 0x85944171f73967e8ull);
}
