#include <functional>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "pocshield/dataset.hpp"
#include "pocshield/error.hpp"

using namespace posh;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

}  // namespace

TEST_CASE("csv write/load round trip") {
    Dataset d = testutil::separable(10);
    std::string path = testutil::temp_path("poshtest_roundtrip.csv");
    write_csv(d, path);
    Dataset back = load_csv(path, d.schema());
    CHECK(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.row(i).values == d.row(i).values);
        CHECK(back.row(i).label == d.row(i).label);
    }
}

TEST_CASE("csv accepts named labels and reordered columns") {
    auto schema = testutil::tiny_schema(2);
    std::string path = testutil::temp_path("poshtest_named.csv");
    testutil::write_text(path,
                         "label,d1,d0\n"
                         "Phishing,1,0\n"
                         "benign,-1,1\n");
    Dataset d = load_csv(path, schema);
    REQUIRE(d.size() == 2);
    CHECK(d.row(0).label == Label::Phishing);
    CHECK(d.row(0).values == std::vector<double>{0.0, 1.0});
    CHECK(d.row(1).label == Label::Benign);
    CHECK(d.row(1).values == std::vector<double>{1.0, -1.0});
}

TEST_CASE("csv error reporting") {
    auto schema = testutil::tiny_schema(2);
    std::string path = testutil::temp_path("poshtest_bad.csv");

    testutil::write_text(path, "d0,label\n1,1\n");
    CHECK(code_of([&] { load_csv(path, schema); }) == ErrorCode::MissingColumn);

    testutil::write_text(path, "d0,d1\n1,1\n");
    CHECK(code_of([&] { load_csv(path, schema); }) == ErrorCode::MissingColumn);

    testutil::write_text(path, "d0,d1,label\nx,1,0\n");
    CHECK(code_of([&] { load_csv(path, schema); }) == ErrorCode::UnparsableValue);

    testutil::write_text(path, "d0,d1,label\n2,1,0\n");
    CHECK(code_of([&] { load_csv(path, schema); }) == ErrorCode::DomainViolation);

    testutil::write_text(path, "d0,d1,label\n1,1,maybe\n");
    CHECK(code_of([&] { load_csv(path, schema); }) == ErrorCode::UnparsableValue);

    CHECK(code_of([&] { load_csv("/nonexistent/x.csv", schema); }) == ErrorCode::IoError);
}

TEST_CASE("dataset construction validates the domain") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows(1);
    rows[0].values = {0.5};
    CHECK(code_of([&] { Dataset(schema, rows, "x"); }) == ErrorCode::DomainViolation);
    rows[0].values = {1.0, 1.0};
    CHECK(code_of([&] { Dataset(schema, rows, "x"); }) == ErrorCode::SchemaMismatch);
}

TEST_CASE("stratified split partitions and preserves class balance") {
    Dataset d = testutil::separable(50);  // 50 phishing + 50 benign
    auto [train, test] = split(d, 0.8, 7);
    CHECK(train.size() + test.size() == d.size());
    CHECK(train.count(Label::Phishing) == 40);
    CHECK(train.count(Label::Benign) == 40);
    CHECK(test.count(Label::Phishing) == 10);
    CHECK(test.count(Label::Benign) == 10);
}

TEST_CASE("split is deterministic in the seed") {
    // make rows distinguishable so shuffles are visible
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows;
    for (int i = 0; i < 30; ++i) {
        Sample s;
        s.values = {static_cast<double>(i % 3 - 1)};
        s.label = i % 2 ? Label::Phishing : Label::Benign;
        rows.push_back(std::move(s));
    }
    Dataset d(schema, rows, "mix");
    auto [a1, b1] = split(d, 0.7, 11);
    auto [a2, b2] = split(d, 0.7, 11);
    CHECK(a1 == a2);
    CHECK(b1 == b2);
    auto [a3, b3] = split(d, 0.7, 12);
    CHECK((!(a1 == a3) || !(b1 == b3)));
}

TEST_CASE("split keeps singleton classes in train") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows;
    Sample lone;
    lone.values = {1.0};
    lone.label = Label::Phishing;
    rows.push_back(lone);
    for (int i = 0; i < 9; ++i) {
        Sample s;
        s.values = {-1.0};
        s.label = Label::Benign;
        rows.push_back(std::move(s));
    }
    Dataset d(schema, rows, "lop");
    auto [train, test] = split(d, 0.8, 1);
    CHECK(train.count(Label::Phishing) == 1);
    CHECK(test.count(Label::Phishing) == 0);
    CHECK(test.size() >= 1);
}

TEST_CASE("split refuses single-class input") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows(4);
    for (auto& s : rows) {
        s.values = {1.0};
        s.label = Label::Phishing;
    }
    Dataset d(schema, rows, "mono");
    CHECK(code_of([&] { split(d, 0.8, 1); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("benign reference profile: mode with ties toward -1") {
    auto schema = testutil::tiny_schema(2);
    std::vector<Sample> rows;
    // benign column 0: {-1, -1, 1} -> mode -1; column 1: {0, 1, 1} -> mode 1
    for (double v0 : {-1.0, -1.0, 1.0}) {
        Sample s;
        s.values = {v0, 0.0};
        s.label = Label::Benign;
        rows.push_back(std::move(s));
    }
    rows[1].values[1] = 1.0;
    rows[2].values[1] = 1.0;
    Sample p;
    p.values = {1.0, 1.0};
    p.label = Label::Phishing;
    rows.push_back(p);
    Dataset d(schema, rows, "ref");
    auto ref = benign_reference_profile(d);
    CHECK(ref == std::vector<double>{-1.0, 1.0});

    // exact tie between -1 and 1 resolves toward -1
    std::vector<Sample> tied;
    for (double v : {-1.0, 1.0}) {
        Sample s;
        s.values = {v, v};
        s.label = Label::Benign;
        tied.push_back(std::move(s));
    }
    auto ref2 = benign_reference_profile(Dataset(schema, tied, "tie"));
    CHECK(ref2 == std::vector<double>{-1.0, -1.0});
}

TEST_CASE("benign reference requires benign rows") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows(2);
    for (auto& s : rows) {
        s.values = {1.0};
        s.label = Label::Phishing;
    }
    Dataset d(schema, rows, "nob");
    CHECK(code_of([&] { benign_reference_profile(d); }) == ErrorCode::NoBenignSamples);
}
