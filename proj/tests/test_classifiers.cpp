#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pocshield/classifiers.hpp"
#include "pocshield/error.hpp"
#include "pocshield/eval.hpp"

using namespace posh;

namespace {

const Algorithm kAll[] = {Algorithm::DecisionTree, Algorithm::RandomForest,
                          Algorithm::ExtraTrees,   Algorithm::Bagging,
                          Algorithm::Knn,          Algorithm::NaiveBayes,
                          Algorithm::SgdLogistic};

// separable but non-constant data: class sign on f0/f1, noise on f2/f3
Dataset learnable(std::size_t per_class = 60) {
    std::mt19937_64 gen(12345);
    std::uniform_int_distribution<int> coin(-1, 1);
    std::vector<Sample> rows;
    for (std::size_t i = 0; i < per_class * 2; ++i) {
        Sample s;
        s.label = i % 2 ? Label::Phishing : Label::Benign;
        double cls = s.label == Label::Phishing ? 1.0 : -1.0;
        s.values = {cls, cls, static_cast<double>(coin(gen)),
                    static_cast<double>(coin(gen))};
        rows.push_back(std::move(s));
    }
    return Dataset(testutil::tiny_schema(4), std::move(rows), "learnable");
}

double train_accuracy(const TrainedModel& model, const Dataset& d) {
    return metrics(confusion(model, d)).accuracy;
}

}  // namespace

TEST_CASE("algorithm names round trip") {
    for (Algorithm a : kAll) {
        CHECK(algorithm_from_name(algorithm_name(a)) == a);
    }
    CHECK_THROWS_AS(algorithm_from_name("perceptron"), Error);
}

TEST_CASE("every algorithm fits cleanly separable data") {
    Dataset d = learnable();
    for (Algorithm a : kAll) {
        ClassifierSpec spec;
        spec.algorithm = a;
        spec.seed = 77;
        TrainedModel model = train(spec, d);
        CHECK(train_accuracy(model, d) >= 0.95);
    }
}

TEST_CASE("training is deterministic in the seed") {
    Dataset d = learnable();
    for (Algorithm a : {Algorithm::RandomForest, Algorithm::ExtraTrees,
                        Algorithm::Bagging, Algorithm::SgdLogistic}) {
        ClassifierSpec spec;
        spec.algorithm = a;
        spec.seed = 5;
        TrainedModel m1 = train(spec, d);
        TrainedModel m2 = train(spec, d);
        CHECK(m1.to_json() == m2.to_json());
    }
}

TEST_CASE("decision tree and knn are invariant to row order") {
    Dataset d = learnable();
    auto rows = d.samples();
    std::reverse(rows.begin(), rows.end());
    Dataset reversed(d.schema(), rows, "reversed");

    for (Algorithm a : {Algorithm::DecisionTree, Algorithm::Knn}) {
        ClassifierSpec spec;
        spec.algorithm = a;
        spec.seed = 1;
        if (a == Algorithm::Knn) spec.hyperparams["k"] = 5;
        TrainedModel m1 = train(spec, d);
        TrainedModel m2 = train(spec, reversed);
        std::mt19937_64 gen(2);
        std::uniform_int_distribution<int> coin(-1, 1);
        for (int i = 0; i < 200; ++i) {
            Sample probe;
            probe.values = {static_cast<double>(coin(gen)), static_cast<double>(coin(gen)),
                            static_cast<double>(coin(gen)), static_cast<double>(coin(gen))};
            CHECK(predict(m1, probe) == predict(m2, probe));
        }
    }
}

TEST_CASE("knn vote ties resolve toward phishing") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows(2);
    rows[0].values = {-1.0};
    rows[0].label = Label::Benign;
    rows[1].values = {1.0};
    rows[1].label = Label::Phishing;
    Dataset d(schema, rows, "pair");
    ClassifierSpec spec;
    spec.algorithm = Algorithm::Knn;
    spec.hyperparams["k"] = 2;
    TrainedModel model = train(spec, d);
    Sample mid;
    mid.values = {0.0};  // equidistant: one vote each
    CHECK(predict(model, mid) == Label::Phishing);
}

TEST_CASE("training rejects single-class data and unknown hyperparameters") {
    auto schema = testutil::tiny_schema(1);
    std::vector<Sample> rows(6);
    for (auto& s : rows) {
        s.values = {1.0};
        s.label = Label::Phishing;
    }
    Dataset mono(schema, rows, "mono");
    ClassifierSpec spec;
    spec.algorithm = Algorithm::DecisionTree;
    try {
        train(spec, mono);
        FAIL_CHECK("expected single-class error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingleClassTraining);
    }

    ClassifierSpec bad;
    bad.algorithm = Algorithm::NaiveBayes;
    bad.hyperparams["n_estimators"] = 10;  // not a naive-bayes knob
    try {
        train(bad, learnable(10));
        FAIL_CHECK("expected hyperparameter error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BadHyperparam);
    }
}

TEST_CASE("model save/load preserves predictions exactly") {
    Dataset d = learnable();
    for (Algorithm a : kAll) {
        ClassifierSpec spec;
        spec.algorithm = a;
        spec.seed = 9;
        TrainedModel model = train(spec, d);
        std::string path = testutil::temp_path("poshtest_model.json");
        model.save(path);
        TrainedModel back = TrainedModel::load(path);
        CHECK(back.spec.algorithm == model.spec.algorithm);
        CHECK(back.schema_fingerprint == model.schema_fingerprint);
        for (const auto& s : d.samples()) {
            CHECK(predict(model, s) == predict(back, s));
        }
    }
}

TEST_CASE("model JSON rejects corrupt documents") {
    CHECK_THROWS_AS(TrainedModel::from_json("{bad"), Error);
    CHECK_THROWS_AS(TrainedModel::load("/nonexistent/model.json"), Error);
}

TEST_CASE("logistic loss does not increase over training") {
    Dataset d = learnable(100);
    ClassifierSpec spec;
    spec.algorithm = Algorithm::SgdLogistic;
    spec.hyperparams["epochs"] = 20;
    spec.seed = 4;
    TrainedModel model = train(spec, d);
    REQUIRE(model.sgd_epoch_loss.size() >= 2);
    CHECK(model.sgd_epoch_loss.back() <= model.sgd_epoch_loss.front());
}

TEST_CASE("grid search returns a grid cell and is deterministic") {
    Dataset d = learnable(40);
    HyperGrid grid = {{"k", {3, 5, 9}}};
    ClassifierSpec a = grid_search(Algorithm::Knn, d, grid, 3, 21);
    ClassifierSpec b = grid_search(Algorithm::Knn, d, grid, 3, 21);
    CHECK(a.hyperparams == b.hyperparams);
    double k = a.param("k", 0);
    CHECK((k == 3 || k == 5 || k == 9));
}

TEST_CASE("grid search ties prefer the smaller model") {
    // perfectly separable: every depth scores F1 = 1, so the shallowest wins
    Dataset d = testutil::separable(30);
    HyperGrid grid = {{"n_estimators", {10, 50}}, {"max_depth", {4, 16}}};
    ClassifierSpec best = grid_search(Algorithm::RandomForest, d, grid, 3, 2);
    CHECK(best.param("n_estimators", 0) == 10);
    CHECK(best.param("max_depth", 0) == 4);
}

TEST_CASE("default grids cover every algorithm") {
    for (Algorithm a : kAll) {
        HyperGrid g = default_grid(a);
        Dataset d = learnable(30);
        ClassifierSpec spec = grid_search(a, d, g, 3, 8);
        CHECK(spec.algorithm == a);
        TrainedModel model = train(spec, d);
        CHECK(train_accuracy(model, d) >= 0.9);
    }
}
