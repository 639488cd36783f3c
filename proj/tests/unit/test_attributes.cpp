#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "v2l/attributes/model.hpp"
#include "v2l/error.hpp"
#include "v2l/numeric/nonlinear.hpp"

using namespace v2l;
using namespace v2l::attributes;
using numeric::Rng;

namespace {

RegionFeatureSet random_regions(Rng& rng, std::size_t regions, std::size_t dim) {
    RegionFeatureSet set{"img", {}};
    for (std::size_t r = 0; r < regions; ++r) {
        std::vector<float> f(dim);
        for (float& x : f) x = static_cast<float>(rng.uniform(-1, 1));
        set.regions.push_back(f);
    }
    return set;
}

// Straight-line recomputation of predict() used as an oracle.
std::vector<double> brute_force_scores(const AttributeModel<double>& m, const RegionFeatureSet& set) {
    std::vector<double> best(m.num_attributes(), -INFINITY);
    for (const auto& f : set.regions)
        for (std::size_t j = 0; j < m.num_attributes(); ++j) {
            double z = m.bias(j, 0);
            for (std::size_t k = 0; k < f.size(); ++k) z += m.weight(j, k) * f[k];
            best[j] = std::max(best[j], z);
        }
    for (double& z : best) z = 1.0 / (1.0 + std::exp(-z));
    return best;
}

}  // namespace

TEST_CASE("score_region") {
    AttributeModel<double> zero(3, 2);
    std::vector<float> f{1.0f, 2.0f};
    for (double z : score_region(zero, f)) CHECK(z == 0.0);

    AttributeModel<double> identity(2, 2);
    identity.weight(0, 0) = identity.weight(1, 1) = 1;
    std::vector<float> g{1.0f, -1.0f};
    CHECK(score_region(identity, g) == std::vector<double>{1.0, -1.0});

    std::vector<float> wrong{1.0f, 2.0f, 3.0f};
    CHECK_THROWS_AS(score_region(identity, wrong), ShapeError);

    Rng rng(4);
    auto m = AttributeModel<double>::xavier(5, 2, rng);
    for (double z : score_region(m, g)) {
        CHECK(numeric::sigmoid(z) > 0.0);
        CHECK(numeric::sigmoid(z) < 1.0);
    }
}

TEST_CASE("aggregate_max_pool") {
    std::vector<std::vector<double>> logits{{0.2, 0.9}, {0.7, 0.1}};
    auto pooled = aggregate_max_pool<double>(logits);
    CHECK(pooled.values == std::vector<double>{0.7, 0.9});
    CHECK(pooled.argmax == std::vector<std::size_t>{1, 0});

    std::vector<std::vector<double>> single{{0.3, -0.4}};
    CHECK(aggregate_max_pool<double>(single).values == single[0]);

    std::vector<std::vector<double>> tie{{0.5}, {0.5}};
    CHECK(aggregate_max_pool<double>(tie).argmax[0] == 0);

    std::vector<std::vector<double>> none;
    CHECK_THROWS_AS(aggregate_max_pool<double>(none), PreconditionError);
    std::vector<std::vector<double>> ragged{{1.0, 2.0}, {1.0}};
    CHECK_THROWS_AS(aggregate_max_pool<double>(ragged), PreconditionError);
}

TEST_CASE("max pooling is idempotent under duplication and invariant under permutation") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> logits(1 + rng.below(6), std::vector<double>(4));
        for (auto& r : logits)
            for (double& x : r) x = rng.uniform(-5, 5);
        const auto base = aggregate_max_pool<double>(logits).values;
        auto dup = logits;
        dup.push_back(logits[rng.below(logits.size())]);
        CHECK(aggregate_max_pool<double>(dup).values == base);
        rng.shuffle<std::vector<double>>(logits);
        CHECK(aggregate_max_pool<double>(logits).values == base);
    }
}

TEST_CASE("multilabel_loss reference values") {
    std::vector<float> pos{1.0f};
    std::vector<double> zero{0.0};
    auto at_zero = multilabel_loss(pos, zero);
    CHECK(at_zero.loss == doctest::Approx(0.6931471805599453).epsilon(1e-12));
    CHECK(at_zero.gradient[0] == doctest::Approx(-0.5).epsilon(1e-12));

    std::vector<double> ten{10.0};
    // log(1 + e^-10) evaluated directly
    CHECK(multilabel_loss(pos, ten).loss == doctest::Approx(4.5398899216870535e-05).epsilon(1e-10));

    std::vector<float> neg{0.0f};
    CHECK(multilabel_loss(neg, ten).loss == doctest::Approx(10.000045398899218).epsilon(1e-12));
    CHECK(multilabel_loss(neg, zero).gradient[0] == doctest::Approx(0.5));

    std::vector<double> bad{NAN};
    CHECK_THROWS_AS(multilabel_loss(pos, bad), Error);
    std::vector<double> two{0.0, 0.0};
    CHECK_THROWS_AS(multilabel_loss(pos, two), ShapeError);
}

TEST_CASE("multilabel_loss is non-negative and log 2 at zero logits") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t c = 1 + rng.below(10);
        std::vector<float> y(c);
        std::vector<double> z(c), zeros(c, 0.0);
        for (auto& v : y) v = rng.bernoulli(0.5) ? 1.0f : 0.0f;
        for (auto& v : z) v = rng.uniform(-40, 40);
        CHECK(multilabel_loss(y, z).loss >= 0.0);
        CHECK(multilabel_loss(y, zeros).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("predict") {
    AttributeModel<double> zero(3, 2);
    Rng rng(1);
    for (float s : predict(zero, random_regions(rng, 4, 2)).scores) CHECK(s == 0.5f);

    // 3 regions x 4 attributes against the straight-line oracle
    for (int trial = 0; trial < 20; ++trial) {
        auto m = AttributeModel<double>::xavier(4, 5, rng);
        for (double& b : m.bias.flat()) b = rng.uniform(-1, 1);
        auto set = random_regions(rng, 3, 5);
        auto got = predict(m, set).scores;
        auto want = brute_force_scores(m, set);
        for (std::size_t j = 0; j < 4; ++j) CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-6));
    }

    // one region dominating attribute 0
    AttributeModel<double> m(1, 1);
    m.weight(0, 0) = 1;
    RegionFeatureSet set{"x", {{0.1f}, {3.0f}, {-2.0f}}};
    CHECK(predict(m, set).scores[0] == doctest::Approx(numeric::sigmoid(3.0)).epsilon(1e-6));

    RegionFeatureSet empty{"x", {}};
    CHECK_THROWS_AS(predict(m, empty), DataError);
}

TEST_CASE("predict is monotone in a single region's logit") {
    Rng rng(12);
    AttributeModel<double> m(1, 1);
    m.weight(0, 0) = 1.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto set = random_regions(rng, 3, 1);
        const std::size_t r = rng.below(3);
        const float before = predict(m, set).scores[0];
        set.regions[r][0] += static_cast<float>(rng.uniform(0, 2));
        CHECK(predict(m, set).scores[0] >= before);
    }
}

TEST_CASE("image loss gradient matches finite differences") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto model = AttributeModel<double>::xavier(2, 3, rng);
        for (double& b : model.bias.flat()) b = rng.uniform(-0.5, 0.5);
        auto set = random_regions(rng, 2, 3);
        std::vector<float> labels{rng.bernoulli(0.5) ? 1.0f : 0.0f, rng.bernoulli(0.5) ? 1.0f : 0.0f};

        auto grads = model.zeros_like();
        image_loss(model, set, labels, &grads);
        const auto tensors = model.tensors();
        const auto analytic = numeric::flatten<double>(grads.tensors());
        const auto point = numeric::flatten<double>(tensors);
        auto fd = numeric::finite_difference_gradient(
            [&](std::span<const double> p) {
                auto probe = model;
                numeric::unflatten<double>(p, probe.tensors());
                return image_loss(probe, set, labels);
            },
            point);
        CHECK(numeric::max_relative_error(analytic, fd) < 1e-4);
    }
}

TEST_CASE("top_k_attributes") {
    std::vector<std::string> terms{"t0", "t1", "t2"};
    AttributeVector v{{0.1f, 0.9f, 0.5f}};
    auto top = top_k_attributes(v, terms, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "t1");
    CHECK(top[1].first == "t2");
    CHECK(top_k_attributes(v, terms, 3).size() == 3);

    std::vector<std::string> two{"a", "b"};
    AttributeVector tie{{0.5f, 0.5f}};
    CHECK(top_k_attributes(tie, two, 1)[0].first == "a");
    CHECK_THROWS_AS(top_k_attributes(v, terms, 0), PreconditionError);
    CHECK_THROWS_AS(top_k_attributes(v, terms, 4), PreconditionError);
}

TEST_CASE("training reduces loss and rejects bad input") {
    Rng rng(5);
    std::vector<LabeledImage> data;
    for (int i = 0; i < 30; ++i) {
        LabeledImage ex{random_regions(rng, 3, 4), {0.0f, 0.0f}};
        const bool on = rng.bernoulli(0.5);
        if (on) {
            ex.features.regions[rng.below(3)][0] += 3.0f;
            ex.labels[0] = 1.0f;
        }
        data.push_back(ex);
    }
    numeric::OptimizerConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.batch_size = 5;
    cfg.epochs = 50;
    auto model = AttributeModel<double>::xavier(2, 4, rng);
    auto history = train(model, std::span<const LabeledImage>(data), cfg, rng);
    REQUIRE(history.epoch_loss.size() == 50);
    CHECK(history.epoch_loss.back() < history.epoch_loss.front());

    std::vector<LabeledImage> none;
    CHECK_THROWS_AS(train(model, std::span<const LabeledImage>(none), cfg, rng), PreconditionError);
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(train(model, std::span<const LabeledImage>(data), cfg, rng), PreconditionError);
}

TEST_CASE("feature, prediction and model files") {
    const auto dir = std::filesystem::temp_directory_path() / "v2l_test_attr";
    std::filesystem::create_directories(dir);
    FeatureFile ff{2, {{"a", {{1.0f, 2.0f}, {3.0f, 4.0f}}}}};
    save_features(dir / "f.jsonl", ff);
    auto loaded = load_features(dir / "f.jsonl");
    CHECK(loaded.dim == 2);
    CHECK(loaded.images[0].regions == ff.images[0].regions);

    PredictionFile pf{{"dog", "cat"}, {{"a", AttributeVector{{0.25f, 0.75f}}}}};
    save_predictions(dir / "p.jsonl", pf);
    auto lp = load_predictions(dir / "p.jsonl");
    CHECK(lp.terms == pf.terms);
    CHECK(lp.images[0].second.scores == pf.images[0].second.scores);

    Rng rng(3);
    auto model = AttributeModel<float>::xavier(2, 2, rng);
    save_model(dir / "m", model);
    auto back = load_model(dir / "m");
    CHECK(back.weight == model.weight);
    std::filesystem::remove_all(dir);
}
