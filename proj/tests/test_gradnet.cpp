// Copyright 2026-present the tactile360 authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "t360/gradnet.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace t360;
using namespace t360::gradnet;

namespace {

TrainingSet random_set(size_t rows, uint64_t seed) {
    TrainingSet s;
    Rng r(seed);
    for (size_t i = 0; i < rows; ++i) {
        std::array<double, kInputs> in{r.uniform(0, 640), r.uniform(0, 640), r.uniform(-30, 30),
                                       r.uniform(-30, 30), r.uniform(-10, 10)};
        s.add(in, 0.01 * in[2] - 0.02 * in[4], std::sin(0.05 * in[3]));
    }
    return s;
}

}  // namespace

TEST_CASE("analytic gradient matches finite differences") {
    TrainingSet data = random_set(40, 1);
    MlpModel m = MlpModel::random({kInputs, 16, 16, kOutputs}, 7);
    m.shift = {320, 320, 0, 0, 0};
    m.scale = {320, 320, 30, 30, 10};
    CHECK(gradient_check(m, data) < 1e-4);
    MlpModel lin = MlpModel::random({kInputs, 8, kOutputs}, 3, Activation::Identity);
    CHECK(gradient_check(lin, data) < 1e-4);
}

TEST_CASE("identity network reproduces a linear map") {
    MlpModel m = MlpModel::random({kInputs, kOutputs}, 1, Activation::Identity);
    std::fill(m.weights[0].begin(), m.weights[0].end(), 0.0);
    m.weights[0][2 * kOutputs + 0] = 1.0;  // dR -> Gx
    m.weights[0][3 * kOutputs + 1] = 1.0;  // dG -> Gy
    for (int s = 0; s < 10; ++s) {
        Rng r(s);
        double dr = r.uniform(-5, 5), dg = r.uniform(-5, 5);
        auto out = predict(m, r.uniform(0, 100), r.uniform(0, 100), dr, dg, r.uniform(-5, 5));
        CHECK(std::abs(out[0] - dr) < 1e-7);
        CHECK(std::abs(out[1] - dg) < 1e-7);
    }
}

TEST_CASE("zero-weight output bias gradient is the mean residual") {
    TrainingSet data = random_set(25, 2);
    MlpModel m = MlpModel::random({kInputs, 4, kOutputs}, 5);
    for (auto& w : m.weights) std::fill(w.begin(), w.end(), 0.0);
    m.biases.back() = {0.3, -0.2};
    std::vector<double> g;
    loss_and_gradient(m, data, &g);
    for (int j = 0; j < kOutputs; ++j) {
        double mean = 0.0;
        for (size_t r = 0; r < data.rows(); ++r) mean += m.biases.back()[j] - data.y[r * kOutputs + j];
        mean /= static_cast<double>(data.rows());
        CHECK(g[g.size() - kOutputs + j] == doctest::Approx(mean).epsilon(1e-10));
    }
}

TEST_CASE("training") {
    SUBCASE("overfits ten rows") {
        TrainingSet data = random_set(10, 3);
        TrainConfig c;
        c.layers = {kInputs, 32, 32, kOutputs};
        c.epochs = 3000;
        c.batch_size = 10;
        c.learning_rate = 3e-3;
        c.validation_fraction = 0.0;
        c.plateau_patience = 100000;
        TrainResult r = train(data, c);
        CHECK(r.history.back().train_loss < 1e-6);
        CHECK(r.train_rows == 10);
    }
    SUBCASE("zero targets give zero output") {
        TrainingSet data;
        Rng r(4);
        for (int i = 0; i < 50; ++i) data.add({r.uniform(0, 9), r.uniform(0, 9), r.uniform(-1, 1), r.uniform(-1, 1), 0.0}, 0.0, 0.0);
        TrainConfig c;
        c.layers = {kInputs, 8, kOutputs};
        c.epochs = 2000;
        c.batch_size = 50;
        c.learning_rate = 3e-3;
        c.validation_fraction = 0.0;
        c.plateau_patience = 100000;
        TrainResult t = train(data, c);
        double worst = 0.0;
        for (double y : predict_batch(t.model, data.x)) worst = std::max(worst, std::abs(y));
        for (int i = 0; i < 200; ++i) {
            auto p = predict(t.model, r.uniform(0, 9), r.uniform(0, 9), r.uniform(-1, 1), r.uniform(-1, 1), 0.0);
            worst = std::max({worst, std::abs(p[0]), std::abs(p[1])});
        }
        CHECK(worst < 1e-3);
    }
    SUBCASE("deterministic and seed dependent") {
        TrainingSet data = random_set(200, 5);
        TrainConfig c;
        c.layers = {kInputs, 8, kOutputs};
        c.epochs = 4;
        c.batch_size = 32;
        CHECK(to_json(train(data, c).model) == to_json(train(data, c).model));
        TrainConfig c2 = c;
        c2.seed = 1;
        CHECK(to_json(train(data, c).model) != to_json(train(data, c2).model));
    }
    TrainConfig bad;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_THROWS_AS(train(TrainingSet{}, TrainConfig{}), Error);
}

TEST_CASE("batch prediction equals row prediction") {
    TrainingSet data = random_set(37, 6);
    MlpModel m = MlpModel::random({kInputs, 16, 16, kOutputs}, 9);
    m.out_scale = 0.37;
    std::vector<double> b = predict_batch(m, data.x);
    for (size_t r = 0; r < data.rows(); ++r) {
        const double* x = &data.x[r * kInputs];
        auto p = predict(m, x[0], x[1], x[2], x[3], x[4]);
        CHECK(p[0] == b[r * kOutputs]);
        CHECK(p[1] == b[r * kOutputs + 1]);
    }
}

TEST_CASE("serialization is bit exact") {
    MlpModel m = MlpModel::random({kInputs, 12, 7, kOutputs}, 11);
    m.shift = {1.0 / 3.0, 2, 3, 4, 5};
    m.scale = {0.1, 0.2, 0.3, 0.4, 0.5};
    m.out_scale = std::nextafter(0.25, 1.0);
    MlpModel back = from_json(to_json(m));
    CHECK(back.parameters() == m.parameters());
    CHECK(back.shift == m.shift);
    CHECK(back.scale == m.scale);
    CHECK(back.out_scale == m.out_scale);
    CHECK(back.layers == m.layers);
    auto path = std::filesystem::temp_directory_path() / "t360_test_model.json";
    save(path, m);
    CHECK(load(path).parameters() == m.parameters());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(from_json("{\"layers\": [5, 2]}"), Error);
    CHECK_THROWS_AS(from_json("not json"), Error);
}

TEST_CASE("Lipschitz bound holds on sampled pairs") {
    MlpModel m = MlpModel::random({kInputs, 16, 16, kOutputs}, 13);
    m.out_scale = 2.0;
    double bound = lipschitz_bound(m);
    Rng r(14);
    for (int i = 0; i < 200; ++i) {
        std::array<double, kInputs> a{}, b{};
        for (int k = 0; k < kInputs; ++k) {
            a[k] = r.uniform(-2, 2);
            b[k] = a[k] + r.uniform(-0.1, 0.1);
        }
        auto pa = predict(m, a[0], a[1], a[2], a[3], a[4]);
        auto pb = predict(m, b[0], b[1], b[2], b[3], b[4]);
        double dout = std::hypot(pa[0] - pb[0], pa[1] - pb[1]), din = 0.0;
        for (int k = 0; k < kInputs; ++k) din += (a[k] - b[k]) * (a[k] - b[k]);
        CHECK(dout <= bound * std::sqrt(din) * (1 + 1e-12));
    }
}
