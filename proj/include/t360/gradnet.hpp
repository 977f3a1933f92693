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

// Continuous lookup table: a small float64 MLP mapping (u, v, dR, dG, dB)
// to image-space depth gradients (Gx, Gy), trained with Adam.

#pragma once

#include "t360/common.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace t360::gradnet {

constexpr int kInputs = 5;
constexpr int kOutputs = 2;

enum class Activation { Tanh, Identity };

struct MlpModel {
    std::vector<int> layers{kInputs, 64, 64, kOutputs};
    Activation hidden = Activation::Tanh;
    // weights[l] is layers[l] x layers[l + 1], row-major; biases[l] has layers[l + 1] entries.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    // Network inputs are (x - shift) / scale.
    std::array<double, kInputs> shift{};
    std::array<double, kInputs> scale{1.0, 1.0, 1.0, 1.0, 1.0};
    double out_scale = 1.0;  // mm / px per network output unit

    /// Glorot-uniform weights, zero biases, identity normalization.
    static MlpModel random(const std::vector<int>& layers, uint64_t seed, Activation hidden = Activation::Tanh);
    void validate() const;
    size_t parameter_count() const;
    /// Flattened parameters, layer by layer: weights then biases.
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& p);
};

/// Rows of 5 inputs and 2 targets, both row-major.
struct TrainingSet {
    std::vector<double> x;
    std::vector<double> y;
    size_t rows() const { return y.size() / kOutputs; }
    void add(const std::array<double, kInputs>& in, double gx, double gy);
};

struct TrainConfig {
    std::vector<int> layers{kInputs, 64, 64, kOutputs};
    Activation hidden = Activation::Tanh;
    int epochs = 200;
    int batch_size = 256;
    double learning_rate = 1e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double decay = 0.5;          // learning-rate factor on plateau
    int plateau_patience = 10;   // epochs without improvement
    double plateau_min_delta = 1e-6;
    double validation_fraction = 0.1;
    uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;       // mean batch loss over the epoch
    double validation_loss = 0.0;  // full validation pass (train loss if no split)
    double learning_rate = 0.0;
};

struct TrainResult {
    MlpModel model;
    std::vector<EpochStats> history;
    size_t train_rows = 0, validation_rows = 0;
};

/// Loss: mean over rows and both outputs of the squared residual, in units of
/// out_scale (targets divided by their RMS).
TrainResult train(const TrainingSet& data, const TrainConfig& config);

std::array<double, kOutputs> predict(const MlpModel& model, double u, double v, double r, double g, double b);
/// Rows of 5 inputs -> rows of 2 outputs.
std::vector<double> predict_batch(const MlpModel& model, const std::vector<double>& x);

/// Loss and its gradient with respect to parameters() on raw (unnormalized)
/// rows; exposed for tests and the gradient check.
double loss_and_gradient(const MlpModel& model, const TrainingSet& data, std::vector<double>* grad);

/// Max relative error between analytic and central-difference gradients.
double gradient_check(const MlpModel& model, const TrainingSet& data, double step = 1e-5);

/// Product of layer spectral norms, scaled by out_scale: a Lipschitz bound of
/// predict on normalized inputs.
double lipschitz_bound(const MlpModel& model);

std::string to_json(const MlpModel& model);
MlpModel from_json(const std::string& text);
void save(const std::filesystem::path& path, const MlpModel& model);
MlpModel load(const std::filesystem::path& path);

}  // namespace t360::gradnet
