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

#include "t360/io.hpp"
#include "t360/simd.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <limits>

namespace t360::gradnet {

// ---------------------------------------------------------------------------
// Model

MlpModel MlpModel::random(const std::vector<int>& layers, uint64_t seed, Activation hidden) {
    MlpModel m;
    m.layers = layers;
    m.hidden = hidden;
    if (layers.size() < 2 || layers.front() != kInputs || layers.back() != kOutputs)
        fail(ErrorCode::InvalidArgument, "layer sizes must start at 5 inputs and end at 2 outputs");
    Rng rng(seed);
    for (size_t l = 0; l + 1 < layers.size(); ++l) {
        int in = layers[l], out = layers[l + 1];
        if (in <= 0 || out <= 0) fail(ErrorCode::InvalidArgument, "layer sizes must be positive");
        double a = std::sqrt(6.0 / (in + out));
        std::vector<double> w(static_cast<size_t>(in) * out);
        for (double& x : w) x = rng.uniform(-a, a);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out, 0.0);
    }
    return m;
}

void MlpModel::validate() const {
    if (layers.size() < 2 || layers.front() != kInputs || layers.back() != kOutputs)
        fail(ErrorCode::InvalidArgument, "layer sizes must start at 5 inputs and end at 2 outputs");
    if (weights.size() != layers.size() - 1 || biases.size() != layers.size() - 1)
        fail(ErrorCode::InvalidArgument, "model has the wrong number of parameter blocks");
    for (size_t l = 0; l + 1 < layers.size(); ++l) {
        if (weights[l].size() != static_cast<size_t>(layers[l]) * layers[l + 1] ||
            biases[l].size() != static_cast<size_t>(layers[l + 1]))
            fail(ErrorCode::InvalidArgument, "parameter block shapes do not chain");
    }
    for (int i = 0; i < kInputs; ++i)
        if (!std::isfinite(shift[i]) || !std::isfinite(scale[i]) || scale[i] == 0.0)
            fail(ErrorCode::NonFinite, "normalization constants must be finite and nonzero");
    if (!std::isfinite(out_scale) || out_scale == 0.0) fail(ErrorCode::NonFinite, "output scale must be finite");
}

size_t MlpModel::parameter_count() const {
    size_t n = 0;
    for (size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

std::vector<double> MlpModel::parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (size_t l = 0; l < weights.size(); ++l) {
        p.insert(p.end(), weights[l].begin(), weights[l].end());
        p.insert(p.end(), biases[l].begin(), biases[l].end());
    }
    return p;
}

void MlpModel::set_parameters(const std::vector<double>& p) {
    if (p.size() != parameter_count()) fail(ErrorCode::InvalidArgument, "parameter vector has the wrong length");
    size_t k = 0;
    for (size_t l = 0; l < weights.size(); ++l) {
        for (double& x : weights[l]) x = p[k++];
        for (double& x : biases[l]) x = p[k++];
    }
}

void TrainingSet::add(const std::array<double, kInputs>& in, double gx, double gy) {
    x.insert(x.end(), in.begin(), in.end());
    y.push_back(gx);
    y.push_back(gy);
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1) fail(ErrorCode::InvalidArgument, "epochs and batch size must be positive");
    if (!(learning_rate > 0.0) || !(decay > 0.0 && decay <= 1.0))
        fail(ErrorCode::InvalidArgument, "learning rate and decay must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        fail(ErrorCode::InvalidArgument, "validation fraction must lie in [0, 1)");
    if (plateau_patience < 1) fail(ErrorCode::InvalidArgument, "plateau patience must be positive");
}

// ---------------------------------------------------------------------------
// Forward / backward on normalized rows

namespace {

struct Workspace {
    std::vector<std::vector<double>> acts;   // acts[0] = input, acts[L] = output
    std::vector<std::vector<double>> delta;  // per layer output gradient
    std::vector<std::vector<double>> gw, gb;

    void resize(const MlpModel& m, size_t rows) {
        const size_t L = m.layers.size();
        acts.resize(L);
        delta.resize(L);
        for (size_t l = 0; l < L; ++l) {
            acts[l].resize(rows * m.layers[l]);
            delta[l].resize(rows * m.layers[l]);
        }
        gw.resize(L - 1);
        gb.resize(L - 1);
        for (size_t l = 0; l + 1 < L; ++l) {
            gw[l].resize(m.weights[l].size());
            gb[l].resize(m.biases[l].size());
        }
    }
};

// acts[0] must hold the normalized input rows.
void forward(const MlpModel& m, Workspace& ws, size_t rows) {
    const auto& k = simd::kernels();
    const size_t L = m.layers.size() - 1;
    for (size_t l = 0; l < L; ++l) {
        k.gemm_bias(ws.acts[l].data(), m.weights[l].data(), m.biases[l].data(), ws.acts[l + 1].data(), rows,
                    m.layers[l], m.layers[l + 1]);
        if (l + 1 < L && m.hidden == Activation::Tanh) {
            double* a = ws.acts[l + 1].data();
            for (size_t i = 0; i < rows * m.layers[l + 1]; ++i) a[i] = std::tanh(a[i]);
        }
    }
}

// Returns the batch loss; fills ws.gw / ws.gb with its gradient.
double backward(const MlpModel& m, Workspace& ws, const double* target, size_t rows) {
    const auto& k = simd::kernels();
    const size_t L = m.layers.size() - 1;
    const double* out = ws.acts[L].data();
    double* d = ws.delta[L].data();
    const size_t n = rows * kOutputs;
    const double f = 2.0 / static_cast<double>(n);
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = out[i] - target[i];
        loss += r * r;
        d[i] = f * r;
    }
    loss /= static_cast<double>(n);
    for (size_t l = L; l-- > 0;) {
        std::fill(ws.gw[l].begin(), ws.gw[l].end(), 0.0);
        std::fill(ws.gb[l].begin(), ws.gb[l].end(), 0.0);
        k.gemm_at_b_acc(ws.acts[l].data(), ws.delta[l + 1].data(), ws.gw[l].data(), rows, m.layers[l],
                        m.layers[l + 1]);
        k.column_sum_acc(ws.delta[l + 1].data(), ws.gb[l].data(), rows, m.layers[l + 1]);
        if (l == 0) break;
        k.gemm_a_bt(ws.delta[l + 1].data(), m.weights[l].data(), ws.delta[l].data(), rows, m.layers[l],
                    m.layers[l + 1]);
        if (m.hidden == Activation::Tanh) k.tanh_backward(ws.delta[l].data(), ws.acts[l].data(), rows * m.layers[l]);
    }
    return loss;
}

void normalize_row(const MlpModel& m, const double* in, double* out) {
    for (int i = 0; i < kInputs; ++i) {
        if (!std::isfinite(in[i])) fail(ErrorCode::NonFinite, "non-finite network input");
        out[i] = (in[i] - m.shift[i]) / m.scale[i];
    }
}

double eval_loss(const MlpModel& m, const std::vector<double>& xn, const std::vector<double>& yn) {
    const size_t rows = yn.size() / kOutputs;
    if (rows == 0) return 0.0;
    const size_t chunk = 4096;
    Workspace ws;
    double sum = 0.0;
    for (size_t start = 0; start < rows; start += chunk) {
        size_t cnt = std::min(chunk, rows - start);
        ws.resize(m, cnt);
        std::copy(xn.begin() + start * kInputs, xn.begin() + (start + cnt) * kInputs, ws.acts[0].begin());
        forward(m, ws, cnt);
        const double* out = ws.acts.back().data();
        for (size_t i = 0; i < cnt * kOutputs; ++i) {
            double r = out[i] - yn[start * kOutputs + i];
            sum += r * r;
        }
    }
    return sum / static_cast<double>(rows * kOutputs);
}

}  // namespace

// ---------------------------------------------------------------------------
// Training

TrainResult train(const TrainingSet& data, const TrainConfig& cfg) {
    cfg.validate();
    const size_t N = data.rows();
    if (N == 0) fail(ErrorCode::InvalidArgument, "training set is empty");
    if (data.x.size() != N * kInputs) fail(ErrorCode::InvalidArgument, "training inputs and targets disagree");

    Rng rng(cfg.seed);
    std::vector<size_t> perm(N);
    for (size_t i = 0; i < N; ++i) perm[i] = i;
    rng.shuffle(perm);
    size_t n_val = static_cast<size_t>(std::floor(cfg.validation_fraction * static_cast<double>(N)));
    if (n_val >= N) n_val = 0;
    std::vector<size_t> val(perm.begin(), perm.begin() + n_val), tr(perm.begin() + n_val, perm.end());

    TrainResult res;
    res.train_rows = tr.size();
    res.validation_rows = val.size();
    MlpModel m = MlpModel::random(cfg.layers, cfg.seed ^ 0x5DEECE66DULL, cfg.hidden);

    // Normalization from the training split only.
    for (int j = 0; j < kInputs; ++j) {
        double mean = 0.0;
        for (size_t i : tr) mean += data.x[i * kInputs + j];
        mean /= static_cast<double>(tr.size());
        double var = 0.0;
        for (size_t i : tr) {
            double d = data.x[i * kInputs + j] - mean;
            var += d * d;
        }
        double sd = std::sqrt(var / static_cast<double>(tr.size()));
        m.shift[j] = mean;
        m.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    double ms = 0.0;
    for (size_t i : tr) ms += data.y[i * 2] * data.y[i * 2] + data.y[i * 2 + 1] * data.y[i * 2 + 1];
    double rms = std::sqrt(ms / (2.0 * static_cast<double>(tr.size())));
    m.out_scale = rms > 1e-12 ? rms : 1.0;
    if (rms <= 1e-12) {
        // All-zero targets: a zero output layer is already the exact fit and has zero gradient.
        std::fill(m.weights.back().begin(), m.weights.back().end(), 0.0);
    }

    auto pack = [&](const std::vector<size_t>& idx, std::vector<double>& xn, std::vector<double>& yn) {
        xn.resize(idx.size() * kInputs);
        yn.resize(idx.size() * kOutputs);
        for (size_t r = 0; r < idx.size(); ++r) {
            normalize_row(m, &data.x[idx[r] * kInputs], &xn[r * kInputs]);
            for (int j = 0; j < kOutputs; ++j) {
                double t = data.y[idx[r] * kOutputs + j];
                if (!std::isfinite(t)) fail(ErrorCode::NonFinite, "non-finite training target");
                yn[r * kOutputs + j] = t / m.out_scale;
            }
        }
    };
    std::vector<double> xtr, ytr, xva, yva;
    pack(tr, xtr, ytr);
    pack(val, xva, yva);

    const size_t L = m.weights.size();
    std::vector<std::vector<double>> mw(L), vw(L), mb(L), vb(L);
    for (size_t l = 0; l < L; ++l) {
        mw[l].assign(m.weights[l].size(), 0.0);
        vw[l].assign(m.weights[l].size(), 0.0);
        mb[l].assign(m.biases[l].size(), 0.0);
        vb[l].assign(m.biases[l].size(), 0.0);
    }
    const auto& k = simd::kernels();
    const size_t B = static_cast<size_t>(cfg.batch_size);
    Workspace ws;
    std::vector<double> ybatch(B * kOutputs);
    std::vector<size_t> order(tr.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    double lr = cfg.learning_rate;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;
    long step = 0;
    double pb1 = 1.0, pb2 = 1.0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += B) {
            size_t cnt = std::min(B, order.size() - start);
            ws.resize(m, cnt);
            for (size_t r = 0; r < cnt; ++r) {
                size_t src = order[start + r];
                std::copy(&xtr[src * kInputs], &xtr[src * kInputs] + kInputs, &ws.acts[0][r * kInputs]);
                ybatch[r * 2] = ytr[src * 2];
                ybatch[r * 2 + 1] = ytr[src * 2 + 1];
            }
            forward(m, ws, cnt);
            double loss = backward(m, ws, ybatch.data(), cnt);
            if (!std::isfinite(loss))
                fail(ErrorCode::NonFinite, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                               std::to_string(batches));
            loss_sum += loss;
            ++batches;
            ++step;
            pb1 *= cfg.beta1;
            pb2 *= cfg.beta2;
            double bc1 = 1.0 - pb1, bc2 = 1.0 - pb2;
            for (size_t l = 0; l < L; ++l) {
                k.adam_step(m.weights[l].data(), ws.gw[l].data(), mw[l].data(), vw[l].data(), m.weights[l].size(),
                            lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2);
                k.adam_step(m.biases[l].data(), ws.gb[l].data(), mb[l].data(), vb[l].data(), m.biases[l].size(), lr,
                            cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2);
            }
        }
        EpochStats st;
        st.epoch = epoch;
        st.train_loss = loss_sum / static_cast<double>(batches);
        st.validation_loss = val.empty() ? st.train_loss : eval_loss(m, xva, yva);
        st.learning_rate = lr;
        res.history.push_back(st);
        if (st.validation_loss < best - cfg.plateau_min_delta) {
            best = st.validation_loss;
            since_best = 0;
        } else if (++since_best >= cfg.plateau_patience) {
            lr *= cfg.decay;
            since_best = 0;
        }
    }
    (void)step;
    res.model = std::move(m);
    return res;
}

// ---------------------------------------------------------------------------
// Inference

std::vector<double> predict_batch(const MlpModel& m, const std::vector<double>& x) {
    m.validate();
    if (x.size() % kInputs) fail(ErrorCode::InvalidArgument, "input rows must hold 5 values");
    const size_t rows = x.size() / kInputs;
    std::vector<double> out(rows * kOutputs);
    const size_t chunk = 4096;
    Workspace ws;
    for (size_t start = 0; start < rows; start += chunk) {
        size_t cnt = std::min(chunk, rows - start);
        ws.resize(m, cnt);
        for (size_t r = 0; r < cnt; ++r) normalize_row(m, &x[(start + r) * kInputs], &ws.acts[0][r * kInputs]);
        forward(m, ws, cnt);
        for (size_t i = 0; i < cnt * kOutputs; ++i) out[start * kOutputs + i] = ws.acts.back()[i] * m.out_scale;
    }
    return out;
}

std::array<double, kOutputs> predict(const MlpModel& m, double u, double v, double r, double g, double b) {
    auto out = predict_batch(m, {u, v, r, g, b});
    return {out[0], out[1]};
}

double loss_and_gradient(const MlpModel& m, const TrainingSet& data, std::vector<double>* grad) {
    m.validate();
    const size_t rows = data.rows();
    if (rows == 0) fail(ErrorCode::InvalidArgument, "need at least one row");
    Workspace ws;
    ws.resize(m, rows);
    std::vector<double> yn(rows * kOutputs);
    for (size_t r = 0; r < rows; ++r) {
        normalize_row(m, &data.x[r * kInputs], &ws.acts[0][r * kInputs]);
        for (int j = 0; j < kOutputs; ++j) yn[r * kOutputs + j] = data.y[r * kOutputs + j] / m.out_scale;
    }
    forward(m, ws, rows);
    double loss = backward(m, ws, yn.data(), rows);
    if (grad) {
        grad->clear();
        for (size_t l = 0; l < m.weights.size(); ++l) {
            grad->insert(grad->end(), ws.gw[l].begin(), ws.gw[l].end());
            grad->insert(grad->end(), ws.gb[l].begin(), ws.gb[l].end());
        }
    }
    return loss;
}

double gradient_check(const MlpModel& model, const TrainingSet& data, double step) {
    std::vector<double> analytic;
    loss_and_gradient(model, data, &analytic);
    MlpModel probe = model;
    std::vector<double> p = model.parameters();
    double worst = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double keep = p[i];
        p[i] = keep + step;
        probe.set_parameters(p);
        double lp = loss_and_gradient(probe, data, nullptr);
        p[i] = keep - step;
        probe.set_parameters(p);
        double lm = loss_and_gradient(probe, data, nullptr);
        p[i] = keep;
        double fd = (lp - lm) / (2.0 * step);
        double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
    return worst;
}

double lipschitz_bound(const MlpModel& m) {
    m.validate();
    double bound = std::abs(m.out_scale);
    for (size_t l = 0; l < m.weights.size(); ++l) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w(
            m.weights[l].data(), m.layers[l], m.layers[l + 1]);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(w);
        bound *= svd.singularValues()(0);
    }
    return bound;
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_json(const MlpModel& m) {
    m.validate();
    nlohmann::ordered_json j;
    j["layers"] = m.layers;
    j["activation"] = m.hidden == Activation::Tanh ? "tanh" : "identity";
    std::vector<std::string> w, b;
    for (size_t l = 0; l < m.weights.size(); ++l) {
        w.push_back(io::doubles_to_base64(m.weights[l]));
        b.push_back(io::doubles_to_base64(m.biases[l]));
    }
    j["weights"] = w;
    j["biases"] = b;
    j["norm"]["shift"] = io::doubles_to_base64({m.shift.begin(), m.shift.end()});
    j["norm"]["scale"] = io::doubles_to_base64({m.scale.begin(), m.scale.end()});
    j["out_scale"] = io::doubles_to_base64({m.out_scale});
    return j.dump(2) + "\n";
}

MlpModel from_json(const std::string& text) {
    MlpModel m;
    try {
        auto j = nlohmann::json::parse(text);
        m.layers = j.at("layers").get<std::vector<int>>();
        std::string act = j.value("activation", "tanh");
        if (act == "tanh") m.hidden = Activation::Tanh;
        else if (act == "identity") m.hidden = Activation::Identity;
        else fail(ErrorCode::Parse, "unknown activation '" + act + "'");
        m.weights.clear();
        m.biases.clear();
        for (const auto& s : j.at("weights")) m.weights.push_back(io::base64_to_doubles(s.get<std::string>()));
        for (const auto& s : j.at("biases")) m.biases.push_back(io::base64_to_doubles(s.get<std::string>()));
        auto shift = io::base64_to_doubles(j.at("norm").at("shift").get<std::string>());
        auto scale = io::base64_to_doubles(j.at("norm").at("scale").get<std::string>());
        auto os = io::base64_to_doubles(j.at("out_scale").get<std::string>());
        if (shift.size() != kInputs || scale.size() != kInputs || os.size() != 1)
            fail(ErrorCode::Parse, "model normalization block has the wrong size");
        std::copy(shift.begin(), shift.end(), m.shift.begin());
        std::copy(scale.begin(), scale.end(), m.scale.begin());
        m.out_scale = os[0];
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::Parse, std::string("malformed model file: ") + e.what());
    }
    m.validate();
    return m;
}

void save(const std::filesystem::path& path, const MlpModel& model) { io::write_text(path, to_json(model)); }

MlpModel load(const std::filesystem::path& path) { return from_json(io::read_text(path)); }

}  // namespace t360::gradnet
