#include "roadcast/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "roadcast/rng.hpp"

namespace roadcast::models {

using json = nlohmann::ordered_json;
using te::NodeId;

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Drcp: return "drcp";
        case ModelKind::LogisticRegression: return "lr";
        default: return "mlp";
    }
}

std::optional<ModelKind> model_kind_from_string(const std::string& s) {
    if (s == "drcp") return ModelKind::Drcp;
    if (s == "lr") return ModelKind::LogisticRegression;
    if (s == "mlp") return ModelKind::Mlp;
    return std::nullopt;
}

std::int64_t Model::parameter_count() {
    std::int64_t n = 0;
    for (const auto& p : graph.params()) n += p.value->size();
    return n;
}

// --------------------------------------------------------- initialization --

namespace {

void glorot_uniform(te::Tensor<float>& t, int fan_in, int fan_out, rng::Rng& r) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::int64_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<float>(r.uniform(-a, a));
}

NodeId conv_block(Model& m, rng::Rng& r, NodeId x, int in_ch, int out_ch, bool bn, bool pool,
                  const std::string& name) {
    auto& g = m.graph;
    NodeId w = g.param(name + ".kernel", {3, 3, in_ch, out_ch});
    glorot_uniform(g.value(w), 9 * in_ch, 9 * out_ch, r);
    NodeId b = g.param(name + ".bias", {out_ch});
    NodeId y = g.conv2d(x, w, b);
    if (bn) {
        NodeId gamma = g.param(name + ".bn.gamma", {out_ch});
        g.value(gamma).fill(1.f);
        NodeId beta = g.param(name + ".bn.beta", {out_ch});
        y = g.batchnorm(y, gamma, beta, name + ".bn", out_ch);
    }
    if (pool) y = g.maxpool2(y);
    return g.relu(y);
}

NodeId dense_layer(Model& m, rng::Rng& r, NodeId x, int in_dim, int out_dim,
                   const std::string& name) {
    auto& g = m.graph;
    NodeId w = g.param(name + ".weight", {in_dim, out_dim});
    glorot_uniform(g.value(w), in_dim, out_dim, r);
    NodeId b = g.param(name + ".bias", {out_dim});
    return g.dense(x, w, b);
}

NodeId lstm_layer(Model& m, rng::Rng& r, NodeId x, int in_dim, int units, bool return_seq,
                  bool tanh_act, const std::string& name) {
    auto& g = m.graph;
    NodeId wx = g.param(name + ".wx", {in_dim, 4 * units});
    glorot_uniform(g.value(wx), in_dim, 4 * units, r);
    NodeId wh = g.param(name + ".wh", {units, 4 * units});
    glorot_uniform(g.value(wh), units, 4 * units, r);
    NodeId b = g.param(name + ".bias", {4 * units});
    for (int j = units; j < 2 * units; ++j) g.value(b)[j] = 1.f;  // forget gate bias
    return g.lstm(x, wx, wh, b, units, return_seq,
                  tanh_act ? te::Activation::Tanh : te::Activation::Sigmoid);
}

void attach_loss(Model& m, const TrainConfig& tc, NodeId prob, NodeId l2_term) {
    auto& g = m.graph;
    m.in_label = g.input("label");
    m.per_sample_loss = g.weighted_bce(prob, m.in_label,
                                       static_cast<float>(tc.class_weight_negative),
                                       static_cast<float>(tc.class_weight_positive));
    NodeId total = g.mean(m.per_sample_loss);
    if (l2_term >= 0) total = g.add(total, l2_term);
    m.loss = total;
}

}  // namespace

std::unique_ptr<Model> build_drcp(const DrcpConfig& cfg, const TrainConfig& tc,
                                  std::uint64_t seed) {
    if (cfg.conv_block_channels.size() != cfg.batchnorm_in_conv_blocks.size())
        throw std::invalid_argument("conv block / batchnorm flag count mismatch");
    const int pools = static_cast<int>(cfg.decoder_channels.size());
    int spatial = cfg.tile_size;
    for (int i = 0; i < pools; ++i) {
        if (spatial % 2) throw std::invalid_argument("tile size not divisible by decoder pools");
        spatial /= 2;
    }
    if (spatial < 1) throw std::invalid_argument("tile too small for decoder depth");
    if (cfg.fc_sizes.empty() || cfg.fc_sizes.back() != 1)
        throw std::invalid_argument("final dense layer must have size 1");

    auto m = std::make_unique<Model>();
    m->kind = ModelKind::Drcp;
    m->drcp = cfg;
    m->seed = seed;
    rng::Rng r(rng::derive_seed(seed, "init.drcp"));
    auto& g = m->graph;

    m->in_tile = g.input("tile");
    m->in_window = g.input("window");

    // CNN branch
    NodeId x = m->in_tile;
    int ch = 3;
    for (std::size_t i = 0; i < cfg.conv_block_channels.size(); ++i) {
        x = conv_block(*m, r, x, ch, cfg.conv_block_channels[i],
                       cfg.batchnorm_in_conv_blocks[i], false,
                       "cnn.block" + std::to_string(i + 1));
        ch = cfg.conv_block_channels[i];
    }
    for (std::size_t i = 0; i < cfg.decoder_channels.size(); ++i) {
        x = conv_block(*m, r, x, ch, cfg.decoder_channels[i], true, true,
                       "cnn.decoder" + std::to_string(i + 1));
        ch = cfg.decoder_channels[i];
    }
    x = g.flatten(x);
    const int flat_dim = spatial * spatial * ch;
    NodeId cnn_out = g.sigmoid(dense_layer(*m, r, x, flat_dim, cfg.post_flatten_dense, "cnn.out"));

    // RNN branch
    NodeId h = m->in_window;
    int dim = cfg.feature_dim;
    for (std::size_t i = 0; i < cfg.lstm_units.size(); ++i) {
        const bool last = i + 1 == cfg.lstm_units.size();
        h = lstm_layer(*m, r, h, dim, cfg.lstm_units[i], !last, cfg.lstm_tanh,
                       "rnn.lstm" + std::to_string(i + 1));
        dim = cfg.lstm_units[i];
    }
    NodeId rnn_out = g.sigmoid(dense_layer(*m, r, h, dim, cfg.rnn_dense, "rnn.out"));

    // fully connected head
    NodeId cat = g.concat(cnn_out, rnn_out);
    int width = cfg.post_flatten_dense + cfg.rnn_dense;
    NodeId y = cat;
    for (std::size_t i = 0; i + 1 < cfg.fc_sizes.size(); ++i) {
        y = g.relu(dense_layer(*m, r, y, width, cfg.fc_sizes[i], "fc" + std::to_string(i + 1)));
        width = cfg.fc_sizes[i];
    }
    y = dense_layer(*m, r, y, width, 1, "fc" + std::to_string(cfg.fc_sizes.size()));
    m->out_prob = g.sigmoid(y);

    attach_loss(*m, tc, m->out_prob, -1);
    return m;
}

std::unique_ptr<Model> build_baseline(ModelKind kind, const TrainConfig& tc, std::uint64_t seed) {
    if (kind == ModelKind::Drcp) throw std::invalid_argument("build_baseline: use build_drcp");
    auto m = std::make_unique<Model>();
    m->kind = kind;
    m->seed = seed;
    rng::Rng r(rng::derive_seed(seed, kind == ModelKind::LogisticRegression ? "init.lr" : "init.mlp"));
    auto& g = m->graph;
    m->in_vec = g.input("vec");

    NodeId l2_term = -1;
    if (kind == ModelKind::LogisticRegression) {
        NodeId w = g.param("lr.weight", {kBaselineInputDim, 1});
        glorot_uniform(g.value(w), kBaselineInputDim, 1, r);
        NodeId b = g.param("lr.bias", {1});
        m->out_prob = g.sigmoid(g.dense(m->in_vec, w, b));
        l2_term = g.l2_penalty(w, static_cast<float>(tc.l2_lambda));
    } else {
        NodeId h = g.relu(dense_layer(*m, r, m->in_vec, kBaselineInputDim, 100, "mlp.hidden"));
        m->out_prob = g.sigmoid(dense_layer(*m, r, h, 100, 1, "mlp.out"));
    }
    attach_loss(*m, tc, m->out_prob, l2_term);
    return m;
}

// --------------------------------------------------------------- batching --

void vectorize_baseline_input(const features::FeatureVector* history, const tiles::Tile& tile,
                              float* out) {
    int pos = 0;
    for (int t = 0; t < features::kHistory; ++t)
        for (int d = 0; d < features::kDim; ++d) out[pos++] = history[t].values[d];
    const int block = tile.size / kBaselinePooled;
    if (block < 1 || tile.size % kBaselinePooled)
        throw std::invalid_argument("tile size must be a multiple of 16 for baseline pooling");
    for (int by = 0; by < kBaselinePooled; ++by) {
        for (int bx = 0; bx < kBaselinePooled; ++bx) {
            double acc = 0.0;
            for (int y = by * block; y < (by + 1) * block; ++y) {
                for (int x = bx * block; x < (bx + 1) * block; ++x) {
                    const auto c = tile.get(y, x);
                    acc += (static_cast<int>(c.r) + c.g + c.b) / 3.0;
                }
            }
            out[pos++] = static_cast<float>(acc / (255.0 * block * block));
        }
    }
}

namespace {

const tiles::Tile& tile_for(const Dataset& d, const grid::HexCell& cell) {
    auto it = d.tiles->find(cell);
    if (it == d.tiles->end())
        throw std::runtime_error("no tile rendered for cell " + grid::cell_id(cell));
    return it->second;
}

void fill_batch(Model& m, const Dataset& d,
                const std::vector<const features::SampleWindow*>& batch) {
    const int b = static_cast<int>(batch.size());
    auto& g = m.graph;
    std::array<features::FeatureVector, features::kHistory> norm_hist;

    if (m.kind == ModelKind::Drcp) {
        const int s = m.drcp.tile_size;
        auto& tile_in = g.value(m.in_tile);
        auto& win_in = g.value(m.in_window);
        tile_in.ensure_shape({b, s, s, 3});
        win_in.ensure_shape({b, m.drcp.history, m.drcp.feature_dim});
        for (int i = 0; i < b; ++i) {
            const auto& w = *batch[i];
            const auto& tile = tile_for(d, w.cell);
            if (tile.size != s)
                throw std::runtime_error("tile size mismatch: got " + std::to_string(tile.size) +
                                         ", model expects " + std::to_string(s));
            float* dst = tile_in.data() + static_cast<std::int64_t>(i) * s * s * 3;
            for (std::size_t p = 0; p < tile.pixels.size(); ++p)
                dst[p] = static_cast<float>(tile.pixels[p]) / 255.f;
            float* wdst = win_in.data() +
                          static_cast<std::int64_t>(i) * m.drcp.history * m.drcp.feature_dim;
            for (int t = 0; t < m.drcp.history; ++t) {
                const auto nv = features::normalize(d.norm, w.history[t]);
                std::memcpy(wdst + static_cast<std::int64_t>(t) * m.drcp.feature_dim,
                            nv.values.data(), sizeof(float) * features::kDim);
            }
        }
    } else {
        auto& vec_in = g.value(m.in_vec);
        vec_in.ensure_shape({b, kBaselineInputDim});
        for (int i = 0; i < b; ++i) {
            const auto& w = *batch[i];
            for (int t = 0; t < features::kHistory; ++t)
                norm_hist[t] = features::normalize(d.norm, w.history[t]);
            vectorize_baseline_input(norm_hist.data(), tile_for(d, w.cell),
                                     vec_in.data() + static_cast<std::int64_t>(i) * kBaselineInputDim);
        }
    }
    auto& label_in = g.value(m.in_label);
    label_in.ensure_shape({b});
    for (int i = 0; i < b; ++i) label_in[i] = static_cast<float>(batch[i]->label);
}

double eval_mean_loss(Model& m, const Dataset& d,
                      const std::vector<features::SampleWindow>& windows, int batch_size) {
    m.graph.training = false;
    double total = 0.0;
    std::vector<const features::SampleWindow*> batch;
    for (std::size_t pos = 0; pos < windows.size(); pos += batch_size) {
        batch.clear();
        for (std::size_t i = pos; i < std::min(windows.size(), pos + batch_size); ++i)
            batch.push_back(&windows[i]);
        fill_batch(m, d, batch);
        m.graph.forward();
        const auto& per_sample = m.graph.value(m.per_sample_loss);
        for (std::int64_t i = 0; i < per_sample.size(); ++i) total += per_sample[i];
    }
    return total / static_cast<double>(windows.size());
}

}  // namespace

TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg) {
    const auto& train_w = data.splits->train;
    const auto& val_w = data.splits->val;
    if (train_w.empty()) throw std::invalid_argument("training split is empty");
    if (val_w.empty()) throw std::invalid_argument("validation split is empty");

    te::Adam<float> adam;
    te::LrSchedule schedule(cfg.lr_initial, cfg.lr_factor, cfg.lr_patience, cfg.lr_floor);
    auto params = model.graph.params();
    auto state = model.graph.state();

    std::vector<std::size_t> order(train_w.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Rng shuffle_rng(rng::derive_seed(cfg.seed, "train.shuffle"));

    TrainResult result;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<te::Tensor<float>> best_state;
    int stale = 0;

    std::vector<const features::SampleWindow*> batch;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        model.graph.training = true;
        double train_loss_sum = 0.0;
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
            batch.clear();
            for (std::size_t i = pos; i < std::min(order.size(), pos + cfg.batch_size); ++i)
                batch.push_back(&train_w[order[i]]);
            fill_batch(model, data, batch);
            try {
                model.graph.forward();
                model.graph.backward(model.loss);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error("training aborted at epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(pos / cfg.batch_size) + ": " +
                                         e.what());
            }
            const auto& per_sample = model.graph.value(model.per_sample_loss);
            for (std::int64_t i = 0; i < per_sample.size(); ++i) train_loss_sum += per_sample[i];
            adam.step(params, schedule.lr());
        }

        const double val_loss = eval_mean_loss(model, data, val_w, cfg.batch_size);
        EpochStats es;
        es.train_loss = train_loss_sum / static_cast<double>(train_w.size());
        es.val_loss = val_loss;
        es.lr = schedule.lr();
        result.history.push_back(es);

        if (val_loss < best_val) {
            best_val = val_loss;
            result.best_epoch = epoch;
            stale = 0;
            best_state.clear();
            for (auto& [name, tensor] : state) best_state.push_back(*tensor);
        } else {
            ++stale;
        }
        schedule.observe(val_loss);
        if (stale >= cfg.early_stop_patience) break;
    }

    if (!best_state.empty()) {
        for (std::size_t i = 0; i < state.size(); ++i) *state[i].second = best_state[i];
    }
    result.best_val_loss = best_val;
    return result;
}

std::vector<float> predict(Model& model, const Dataset& data,
                           const std::vector<features::SampleWindow>& windows, int batch_size) {
    model.graph.training = false;
    std::vector<float> probs;
    probs.reserve(windows.size());
    std::vector<const features::SampleWindow*> batch;
    for (std::size_t pos = 0; pos < windows.size(); pos += batch_size) {
        batch.clear();
        for (std::size_t i = pos; i < std::min(windows.size(), pos + batch_size); ++i)
            batch.push_back(&windows[i]);
        fill_batch(model, data, batch);
        model.graph.forward();
        const auto& p = model.graph.value(model.out_prob);
        for (std::int64_t i = 0; i < p.size(); ++i) probs.push_back(p[i]);
    }
    return probs;
}

// ------------------------------------------------------------ checkpoints --

namespace {

json drcp_config_json(const DrcpConfig& c) {
    return json{{"tile_size", c.tile_size},
                {"conv_block_channels", c.conv_block_channels},
                {"batchnorm_in_conv_blocks", c.batchnorm_in_conv_blocks},
                {"decoder_channels", c.decoder_channels},
                {"post_flatten_dense", c.post_flatten_dense},
                {"lstm_units", c.lstm_units},
                {"rnn_dense", c.rnn_dense},
                {"fc_sizes", c.fc_sizes},
                {"lstm_tanh", c.lstm_tanh},
                {"history", c.history},
                {"feature_dim", c.feature_dim}};
}

DrcpConfig drcp_config_from_json(const json& j) {
    DrcpConfig c;
    c.tile_size = j.at("tile_size").get<int>();
    c.conv_block_channels = j.at("conv_block_channels").get<std::vector<int>>();
    c.batchnorm_in_conv_blocks = j.at("batchnorm_in_conv_blocks").get<std::vector<bool>>();
    c.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
    c.post_flatten_dense = j.at("post_flatten_dense").get<int>();
    c.lstm_units = j.at("lstm_units").get<std::vector<int>>();
    c.rnn_dense = j.at("rnn_dense").get<int>();
    c.fc_sizes = j.at("fc_sizes").get<std::vector<int>>();
    c.lstm_tanh = j.at("lstm_tanh").get<bool>();
    c.history = j.at("history").get<int>();
    c.feature_dim = j.at("feature_dim").get<int>();
    return c;
}

}  // namespace

void save_checkpoint(Model& model, const std::string& path) {
    auto state = model.graph.state();
    json manifest;
    manifest["format"] = "roadcast-ckpt-1";
    manifest["model_kind"] = to_string(model.kind);
    manifest["seed"] = model.seed;
    if (model.kind == ModelKind::Drcp) manifest["config"] = drcp_config_json(model.drcp);
    json tensors = json::array();
    for (auto& [name, tensor] : state)
        tensors.push_back({{"name", name}, {"shape", tensor->shape()}});
    manifest["tensors"] = tensors;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const std::string header = manifest.dump();
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.put('\0');
    for (auto& [name, tensor] : state)
        out.write(reinterpret_cast<const char*>(tensor->data()),
                  static_cast<std::streamsize>(tensor->size() * sizeof(float)));
}

std::unique_ptr<Model> load_checkpoint(const std::string& path, const TrainConfig& tc,
                                       std::optional<ModelKind> expect) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::string header;
    std::getline(in, header, '\0');
    if (!in) throw std::runtime_error(path + ": missing manifest terminator");
    json manifest = json::parse(header, nullptr, false);
    if (manifest.is_discarded() || manifest.value("format", "") != "roadcast-ckpt-1")
        throw std::runtime_error(path + ": not a roadcast checkpoint");

    const auto kind = model_kind_from_string(manifest.at("model_kind").get<std::string>());
    if (!kind) throw std::runtime_error(path + ": unknown model kind");
    if (expect && *expect != *kind)
        throw std::runtime_error(path + ": checkpoint holds a '" +
                                 manifest.at("model_kind").get<std::string>() +
                                 "' model, expected '" + to_string(*expect) + "'");

    const std::uint64_t seed = manifest.at("seed").get<std::uint64_t>();
    std::unique_ptr<Model> model;
    if (*kind == ModelKind::Drcp)
        model = build_drcp(drcp_config_from_json(manifest.at("config")), tc, seed);
    else
        model = build_baseline(*kind, tc, seed);

    // Force state allocation for batchnorm running stats before restoring:
    // they materialize on first forward, so shape them from the manifest.
    auto state = model->graph.state();
    const auto& tensors = manifest.at("tensors");
    if (tensors.size() != state.size())
        throw std::runtime_error(path + ": manifest lists " + std::to_string(tensors.size()) +
                                 " tensors, model has " + std::to_string(state.size()));
    for (std::size_t i = 0; i < state.size(); ++i) {
        const auto& entry = tensors.at(i);
        if (entry.at("name").get<std::string>() != state[i].first)
            throw std::runtime_error(path + ": tensor order mismatch at '" + state[i].first + "'");
        state[i].second->ensure_shape(entry.at("shape").get<std::vector<int>>());
        in.read(reinterpret_cast<char*>(state[i].second->data()),
                static_cast<std::streamsize>(state[i].second->size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(state[i].second->size() * sizeof(float)))
            throw std::runtime_error(path + ": truncated parameter blob");
    }
    in.peek();
    if (!in.eof()) throw std::runtime_error(path + ": trailing bytes after parameter blob");
    return model;
}

}  // namespace roadcast::models
