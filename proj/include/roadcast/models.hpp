#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "roadcast/features.hpp"
#include "roadcast/graph.hpp"
#include "roadcast/optim.hpp"
#include "roadcast/tiles.hpp"

namespace roadcast::models {

struct DrcpConfig {
    int tile_size = 256;
    std::vector<int> conv_block_channels = {4, 32, 8};
    std::vector<bool> batchnorm_in_conv_blocks = {true, true, false};
    std::vector<int> decoder_channels = {8, 8, 8, 16, 16, 16};
    int post_flatten_dense = 128;  // sigmoid
    std::vector<int> lstm_units = {59, 45};
    int rnn_dense = 40;  // sigmoid
    std::vector<int> fc_sizes = {64, 16, 1};
    bool lstm_tanh = false;  // candidate/cell activations; sigmoid by default
    int history = features::kHistory;
    int feature_dim = features::kDim;
};

struct TrainConfig {
    int max_epochs = 1000;
    int early_stop_patience = 30;
    int batch_size = 32;
    double class_weight_negative = 1.01;
    double class_weight_positive = 16.01;
    double lr_initial = 1e-4;
    double lr_factor = 0.9;
    int lr_patience = 5;
    double lr_floor = 1e-6;
    double l2_lambda = 1e-4;  // logistic baseline only
    std::uint64_t seed = 0;
};

enum class ModelKind { Drcp, LogisticRegression, Mlp };

const char* to_string(ModelKind k);
std::optional<ModelKind> model_kind_from_string(const std::string& s);

/// Flattened baseline input: 10x59 window row-major (590) followed by a
/// 16x16 mean-pooled grayscale tile (256).
inline constexpr int kBaselinePooled = 16;
inline constexpr int kBaselineInputDim =
    features::kHistory * features::kDim + kBaselinePooled * kBaselinePooled;

void vectorize_baseline_input(const features::FeatureVector* history, const tiles::Tile& tile,
                              float* out846);

/// A built model: the graph plus its input/output bindings.
class Model {
public:
    ModelKind kind = ModelKind::Drcp;
    DrcpConfig drcp;
    te::Graph<float> graph;
    te::NodeId in_tile = -1;    // [B,S,S,3], DRCP only
    te::NodeId in_window = -1;  // [B,10,59], DRCP only
    te::NodeId in_vec = -1;     // [B,846], baselines only
    te::NodeId in_label = -1;   // [B]
    te::NodeId out_prob = -1;   // [B,1]
    te::NodeId per_sample_loss = -1;  // [B]
    te::NodeId loss = -1;       // scalar
    std::uint64_t seed = 0;

    std::int64_t parameter_count();
};

/// Assembles the DRCP graph per config and initializes parameters from seed.
std::unique_ptr<Model> build_drcp(const DrcpConfig& cfg, const TrainConfig& tc,
                                  std::uint64_t seed);

/// LR: dense 846->1 + sigmoid with L2 on the weights. MLP: 846->100 ReLU ->
/// 1 sigmoid.
std::unique_ptr<Model> build_baseline(ModelKind kind, const TrainConfig& tc, std::uint64_t seed);

// --------------------------------------------------------------- datasets --

/// Materialized training view: windows normalized, tiles scaled to [0,1] at
/// batch-assembly time.
struct Dataset {
    const features::SplitWindows* splits = nullptr;
    const std::map<grid::HexCell, tiles::Tile>* tiles = nullptr;
    features::NormStats norm;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;  // 1-based
    double best_val_loss = 0.0;
};

/// Seeded mini-batch training with plateau schedule and early stopping;
/// restores the parameters of the best validation epoch. Throws on empty
/// splits or non-finite loss.
TrainResult train(Model& model, const Dataset& data, const TrainConfig& cfg);

/// Inference-mode probabilities for a list of windows.
std::vector<float> predict(Model& model, const Dataset& data,
                           const std::vector<features::SampleWindow>& windows,
                           int batch_size = 32);

inline int predict_label(float p, float threshold = 0.5f) { return p >= threshold ? 1 : 0; }

// ------------------------------------------------------------ checkpoints --

/// File layout: ordered-JSON manifest, one 0x00 byte, then the concatenated
/// little-endian float32 tensors in manifest order. Passing `expect` turns a
/// model-kind mismatch into an error.
void save_checkpoint(Model& model, const std::string& path);
std::unique_ptr<Model> load_checkpoint(const std::string& path, const TrainConfig& tc,
                                       std::optional<ModelKind> expect = std::nullopt);

}  // namespace roadcast::models
