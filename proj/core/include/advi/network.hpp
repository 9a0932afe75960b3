#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "advi/dataset.hpp"
#include "advi/ops.hpp"
#include "advi/tensor.hpp"

namespace advi {

enum class LayerKind { conv2d, relu, maxpool2d, flatten, dense };

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    // conv2d
    int in_channels = 0, out_channels = 0, kernel = 0, stride = 1, pad = 0;
    // maxpool2d
    int window = 0, pool_stride = 0;
    // dense
    int in_features = 0, out_features = 0;

    static LayerSpec conv(int cin, int cout, int k, int stride = 1, int pad = 0);
    static LayerSpec relu();
    static LayerSpec maxpool(int window, int stride);
    static LayerSpec flatten();
    static LayerSpec dense(int fin, int fout);

    bool has_params() const { return kind == LayerKind::conv2d || kind == LayerKind::dense; }
    bool operator==(const LayerSpec&) const = default;
};

// Sequential model description plus the g_A/g_B split point. The layer at
// split_index must be a conv2d; by default the split representation h is that
// layer's raw output, before any following activation. split_after_activation
// extends g_A through an immediately following relu instead.
struct NetworkSpec {
    Shape input_shape;  // per-sample {C, H, W}
    std::vector<LayerSpec> layers;
    int split_index = 0;
    bool split_after_activation = false;
    int num_classes = 0;

    void validate() const;
    // per-sample output shape of every layer (flatten/dense shapes are {F})
    std::vector<Shape> layer_output_shapes() const;
    // index of the last layer included in g_A
    int split_end() const;
    // channel count of the split representation h
    int target_channels() const;

    bool operator==(const NetworkSpec&) const = default;
};

nlohmann::json spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const nlohmann::json& j);

struct LayerWeights {
    Tensor weight;
    Tensor bias;
    bool empty() const { return weight.data.empty() && bias.data.empty(); }
};

// Immutable once loaded/trained; shareable across threads for inference.
struct SplitModel {
    NetworkSpec spec;
    std::vector<LayerWeights> weights;  // one entry per layer (empty where no params)
};

Tensor forward_full(const SplitModel& model, const Tensor& x);
Tensor forward_to_split(const SplitModel& model, const Tensor& x);
Tensor forward_from_split(const SplitModel& model, const Tensor& h);

// argmax per sample, ties broken by the lowest index
std::vector<int> predict(const SplitModel& model, const Tensor& x);
int predict_one(const SplitModel& model, const Tensor& x);
int argmax_row(const float* z, int64_t n);

struct ForwardTrace {
    std::vector<Tensor> acts;  // acts[0] = x, acts[i+1] = output of layer i
};
ForwardTrace forward_trace(const SplitModel& model, const Tensor& x);

// Backprop an arbitrary dL/dz through the whole network to the input.
Tensor backward_input(const SplitModel& model, const ForwardTrace& trace,
                      const Tensor& grad_logits);

struct ParamGrads {
    std::vector<LayerWeights> layers;
    Tensor input;
};
ParamGrads backward_full(const SplitModel& model, const ForwardTrace& trace,
                         const Tensor& grad_logits);

// Gradient of the mean cross-entropy loss w.r.t. the input batch.
struct InputGradient {
    double loss = 0.0;
    Tensor grad;
};
InputGradient input_gradient(const SplitModel& model, const Tensor& x,
                             const std::vector<int>& labels);

struct TrainConfig {
    int epochs = 5;
    int batch_size = 64;
    float lr = 0.05f;
    float momentum = 0.9f;
    uint64_t seed = 0;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;      // mean batch loss
    double accuracy = 0.0;  // running accuracy against pre-update predictions
};

// Deterministic given the seed: weight init and shuffling draw from one
// seeded stream. Throws TrainingDivergedError when the loss goes non-finite.
SplitModel train_sgd(const NetworkSpec& spec, const Dataset& dataset, const TrainConfig& cfg,
                     std::vector<EpochStats>* epoch_log = nullptr);

// Freshly initialized (untrained) weights for a spec, seeded.
SplitModel init_model(const NetworkSpec& spec, uint64_t seed);

// NETW1 weight file: "NETW1" magic, LE u32 manifest length, JSON manifest
// {spec, tensor table}, payload of LE f32 in table order.
void save_weights(const SplitModel& model, const std::string& path);
SplitModel load_weights(const std::string& path);

// FNV-1a of the serialized weight file body; used for cache staleness checks.
std::string model_weights_hash(const SplitModel& model);

}  // namespace advi
