#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "advi/data.hpp"
#include "advi/network.hpp"

namespace advi {

enum class AttackKind { fgsm, pgd_linf, l2_penalty, decision_boundary };

std::string attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

struct AttackConfig {
    AttackKind kind = AttackKind::pgd_linf;

    // l-inf budget attacks (fgsm, pgd_linf)
    float epsilon = 8.0f / 255.0f;
    int steps = 40;
    float step_size = 0.0f;  // <= 0 picks epsilon/4
    int restarts = 1;
    bool random_start = true;

    // l2 penalty attack: gradient descent on c*margin + ||eta||_2^2
    float penalty_c = 1.0f;
    float kappa = 0.0f;
    int iterations = 200;
    float penalty_lr = 0.05f;

    // decision boundary attack (predict-only)
    int query_budget = 5000;
    float boundary_tol = 1e-3f;
    int direction_samples = 16;

    uint64_t seed = 0;

    void validate() const;
    float effective_step_size() const { return step_size > 0.0f ? step_size : epsilon / 4.0f; }
};

nlohmann::json attack_config_to_json(const AttackConfig& cfg);
AttackConfig attack_config_from_json(const nlohmann::json& j);

struct AttackResult {
    Tensor x_adv;
    Tensor eta;            // x_adv - x
    bool success = false;  // predict(x_adv) != y
    int queries = 0;       // decision attack: predict calls; gradient attacks: forward passes
    int iterations = 0;
};

AttackResult fgsm(const SplitModel& model, const Tensor& x, int y, float epsilon);

// Multi-restart projected sign ascent on the cross-entropy loss with
// step-size halving after 5 non-improving steps. The best post-step iterate
// by loss across all restarts is returned (this is not Auto-PGD).
AttackResult pgd_linf(const SplitModel& model, const Tensor& x, int y, const AttackConfig& cfg,
                      uint64_t sample_index = 0);

AttackResult l2_penalty_attack(const SplitModel& model, const Tensor& x, int y,
                               const AttackConfig& cfg);

using PredictFn = std::function<int(const Tensor&)>;

// Decision-based variant: anchor, bisect to the boundary, Monte-Carlo sign
// queries for a direction, step, re-bisect. Only predict() calls.
AttackResult decision_boundary_attack_fn(const PredictFn& predict_fn, const Tensor& x, int y,
                                         const AttackConfig& cfg,
                                         const std::vector<Tensor>& anchor_pool,
                                         uint64_t sample_index = 0);

AttackResult decision_boundary_attack(const SplitModel& model, const Tensor& x, int y,
                                      const AttackConfig& cfg,
                                      const std::vector<Tensor>& anchor_pool = {},
                                      uint64_t sample_index = 0);

// Batched drivers (same numbers as the per-sample calls; rows are independent).
std::vector<AttackResult> pgd_linf_batch(const SplitModel& model, const Tensor& X,
                                         const std::vector<int>& y, const AttackConfig& cfg,
                                         const std::vector<uint64_t>& sample_indices);
std::vector<AttackResult> l2_penalty_batch(const SplitModel& model, const Tensor& X,
                                           const std::vector<int>& y, const AttackConfig& cfg);

struct CacheSample {
    Tensor x, x_adv;            // [1,C,H,W]
    Tensor h, h_adv;            // [1,Ch,Hh,Wh]
    std::vector<float> z, z_adv;
    bool success = false;       // argmax z != argmax z_adv
};

// Paired clean/adversarial tensors for every admitted sample. Labels are not
// stored: the cache is built from a correctly-classified set, so y is always
// argmax z.
struct AttackCache {
    std::string model_hash;
    AttackConfig config;
    Shape x_shape;  // per-sample {C,H,W}
    Shape h_shape;  // per-sample {C,H,W} at the split
    int num_classes = 0;
    std::vector<CacheSample> samples;

    int label_of(size_t i) const;
    int64_t size() const { return static_cast<int64_t>(samples.size()); }
};

struct CacheBuildStats {
    int attempted = 0;
    int succeeded = 0;
    std::vector<std::pair<int, std::string>> sample_errors;  // (index, message)
};

// Requires a dataset that already passed filter_correct (verified).
// Per-sample randomness derives from (cfg.seed, sample index); results do not
// depend on the worker count.
AttackCache build_attack_cache(const SplitModel& model, const Dataset& correct_ds,
                               const AttackConfig& cfg, int workers = 0,
                               CacheBuildStats* stats = nullptr);

// AICH1 cache file: "AICH1" magic, LE u32 manifest length, JSON manifest,
// payload of LE f32 tensors (x, x', h, h', z, z') plus one success byte per
// sample.
void save_cache(const AttackCache& cache, const std::string& path);
AttackCache load_cache(const std::string& path);

}  // namespace advi
