#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cvdcm/image.hpp"

// Small differentiable image feature extractor: patch embedding, optional
// tiny pre-LN transformer blocks, mean pooling and a linear head to a
// K-dimensional feature map that enters utility linearly.
namespace cvdcm::vision {

enum class Variant { LinearPool, TinyAttn };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ExtractorConfig {
    int input_resolution = 32;  // square input, resized on mismatch
    int patch_size = 8;
    int embed_dim = 32;
    int num_heads = 2;
    int num_blocks = 1;
    int feature_dim = 16;
    Variant variant = Variant::TinyAttn;
    bool positional_embeddings = false;

    int n_patches() const {
        const int g = input_resolution / patch_size;
        return g * g;
    }
    int patch_dim() const { return patch_size * patch_size * 3; }
    void validate() const;
    bool operator==(const ExtractorConfig&) const = default;
};

struct BlockWeights {
    Eigen::VectorXd ln1_gain, ln1_offset;
    Eigen::MatrixXd wq, wk, wv, wo;  // d x d, applied as X*W
    Eigen::VectorXd bq, bk, bv, bo;
    Eigen::VectorXd ln2_gain, ln2_offset;
    Eigen::MatrixXd w1;  // d x 4d
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // 4d x d
    Eigen::VectorXd b2;
};

// Also the gradient container: backward() returns one of these with every
// tensor holding the corresponding derivative.
struct ExtractorWeights {
    Eigen::MatrixXd embed_w;  // patch_dim x d
    Eigen::VectorXd embed_b;
    Eigen::MatrixXd pos;  // n_patches x d; 0x0 when positional embeddings are off
    std::vector<BlockWeights> blocks;
    Eigen::MatrixXd pool_w;  // d x K
    Eigen::VectorXd pool_b;
};

// Visits every tensor in a fixed, named order (serialization order).
template <typename W, typename F>
void for_each_tensor(W& w, F&& f) {
    f("embed_w", w.embed_w);
    f("embed_b", w.embed_b);
    if (w.pos.size() > 0) f("pos", w.pos);
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        auto& b = w.blocks[i];
        const std::string p = "block" + std::to_string(i) + ".";
        f(p + "ln1_gain", b.ln1_gain);
        f(p + "ln1_offset", b.ln1_offset);
        f(p + "wq", b.wq);
        f(p + "bq", b.bq);
        f(p + "wk", b.wk);
        f(p + "bk", b.bk);
        f(p + "wv", b.wv);
        f(p + "bv", b.bv);
        f(p + "wo", b.wo);
        f(p + "bo", b.bo);
        f(p + "ln2_gain", b.ln2_gain);
        f(p + "ln2_offset", b.ln2_offset);
        f(p + "w1", b.w1);
        f(p + "b1", b.b1);
        f(p + "w2", b.w2);
        f(p + "b2", b.b2);
    }
    f("pool_w", w.pool_w);
    f("pool_b", w.pool_b);
}

struct BlockCache {
    Eigen::MatrixXd input;                // n x d
    Eigen::MatrixXd ln1_xhat;
    Eigen::VectorXd ln1_invstd;
    Eigen::MatrixXd ln1_out;
    Eigen::MatrixXd q, k, v;              // n x d
    std::vector<Eigen::MatrixXd> attn;    // per head, n x n row-stochastic
    Eigen::MatrixXd heads_out;            // n x d
    Eigen::MatrixXd after_attn;           // n x d (residual applied)
    Eigen::MatrixXd ln2_xhat;
    Eigen::VectorXd ln2_invstd;
    Eigen::MatrixXd ln2_out;
    Eigen::MatrixXd ff_pre;               // n x 4d, before ReLU
    Eigen::MatrixXd ff_hidden;            // n x 4d
    Eigen::MatrixXd output;               // n x d
};

struct ForwardCache {
    Eigen::MatrixXd patches;   // n x patch_dim
    Eigen::MatrixXd embedded;  // n x d
    std::vector<BlockCache> blocks;
    Eigen::VectorXd pooled;    // d
    Eigen::VectorXd feature;   // K
};

// Non-overlapping patches in row-major grid order; within a patch, pixel
// rows then columns then channel. Throws when H or W is not divisible by P.
Eigen::MatrixXd patchify(const Image& img, int patch_size);

// Seeded uniform fan-in/fan-out init; layer-norm gains 1, offsets 0. All
// values are float32-representable so weight files round-trip bit-exactly.
ExtractorWeights init_weights(const ExtractorConfig& cfg, std::uint64_t seed);
ExtractorWeights zeros_like(const ExtractorConfig& cfg);

std::size_t parameter_count(const ExtractorConfig& cfg);

// Deterministic feature map z = phi(image | w). Throws naming the layer if
// a non-finite value appears.
Eigen::VectorXd forward(const ExtractorConfig& cfg, const ExtractorWeights& w,
                        const Image& img, ForwardCache* cache = nullptr);

// Exact reverse-mode gradient of dot(upstream, z) with respect to every
// weight, using the cached forward pass.
ExtractorWeights backward(const ExtractorConfig& cfg, const ExtractorWeights& w,
                          const ForwardCache& cache, const Eigen::VectorXd& upstream);

// In-place tensor arithmetic over whole weight structs (SGD plumbing)
void add_scaled(ExtractorWeights& dst, const ExtractorWeights& src, double scale);
void scale_weights(ExtractorWeights& w, double factor);
double squared_norm(const ExtractorWeights& w);
// rounds every value to the nearest float32 (the on-disk precision)
void quantize_to_float32(ExtractorWeights& w);

Eigen::VectorXd flatten(const ExtractorWeights& w);
void unflatten(const Eigen::VectorXd& v, ExtractorWeights& w);

// Weight file: 8-byte magic, uint32 header length, JSON header (config,
// named tensor shapes, byte offsets), float32 little-endian payload,
// trailing CRC32 over everything before it.
void save_weights(const ExtractorConfig& cfg, const ExtractorWeights& w,
                  const std::string& path);
std::pair<ExtractorConfig, ExtractorWeights> load_weights(const std::string& path);
ExtractorWeights load_weights(const std::string& path, const ExtractorConfig& expected);

std::string config_to_json(const ExtractorConfig& cfg);
ExtractorConfig config_from_json(const std::string& text);

}  // namespace cvdcm::vision
