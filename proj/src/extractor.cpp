#include "cvdcm/extractor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>
#include <zlib.h>

#include "cvdcm/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "weight file I/O assumes a little-endian host");

namespace cvdcm::vision {

namespace {
constexpr double kLnEps = 1e-5;
constexpr char kMagic[8] = {'C', 'V', 'D', 'C', 'M', 'W', 'T', 'S'};
}  // namespace

std::string variant_name(Variant v) {
    return v == Variant::LinearPool ? "linear-pool" : "tiny-attn";
}

Variant variant_from_name(const std::string& name) {
    if (name == "linear-pool") return Variant::LinearPool;
    if (name == "tiny-attn") return Variant::TinyAttn;
    throw std::invalid_argument("unknown extractor variant: " + name);
}

void ExtractorConfig::validate() const {
    if (input_resolution <= 0 || patch_size <= 0)
        throw std::invalid_argument("extractor: resolution and patch size must be positive");
    if (input_resolution % patch_size != 0)
        throw std::invalid_argument("extractor: input resolution " +
                                    std::to_string(input_resolution) +
                                    " must be divisible by patch size " +
                                    std::to_string(patch_size));
    if (embed_dim <= 0 || feature_dim < 1)
        throw std::invalid_argument("extractor: embed_dim must be positive and feature_dim >= 1");
    if (variant == Variant::TinyAttn) {
        if (num_heads <= 0 || embed_dim % num_heads != 0)
            throw std::invalid_argument("extractor: embed_dim must be divisible by num_heads");
        if (num_blocks < 1) throw std::invalid_argument("extractor: num_blocks must be >= 1");
    }
}

Eigen::MatrixXd patchify(const Image& img, int patch_size) {
    if (patch_size <= 0) throw std::invalid_argument("patchify: patch size must be positive");
    if (img.height % patch_size != 0 || img.width % patch_size != 0)
        throw std::invalid_argument("patchify: image " + std::to_string(img.height) + "x" +
                                    std::to_string(img.width) +
                                    " is not divisible by patch size " +
                                    std::to_string(patch_size));
    const int gy = img.height / patch_size;
    const int gx = img.width / patch_size;
    Eigen::MatrixXd patches(gy * gx, patch_size * patch_size * 3);
    for (int py = 0; py < gy; ++py)
        for (int px = 0; px < gx; ++px) {
            const int row = py * gx + px;
            int col = 0;
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    for (int c = 0; c < 3; ++c)
                        patches(row, col++) =
                            img.at(py * patch_size + y, px * patch_size + x, c);
        }
    return patches;
}

namespace {

double fan_limit(Eigen::Index fan_in, Eigen::Index fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-limit, limit);
}

ExtractorWeights shaped_weights(const ExtractorConfig& cfg) {
    cfg.validate();
    const int d = cfg.embed_dim;
    ExtractorWeights w;
    w.embed_w.setZero(cfg.patch_dim(), d);
    w.embed_b.setZero(d);
    if (cfg.positional_embeddings)
        w.pos.setZero(cfg.n_patches(), d);
    else
        w.pos.resize(0, 0);
    if (cfg.variant == Variant::TinyAttn) {
        w.blocks.resize(cfg.num_blocks);
        for (auto& b : w.blocks) {
            b.ln1_gain.setZero(d);
            b.ln1_offset.setZero(d);
            b.wq.setZero(d, d);
            b.wk.setZero(d, d);
            b.wv.setZero(d, d);
            b.wo.setZero(d, d);
            b.bq.setZero(d);
            b.bk.setZero(d);
            b.bv.setZero(d);
            b.bo.setZero(d);
            b.ln2_gain.setZero(d);
            b.ln2_offset.setZero(d);
            b.w1.setZero(d, 4 * d);
            b.b1.setZero(4 * d);
            b.w2.setZero(4 * d, d);
            b.b2.setZero(d);
        }
    }
    w.pool_w.setZero(d, cfg.feature_dim);
    w.pool_b.setZero(cfg.feature_dim);
    return w;
}

void check_finite(const Eigen::MatrixXd& m, const char* layer) {
    if (!m.allFinite())
        throw std::runtime_error(std::string("extractor: non-finite values after layer '") +
                                 layer + "'");
}

// y = gain .* (x - mean)/std + offset, per row
void layer_norm_forward(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain,
                        const Eigen::VectorXd& offset, Eigen::MatrixXd& xhat,
                        Eigen::VectorXd& invstd, Eigen::MatrixXd& out) {
    const Eigen::Index n = x.rows(), d = x.cols();
    xhat.resize(n, d);
    invstd.resize(n);
    out.resize(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().mean();
        invstd(i) = 1.0 / std::sqrt(var + kLnEps);
        xhat.row(i) = (x.row(i).array() - mu) * invstd(i);
        out.row(i) = xhat.row(i).cwiseProduct(gain.transpose()) + offset.transpose();
    }
}

// returns dx; accumulates dgain / doffset
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dout, const Eigen::MatrixXd& xhat,
                                    const Eigen::VectorXd& invstd, const Eigen::VectorXd& gain,
                                    Eigen::VectorXd& dgain, Eigen::VectorXd& doffset) {
    const Eigen::Index n = dout.rows(), d = dout.cols();
    Eigen::MatrixXd dx(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        dgain += dout.row(i).cwiseProduct(xhat.row(i)).transpose();
        doffset += dout.row(i).transpose();
        const Eigen::RowVectorXd dxhat = dout.row(i).cwiseProduct(gain.transpose());
        const double m1 = dxhat.mean();
        const double m2 = dxhat.cwiseProduct(xhat.row(i)).mean();
        dx.row(i) = (invstd(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2)).matrix();
    }
    return dx;
}

}  // namespace

ExtractorWeights init_weights(const ExtractorConfig& cfg, std::uint64_t seed) {
    ExtractorWeights w = shaped_weights(cfg);
    Rng rng(derive_seed(seed, /*stream=*/0x657874u));
    fill_uniform(w.embed_w, fan_limit(w.embed_w.rows(), w.embed_w.cols()), rng);
    if (w.pos.size() > 0) fill_uniform(w.pos, 0.02, rng);
    for (auto& b : w.blocks) {
        b.ln1_gain.setOnes();
        b.ln2_gain.setOnes();
        const double attn_limit = fan_limit(b.wq.rows(), b.wq.cols());
        fill_uniform(b.wq, attn_limit, rng);
        fill_uniform(b.wk, attn_limit, rng);
        fill_uniform(b.wv, attn_limit, rng);
        fill_uniform(b.wo, attn_limit, rng);
        fill_uniform(b.w1, fan_limit(b.w1.rows(), b.w1.cols()), rng);
        fill_uniform(b.w2, fan_limit(b.w2.rows(), b.w2.cols()), rng);
    }
    fill_uniform(w.pool_w, fan_limit(w.pool_w.rows(), w.pool_w.cols()), rng);
    quantize_to_float32(w);
    return w;
}

ExtractorWeights zeros_like(const ExtractorConfig& cfg) { return shaped_weights(cfg); }

std::size_t parameter_count(const ExtractorConfig& cfg) {
    ExtractorWeights w = shaped_weights(cfg);
    std::size_t count = 0;
    for_each_tensor(w, [&](const std::string&, const auto& t) {
        count += static_cast<std::size_t>(t.size());
    });
    return count;
}

Eigen::VectorXd forward(const ExtractorConfig& cfg, const ExtractorWeights& w,
                        const Image& img, ForwardCache* cache) {
    cfg.validate();
    ForwardCache local;
    ForwardCache& fc = cache ? *cache : local;

    const Image* input = &img;
    Image resized;
    if (img.height != cfg.input_resolution || img.width != cfg.input_resolution) {
        resized = resize(img, cfg.input_resolution, cfg.input_resolution);
        input = &resized;
    }
    fc.patches = patchify(*input, cfg.patch_size);
    check_finite(fc.patches, "patchify");

    const int n = cfg.n_patches();
    fc.embedded = fc.patches * w.embed_w;
    fc.embedded.rowwise() += w.embed_b.transpose();
    if (w.pos.size() > 0) fc.embedded += w.pos;
    check_finite(fc.embedded, "patch_embedding");

    const Eigen::MatrixXd* h = &fc.embedded;
    fc.blocks.clear();
    if (cfg.variant == Variant::TinyAttn) {
        fc.blocks.resize(w.blocks.size());
        const int nh = cfg.num_heads;
        const int dh = cfg.embed_dim / nh;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        for (std::size_t bi = 0; bi < w.blocks.size(); ++bi) {
            const BlockWeights& bw = w.blocks[bi];
            BlockCache& bc = fc.blocks[bi];
            bc.input = *h;

            layer_norm_forward(bc.input, bw.ln1_gain, bw.ln1_offset, bc.ln1_xhat,
                               bc.ln1_invstd, bc.ln1_out);
            bc.q = bc.ln1_out * bw.wq;
            bc.q.rowwise() += bw.bq.transpose();
            bc.k = bc.ln1_out * bw.wk;
            bc.k.rowwise() += bw.bk.transpose();
            bc.v = bc.ln1_out * bw.wv;
            bc.v.rowwise() += bw.bv.transpose();

            bc.attn.resize(nh);
            bc.heads_out.resize(n, cfg.embed_dim);
            for (int hd = 0; hd < nh; ++hd) {
                const auto qh = bc.q.middleCols(hd * dh, dh);
                const auto kh = bc.k.middleCols(hd * dh, dh);
                const auto vh = bc.v.middleCols(hd * dh, dh);
                Eigen::MatrixXd scores = scale * (qh * kh.transpose());
                // row-wise softmax with max subtraction
                Eigen::MatrixXd& a = bc.attn[hd];
                a.resize(n, n);
                for (int i = 0; i < n; ++i) {
                    const double m = scores.row(i).maxCoeff();
                    a.row(i) = (scores.row(i).array() - m).exp();
                    a.row(i) /= a.row(i).sum();
                }
                bc.heads_out.middleCols(hd * dh, dh) = a * vh;
            }
            check_finite(bc.heads_out, "attention");

            bc.after_attn = bc.input + bc.heads_out * bw.wo;
            bc.after_attn.rowwise() += bw.bo.transpose();

            layer_norm_forward(bc.after_attn, bw.ln2_gain, bw.ln2_offset, bc.ln2_xhat,
                               bc.ln2_invstd, bc.ln2_out);
            bc.ff_pre = bc.ln2_out * bw.w1;
            bc.ff_pre.rowwise() += bw.b1.transpose();
            bc.ff_hidden = bc.ff_pre.cwiseMax(0.0);
            bc.output = bc.after_attn + bc.ff_hidden * bw.w2;
            bc.output.rowwise() += bw.b2.transpose();
            check_finite(bc.output, "feed_forward");
            h = &bc.output;
        }
    }

    fc.pooled = h->colwise().mean().transpose();
    fc.feature = w.pool_w.transpose() * fc.pooled + w.pool_b;
    check_finite(fc.feature, "pool_projection");
    return fc.feature;
}

ExtractorWeights backward(const ExtractorConfig& cfg, const ExtractorWeights& w,
                          const ForwardCache& cache, const Eigen::VectorXd& upstream) {
    cfg.validate();
    if (upstream.size() != cfg.feature_dim)
        throw std::invalid_argument("backward: upstream gradient has wrong length");
    ExtractorWeights g = shaped_weights(cfg);

    g.pool_w = cache.pooled * upstream.transpose();
    g.pool_b = upstream;
    const Eigen::VectorXd dpooled = w.pool_w * upstream;

    const int n = cfg.n_patches();
    Eigen::MatrixXd dh =
        Eigen::MatrixXd::Ones(n, 1) * (dpooled.transpose() / static_cast<double>(n));

    if (cfg.variant == Variant::TinyAttn) {
        const int nh = cfg.num_heads;
        const int dh_dim = cfg.embed_dim / nh;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh_dim));
        for (std::size_t i = w.blocks.size(); i-- > 0;) {
            const BlockWeights& bw = w.blocks[i];
            const BlockCache& bc = cache.blocks[i];
            BlockWeights& bg = g.blocks[i];

            // feed-forward sub-block
            Eigen::MatrixXd d_after_attn = dh;  // residual path
            bg.w2 = bc.ff_hidden.transpose() * dh;
            bg.b2 = dh.colwise().sum().transpose();
            Eigen::MatrixXd d_hidden = dh * bw.w2.transpose();
            Eigen::MatrixXd d_pre =
                d_hidden.cwiseProduct((bc.ff_pre.array() > 0.0).cast<double>().matrix());
            bg.w1 = bc.ln2_out.transpose() * d_pre;
            bg.b1 = d_pre.colwise().sum().transpose();
            const Eigen::MatrixXd d_ln2_out = d_pre * bw.w1.transpose();
            d_after_attn += layer_norm_backward(d_ln2_out, bc.ln2_xhat, bc.ln2_invstd,
                                                bw.ln2_gain, bg.ln2_gain, bg.ln2_offset);

            // attention sub-block
            Eigen::MatrixXd d_input = d_after_attn;  // residual path
            bg.wo = bc.heads_out.transpose() * d_after_attn;
            bg.bo = d_after_attn.colwise().sum().transpose();
            const Eigen::MatrixXd d_heads = d_after_attn * bw.wo.transpose();

            Eigen::MatrixXd dq(n, cfg.embed_dim), dk(n, cfg.embed_dim), dv(n, cfg.embed_dim);
            for (int hd = 0; hd < nh; ++hd) {
                const auto qh = bc.q.middleCols(hd * dh_dim, dh_dim);
                const auto kh = bc.k.middleCols(hd * dh_dim, dh_dim);
                const auto vh = bc.v.middleCols(hd * dh_dim, dh_dim);
                const auto d_oh = d_heads.middleCols(hd * dh_dim, dh_dim);
                const Eigen::MatrixXd& a = bc.attn[hd];

                const Eigen::MatrixXd da = d_oh * vh.transpose();
                dv.middleCols(hd * dh_dim, dh_dim) = a.transpose() * d_oh;
                // softmax backward per row: ds = a .* (da - rowdot(da, a))
                Eigen::MatrixXd ds(n, n);
                for (int r = 0; r < n; ++r) {
                    const double dot = da.row(r).cwiseProduct(a.row(r)).sum();
                    ds.row(r) = (a.row(r).array() * (da.row(r).array() - dot)).matrix();
                }
                dq.middleCols(hd * dh_dim, dh_dim) = scale * (ds * kh);
                dk.middleCols(hd * dh_dim, dh_dim) = scale * (ds.transpose() * qh);
            }
            bg.wq = bc.ln1_out.transpose() * dq;
            bg.bq = dq.colwise().sum().transpose();
            bg.wk = bc.ln1_out.transpose() * dk;
            bg.bk = dk.colwise().sum().transpose();
            bg.wv = bc.ln1_out.transpose() * dv;
            bg.bv = dv.colwise().sum().transpose();
            const Eigen::MatrixXd d_ln1_out =
                dq * bw.wq.transpose() + dk * bw.wk.transpose() + dv * bw.wv.transpose();
            d_input += layer_norm_backward(d_ln1_out, bc.ln1_xhat, bc.ln1_invstd, bw.ln1_gain,
                                           bg.ln1_gain, bg.ln1_offset);
            dh = d_input;
        }
    }

    if (w.pos.size() > 0) g.pos = dh;
    g.embed_w = cache.patches.transpose() * dh;
    g.embed_b = dh.colwise().sum().transpose();
    return g;
}

namespace {

struct TensorPtr {
    double* data;
    Eigen::Index size;
};

std::vector<TensorPtr> tensor_ptrs(ExtractorWeights& w) {
    std::vector<TensorPtr> out;
    for_each_tensor(w, [&](const std::string&, auto& t) { out.push_back({t.data(), t.size()}); });
    return out;
}

}  // namespace

void add_scaled(ExtractorWeights& dst, const ExtractorWeights& src, double scale) {
    auto d = tensor_ptrs(dst);
    auto s = tensor_ptrs(const_cast<ExtractorWeights&>(src));
    if (d.size() != s.size()) throw std::logic_error("add_scaled: structure mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i].size != s[i].size) throw std::logic_error("add_scaled: shape mismatch");
        for (Eigen::Index j = 0; j < d[i].size; ++j) d[i].data[j] += scale * s[i].data[j];
    }
}

void scale_weights(ExtractorWeights& w, double factor) {
    for_each_tensor(w, [&](const std::string&, auto& t) { t *= factor; });
}

double squared_norm(const ExtractorWeights& w) {
    double s = 0.0;
    for_each_tensor(const_cast<ExtractorWeights&>(w),
                    [&](const std::string&, auto& t) { s += t.squaredNorm(); });
    return s;
}

void quantize_to_float32(ExtractorWeights& w) {
    for_each_tensor(w, [](const std::string&, auto& t) {
        double* p = t.data();
        for (Eigen::Index i = 0; i < t.size(); ++i)
            p[i] = static_cast<double>(static_cast<float>(p[i]));
    });
}

Eigen::VectorXd flatten(const ExtractorWeights& w) {
    std::size_t total = 0;
    auto& wm = const_cast<ExtractorWeights&>(w);
    for_each_tensor(wm, [&](const std::string&, auto& t) { total += t.size(); });
    Eigen::VectorXd v(total);
    std::size_t at = 0;
    for_each_tensor(wm, [&](const std::string&, auto& t) {
        std::memcpy(v.data() + at, t.data(), t.size() * sizeof(double));
        at += t.size();
    });
    return v;
}

void unflatten(const Eigen::VectorXd& v, ExtractorWeights& w) {
    std::size_t at = 0;
    for_each_tensor(w, [&](const std::string&, auto& t) {
        if (at + t.size() > static_cast<std::size_t>(v.size()))
            throw std::invalid_argument("unflatten: vector too short");
        std::memcpy(t.data(), v.data() + at, t.size() * sizeof(double));
        at += t.size();
    });
    if (at != static_cast<std::size_t>(v.size()))
        throw std::invalid_argument("unflatten: vector length mismatch");
}

std::string config_to_json(const ExtractorConfig& cfg) {
    nlohmann::json j{{"input_resolution", cfg.input_resolution},
                     {"patch_size", cfg.patch_size},
                     {"embed_dim", cfg.embed_dim},
                     {"num_heads", cfg.num_heads},
                     {"num_blocks", cfg.num_blocks},
                     {"feature_dim", cfg.feature_dim},
                     {"variant", variant_name(cfg.variant)},
                     {"positional_embeddings", cfg.positional_embeddings}};
    return j.dump();
}

ExtractorConfig config_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ExtractorConfig cfg;
    cfg.input_resolution = j.value("input_resolution", cfg.input_resolution);
    cfg.patch_size = j.value("patch_size", cfg.patch_size);
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.num_heads = j.value("num_heads", cfg.num_heads);
    cfg.num_blocks = j.value("num_blocks", cfg.num_blocks);
    cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
    if (j.contains("variant")) cfg.variant = variant_from_name(j.at("variant"));
    cfg.positional_embeddings = j.value("positional_embeddings", cfg.positional_embeddings);
    cfg.validate();
    return cfg;
}

namespace {

void append_u32(std::string& buf, std::uint32_t v) {
    buf.append(reinterpret_cast<const char*>(&v), 4);
}

}  // namespace

void save_weights(const ExtractorConfig& cfg, const ExtractorWeights& w,
                  const std::string& path) {
    auto& wm = const_cast<ExtractorWeights&>(w);
    nlohmann::json tensors = nlohmann::json::array();
    std::size_t offset = 0;
    std::string payload;
    for_each_tensor(wm, [&](const std::string& name, auto& t) {
        tensors.push_back({{"name", name},
                           {"rows", t.rows()},
                           {"cols", t.cols()},
                           {"offset", offset}});
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const float f = static_cast<float>(t.data()[i]);
            payload.append(reinterpret_cast<const char*>(&f), 4);
        }
        offset += static_cast<std::size_t>(t.size()) * 4;
    });
    nlohmann::json header{{"version", 1},
                          {"config", nlohmann::json::parse(config_to_json(cfg))},
                          {"tensors", tensors},
                          {"payload_bytes", payload.size()}};
    const std::string header_text = header.dump();

    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    append_u32(buf, static_cast<std::uint32_t>(header_text.size()));
    buf += header_text;
    buf += payload;
    const auto crc = static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size())));
    append_u32(buf, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write weight file: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::pair<ExtractorConfig, ExtractorWeights> load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weight file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < sizeof(kMagic) + 8)
        throw std::runtime_error("weight file truncated: " + path);
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a weight file (bad magic): " + path);

    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
    const auto crc = static_cast<std::uint32_t>(crc32(
        0L, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(buf.size() - 4)));
    if (crc != stored_crc)
        throw std::runtime_error("weight file checksum mismatch: " + path);

    std::uint32_t header_len;
    std::memcpy(&header_len, buf.data() + 8, 4);
    const std::size_t payload_start = 12 + header_len;
    if (payload_start + 4 > buf.size())
        throw std::runtime_error("weight file truncated: " + path);

    const auto header = nlohmann::json::parse(buf.substr(12, header_len));
    const ExtractorConfig cfg = config_from_json(header.at("config").dump());
    const std::size_t payload_bytes = header.at("payload_bytes").get<std::size_t>();
    if (payload_start + payload_bytes + 4 != buf.size())
        throw std::runtime_error("weight file truncated: " + path);

    ExtractorWeights w = shaped_weights(cfg);
    std::size_t tensor_idx = 0;
    const auto& tensors = header.at("tensors");
    for_each_tensor(w, [&](const std::string& name, auto& t) {
        if (tensor_idx >= tensors.size())
            throw std::runtime_error("weight file shape-header mismatch: missing tensor " + name);
        const auto& entry = tensors[tensor_idx++];
        if (entry.at("name") != name || entry.at("rows") != t.rows() ||
            entry.at("cols") != t.cols())
            throw std::runtime_error("weight file shape-header mismatch at tensor " + name);
        const std::size_t off = payload_start + entry.at("offset").get<std::size_t>();
        if (off + static_cast<std::size_t>(t.size()) * 4 > buf.size() - 4)
            throw std::runtime_error("weight file truncated in tensor " + name);
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            float f;
            std::memcpy(&f, buf.data() + off + static_cast<std::size_t>(i) * 4, 4);
            t.data()[i] = static_cast<double>(f);
        }
    });
    if (tensor_idx != tensors.size())
        throw std::runtime_error("weight file shape-header mismatch: extra tensors in header");
    return {cfg, std::move(w)};
}

ExtractorWeights load_weights(const std::string& path, const ExtractorConfig& expected) {
    auto [cfg, w] = load_weights(path);
    if (!(cfg == expected))
        throw std::runtime_error("weight file config does not match the requested config: " +
                                 path);
    return std::move(w);
}

}  // namespace cvdcm::vision
