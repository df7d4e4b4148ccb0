/// @file vae.cpp

#include "mmc/vae.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmc/error.h"
#include "mmc/keyed_rng.h"
#include "mmc/record_io.h"

namespace mmc::vae {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

void VaeConfig::Validate() const {
    if (height < 1 || width < 1 || latent_dim < 1) {
        throw Error(ErrorCode::kInvalidConfig, "image and latent dimensions must be >= 1");
    }
    for (int h : hidden) {
        if (h < 1) throw Error(ErrorCode::kInvalidConfig, "hidden widths must be >= 1");
    }
    if (!(kl_coeff > 0.0)) throw Error(ErrorCode::kInvalidConfig, "kl_coeff must be positive");
    if (learning_rate < 0.0 || momentum < 0.0 || momentum >= 1.0) {
        throw Error(ErrorCode::kInvalidConfig, "need learning_rate >= 0 and momentum in [0, 1)");
    }
    if (batch_size < 1 || max_epochs < 0 || plateau_patience < 0) {
        throw Error(ErrorCode::kInvalidConfig, "bad batch size, epoch count or patience");
    }
    if (!(plateau_factor > 0.0 && plateau_factor <= 1.0)) {
        throw Error(ErrorCode::kInvalidConfig, "plateau_factor must lie in (0, 1]");
    }
}

namespace {

void AppendLayer(Layer& layer, std::vector<double*>& out) {
    // Column-major storage; the order only has to be stable.
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) out.push_back(layer.w.data() + i);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) out.push_back(layer.b.data() + i);
}

template <typename Params, typename Fn>
void ForEachLayer(Params& p, Fn fn) {
    for (auto& l : p.encoder) fn(l);
    fn(p.mu_head);
    fn(p.logvar_head);
    for (auto& l : p.decoder) fn(l);
}

Layer MakeLayer(int in, int out, KeyedStream& rng) {
    const double a = std::sqrt(6.0 / (in + out));
    Layer l{MatrixXd(out, in), VectorXd::Zero(out)};
    for (Eigen::Index j = 0; j < l.w.cols(); ++j) {
        for (Eigen::Index i = 0; i < l.w.rows(); ++i) l.w(i, j) = a * (2.0 * rng.Uniform() - 1.0);
    }
    return l;
}

VaeParams ZerosLike(const VaeParams& p) {
    VaeParams z = p;
    ForEachLayer(z, [](Layer& l) {
        l.w.setZero();
        l.b.setZero();
    });
    return z;
}

MatrixXd Sigmoid(const MatrixXd& a) {
    return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

struct Cache {
    std::vector<MatrixXd> enc;  // enc[0] = input, enc[k+1] = tanh output of layer k
    MatrixXd mu;
    MatrixXd logvar;
    MatrixXd z;
    std::vector<MatrixXd> dec;  // dec[0] = z, then layer outputs (last is the sigmoid output)
};

void Forward(const VaeParams& p, const MatrixXd& x, const MatrixXd& eps, Cache& c) {
    c.enc.assign(1, x);
    for (const auto& l : p.encoder) {
        c.enc.push_back(((l.w * c.enc.back()).colwise() + l.b).array().tanh().matrix());
    }
    c.mu = (p.mu_head.w * c.enc.back()).colwise() + p.mu_head.b;
    c.logvar = (p.logvar_head.w * c.enc.back()).colwise() + p.logvar_head.b;
    c.z = c.mu.array() + (0.5 * c.logvar.array()).exp() * eps.array();
    c.dec.assign(1, c.z);
    for (std::size_t k = 0; k < p.decoder.size(); ++k) {
        const auto& l = p.decoder[k];
        MatrixXd a = (l.w * c.dec.back()).colwise() + l.b;
        if (k + 1 < p.decoder.size()) {
            c.dec.push_back(a.array().tanh().matrix());
        } else {
            c.dec.push_back(Sigmoid(a));
        }
    }
}

// Mean loss over the batch columns; fills `g` with its gradient when non-null.
Loss BatchLoss(const VaeParams& p, const MatrixXd& x, const MatrixXd& eps, double beta,
               VaeParams* g) {
    Cache c;
    Forward(p, x, eps, c);
    const double batch = static_cast<double>(x.cols());
    const double dim = static_cast<double>(x.rows());
    const MatrixXd& out = c.dec.back();
    Loss loss;
    loss.reconstruction = (out - x).squaredNorm() / dim / batch;
    loss.kl = 0.5 *
              (c.mu.array().square() + c.logvar.array().exp() - 1.0 - c.logvar.array()).sum() /
              batch;
    loss.total = loss.reconstruction + beta * loss.kl;
    if (!std::isfinite(loss.total)) {
        throw Error(ErrorCode::kNonFinite, "VAE loss is not finite");
    }
    if (g == nullptr) return loss;

    MatrixXd d = (2.0 / (dim * batch)) * (out - x);
    for (std::size_t k = p.decoder.size(); k-- > 0;) {
        const MatrixXd& y = c.dec[k + 1];
        MatrixXd da = (k + 1 == p.decoder.size())
                          ? MatrixXd(d.array() * y.array() * (1.0 - y.array()))
                          : MatrixXd(d.array() * (1.0 - y.array().square()));
        g->decoder[k].w.noalias() += da * c.dec[k].transpose();
        g->decoder[k].b += da.rowwise().sum();
        d.noalias() = p.decoder[k].w.transpose() * da;
    }
    const MatrixXd sigma = (0.5 * c.logvar.array()).exp();
    const MatrixXd dmu = d + (beta / batch) * c.mu;
    const MatrixXd dlogvar =
        (d.array() * eps.array() * 0.5 * sigma.array()).matrix() +
        ((beta / batch) * 0.5 * (c.logvar.array().exp() - 1.0)).matrix();
    const MatrixXd& h = c.enc.back();
    g->mu_head.w.noalias() += dmu * h.transpose();
    g->mu_head.b += dmu.rowwise().sum();
    g->logvar_head.w.noalias() += dlogvar * h.transpose();
    g->logvar_head.b += dlogvar.rowwise().sum();
    d = p.mu_head.w.transpose() * dmu + p.logvar_head.w.transpose() * dlogvar;
    for (std::size_t k = p.encoder.size(); k-- > 0;) {
        const MatrixXd& y = c.enc[k + 1];
        MatrixXd da = d.array() * (1.0 - y.array().square());
        g->encoder[k].w.noalias() += da * c.enc[k].transpose();
        g->encoder[k].b += da.rowwise().sum();
        if (k > 0) d.noalias() = p.encoder[k].w.transpose() * da;
    }
    return loss;
}

void CheckImage(const VaeConfig& config, const Image& image) {
    if (image.height != config.height || image.width != config.width ||
        image.pixels.size() != static_cast<std::size_t>(config.InputDim())) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "image is " + std::to_string(image.height) + "x" +
                        std::to_string(image.width) + ", model expects " +
                        std::to_string(config.height) + "x" + std::to_string(config.width));
    }
}

VectorXd ImageVector(const Image& image) {
    return Eigen::Map<const VectorXd>(image.pixels.data(),
                                      static_cast<Eigen::Index>(image.pixels.size()));
}

VectorXd NormalVector(KeyedStream& rng, int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.Normal();
    return v;
}

VectorXd EvalNoise(const VaeConfig& config, std::size_t index) {
    KeyedStream rng(DeriveKey(config.seed, "vae-eval-noise", static_cast<std::int64_t>(index), 0));
    return NormalVector(rng, config.latent_dim);
}

std::vector<double> Flatten(VaeParams& g) {
    std::vector<double> out;
    out.reserve(g.ParameterCount());
    for (double* v : g.Parameters()) out.push_back(*v);
    return out;
}

}  // namespace

std::vector<double*> VaeParams::Parameters() {
    std::vector<double*> out;
    ForEachLayer(*this, [&](Layer& l) { AppendLayer(l, out); });
    return out;
}

std::size_t VaeParams::ParameterCount() const {
    std::size_t n = 0;
    ForEachLayer(*this, [&](const Layer& l) {
        n += static_cast<std::size_t>(l.w.size() + l.b.size());
    });
    return n;
}

VaeParams InitParams(const VaeConfig& config) {
    config.Validate();
    KeyedStream rng(DeriveKey(config.seed, "vae-init", 0, 0));
    VaeParams p;
    p.config = config;
    int in = config.InputDim();
    for (int h : config.hidden) {
        p.encoder.push_back(MakeLayer(in, h, rng));
        in = h;
    }
    p.mu_head = MakeLayer(in, config.latent_dim, rng);
    p.logvar_head = MakeLayer(in, config.latent_dim, rng);
    in = config.latent_dim;
    for (auto it = config.hidden.rbegin(); it != config.hidden.rend(); ++it) {
        p.decoder.push_back(MakeLayer(in, *it, rng));
        in = *it;
    }
    p.decoder.push_back(MakeLayer(in, config.InputDim(), rng));
    return p;
}

Encoding Encode(const VaeParams& params, const Image& image) {
    CheckImage(params.config, image);
    VectorXd h = ImageVector(image);
    for (const auto& l : params.encoder) h = (l.w * h + l.b).array().tanh().matrix();
    return {params.mu_head.w * h + params.mu_head.b,
            params.logvar_head.w * h + params.logvar_head.b};
}

VectorXd SampleLatent(const Encoding& encoding, std::uint64_t seed, std::int64_t draw) {
    KeyedStream rng(DeriveKey(seed, "vae-latent", draw, 0));
    const VectorXd eps = NormalVector(rng, static_cast<int>(encoding.mu.size()));
    return encoding.mu.array() + (0.5 * encoding.logvar.array()).exp() * eps.array();
}

VectorXd Decode(const VaeParams& params, const VectorXd& z) {
    if (z.size() != params.config.latent_dim) {
        throw Error(ErrorCode::kDimensionMismatch, "latent length does not match the model");
    }
    VectorXd d = z;
    for (std::size_t k = 0; k < params.decoder.size(); ++k) {
        const auto& l = params.decoder[k];
        VectorXd a = l.w * d + l.b;
        d = k + 1 < params.decoder.size() ? VectorXd(a.array().tanh()) : VectorXd(Sigmoid(a));
    }
    return d;
}

double KlDivergence(const VectorXd& mu, const VectorXd& logvar) {
    if (mu.size() != logvar.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "mu and logvar differ in length");
    }
    return 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();
}

Loss ElboLoss(const VaeParams& params, const Image& image, const VectorXd& eps, double beta) {
    CheckImage(params.config, image);
    if (eps.size() != params.config.latent_dim) {
        throw Error(ErrorCode::kDimensionMismatch, "noise length does not match the model");
    }
    return BatchLoss(params, ImageVector(image), eps, beta, nullptr);
}

Loss ElboLossAndGradient(const VaeParams& params, const Image& image, const VectorXd& eps,
                         double beta, std::vector<double>& gradient) {
    CheckImage(params.config, image);
    if (eps.size() != params.config.latent_dim) {
        throw Error(ErrorCode::kDimensionMismatch, "noise length does not match the model");
    }
    VaeParams g = ZerosLike(params);
    const Loss loss = BatchLoss(params, ImageVector(image), eps, beta, &g);
    gradient = Flatten(g);
    return loss;
}

double GradCheck(const VaeParams& params, const Image& image, double beta, int count,
                 std::uint64_t seed) {
    KeyedStream rng(DeriveKey(seed, "grad-check", 0, 0));
    const VectorXd eps = NormalVector(rng, params.config.latent_dim);
    std::vector<double> analytic;
    ElboLossAndGradient(params, image, eps, beta, analytic);

    VaeParams probe = params;
    auto ptrs = probe.Parameters();
    constexpr double kStep = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
        const std::size_t i = rng.Below(ptrs.size());
        const double saved = *ptrs[i];
        *ptrs[i] = saved + kStep;
        const double up = ElboLoss(probe, image, eps, beta).total;
        *ptrs[i] = saved - kStep;
        const double down = ElboLoss(probe, image, eps, beta).total;
        *ptrs[i] = saved;
        const double numeric = (up - down) / (2.0 * kStep);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

double DatasetLoss(const VaeParams& params, const std::vector<Image>& dataset) {
    if (dataset.empty()) throw Error(ErrorCode::kEmptyInput, "dataset is empty");
    const int dim = params.config.InputDim();
    MatrixXd x(dim, static_cast<Eigen::Index>(dataset.size()));
    MatrixXd eps(params.config.latent_dim, static_cast<Eigen::Index>(dataset.size()));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        CheckImage(params.config, dataset[i]);
        x.col(static_cast<Eigen::Index>(i)) = ImageVector(dataset[i]);
        eps.col(static_cast<Eigen::Index>(i)) = EvalNoise(params.config, i);
    }
    return BatchLoss(params, x, eps, params.config.kl_coeff, nullptr).total;
}

TrainResult Train(const std::vector<Image>& dataset, const VaeConfig& config) {
    config.Validate();
    if (dataset.empty()) throw Error(ErrorCode::kEmptyInput, "training set is empty");
    for (const auto& img : dataset) CheckImage(config, img);

    TrainResult result;
    result.params = InitParams(config);
    VaeParams& p = result.params;
    VaeParams first = ZerosLike(p);
    VaeParams second = ZerosLike(p);
    auto param_ptrs = p.Parameters();
    auto first_ptrs = first.Parameters();
    auto second_ptrs = second.Parameters();
    constexpr double kSecondDecay = 0.999;
    constexpr double kAdamEps = 1e-8;
    std::int64_t step = 0;

    result.initial_loss = DatasetLoss(p, dataset);
    double lr = config.learning_rate;
    double best = result.initial_loss;
    int bad_epochs = 0;
    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    const int dim = config.InputDim();

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        double train_sum = 0.0;
        std::iota(order.begin(), order.end(), std::size_t{0});
        KeyedStream shuffle(DeriveKey(config.seed, "vae-shuffle", epoch, 0));
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.Below(i)]);

        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(config.batch_size));
            const auto cols = static_cast<Eigen::Index>(end - start);
            MatrixXd x(dim, cols);
            MatrixXd eps(config.latent_dim, cols);
            for (std::size_t k = start; k < end; ++k) {
                const auto col = static_cast<Eigen::Index>(k - start);
                x.col(col) = ImageVector(dataset[order[k]]);
                KeyedStream noise(DeriveKey(config.seed, "vae-noise", epoch,
                                            static_cast<std::int64_t>(order[k])));
                eps.col(col) = NormalVector(noise, config.latent_dim);
            }
            VaeParams g = ZerosLike(p);
            train_sum += BatchLoss(p, x, eps, config.kl_coeff, &g).total * static_cast<double>(cols);
            auto grad_ptrs = g.Parameters();
            ++step;
            const double c1 = 1.0 - std::pow(config.momentum, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(kSecondDecay, static_cast<double>(step));
            for (std::size_t i = 0; i < param_ptrs.size(); ++i) {
                const double gi = *grad_ptrs[i];
                *first_ptrs[i] = config.momentum * *first_ptrs[i] + (1.0 - config.momentum) * gi;
                *second_ptrs[i] = kSecondDecay * *second_ptrs[i] + (1.0 - kSecondDecay) * gi * gi;
                *param_ptrs[i] -= lr * (*first_ptrs[i] / c1) / (std::sqrt(*second_ptrs[i] / c2) + kAdamEps);
            }
        }

        const double loss = DatasetLoss(p, dataset);
        result.loss_history.push_back(loss);
        result.train_loss_history.push_back(train_sum / static_cast<double>(n));
        result.learning_rates.push_back(lr);
        if (loss < best * (1.0 - 1e-4)) {
            best = loss;
            bad_epochs = 0;
        } else if (++bad_epochs > config.plateau_patience) {
            if (lr > config.min_learning_rate) {
                lr = std::max(lr * config.plateau_factor, config.min_learning_rate);
            }
            bad_epochs = 0;
        }
    }
    return result;
}

json ConfigToJson(const VaeConfig& c) {
    return {{"height", c.height},
            {"width", c.width},
            {"latent_dim", c.latent_dim},
            {"hidden", c.hidden},
            {"kl_coeff", c.kl_coeff},
            {"learning_rate", c.learning_rate},
            {"momentum", c.momentum},
            {"batch_size", c.batch_size},
            {"max_epochs", c.max_epochs},
            {"plateau_patience", c.plateau_patience},
            {"plateau_factor", c.plateau_factor},
            {"min_learning_rate", c.min_learning_rate},
            {"seed", c.seed}};
}

VaeConfig ConfigFromJson(const json& j) {
    VaeConfig c;
    try {
        c.height = j.value("height", c.height);
        c.width = j.value("width", c.width);
        c.latent_dim = j.value("latent_dim", c.latent_dim);
        c.hidden = j.value("hidden", c.hidden);
        c.kl_coeff = j.value("kl_coeff", c.kl_coeff);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.momentum = j.value("momentum", c.momentum);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
        c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
        c.min_learning_rate = j.value("min_learning_rate", c.min_learning_rate);
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidConfig, std::string("VAE config: ") + e.what());
    }
    c.Validate();
    return c;
}

namespace {

json LayerToJson(const Layer& l) {
    json j;
    j["rows"] = l.w.rows();
    j["cols"] = l.w.cols();
    j["w"] = std::vector<double>(l.w.data(), l.w.data() + l.w.size());
    j["b"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
    return j;
}

void LayerFromJson(const json& j, Layer& l) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto w = j.at("w").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (rows != l.w.rows() || cols != l.w.cols() || static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows) {
        throw Error(ErrorCode::kParse, "layer shape does not match the model config");
    }
    l.w = Eigen::Map<const MatrixXd>(w.data(), rows, cols);
    l.b = Eigen::Map<const VectorXd>(b.data(), rows);
}

}  // namespace

json ParamsToJson(const VaeParams& params) {
    json j;
    j["format_version"] = kModelFormatVersion;
    j["config"] = ConfigToJson(params.config);
    j["layers"] = json::array();
    ForEachLayer(params, [&](const Layer& l) { j["layers"].push_back(LayerToJson(l)); });
    return j;
}

VaeParams ParamsFromJson(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) {
            throw Error(ErrorCode::kParse, "unsupported model format version");
        }
        VaeParams p = InitParams(ConfigFromJson(j.at("config")));
        const auto& layers = j.at("layers");
        std::size_t k = 0;
        bool count_ok = true;
        ForEachLayer(p, [&](Layer& l) {
            if (k >= layers.size()) {
                count_ok = false;
                return;
            }
            LayerFromJson(layers.at(k++), l);
        });
        if (!count_ok || k != layers.size()) {
            throw Error(ErrorCode::kParse, "model has the wrong number of layers");
        }
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("model: ") + e.what());
    }
}

void SaveParams(const std::string& path, const VaeParams& params) {
    WriteFileAtomic(path, ParamsToJson(params).dump() + "\n");
}

VaeParams LoadParams(const std::string& path) {
    try {
        return ParamsFromJson(json::parse(ReadFile(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, "model '" + path + "': " + e.what());
    }
}

}  // namespace mmc::vae
