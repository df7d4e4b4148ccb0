/// @file vae.h
/// @brief Fully connected variational autoencoder with a hand-written
///        trainer, used to produce the appearance latent

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mmc/images.h"

namespace mmc::vae {

struct VaeConfig {
    int height = 32;
    int width = 32;
    int latent_dim = 16;
    std::vector<int> hidden = {128};  // encoder widths; the decoder mirrors them
    double kl_coeff = 0.1;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 16;
    int max_epochs = 30;
    int plateau_patience = 2;
    double plateau_factor = 0.5;
    double min_learning_rate = 1e-5;
    std::uint64_t seed = 7;

    int InputDim() const { return height * width; }
    void Validate() const;
};

struct Layer {
    Eigen::MatrixXd w;  // out x in
    Eigen::VectorXd b;
};

struct VaeParams {
    VaeConfig config;
    std::vector<Layer> encoder;  // hidden layers, tanh
    Layer mu_head;
    Layer logvar_head;
    std::vector<Layer> decoder;  // hidden layers (tanh) then output (sigmoid)

    /// Pointers to every scalar parameter in a fixed order.
    std::vector<double*> Parameters();
    std::size_t ParameterCount() const;
};

/// Random initialization (scaled uniform), deterministic in config.seed.
VaeParams InitParams(const VaeConfig& config);

struct Encoding {
    Eigen::VectorXd mu;
    Eigen::VectorXd logvar;
};

/// Throws Error(kDimensionMismatch) when the image does not match the config.
Encoding Encode(const VaeParams& params, const Image& image);

/// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I) drawn from (seed, draw).
Eigen::VectorXd SampleLatent(const Encoding& encoding, std::uint64_t seed, std::int64_t draw);

Eigen::VectorXd Decode(const VaeParams& params, const Eigen::VectorXd& z);

struct Loss {
    double total = 0.0;
    double reconstruction = 0.0;  // mean squared error over pixels
    double kl = 0.0;              // 0.5 sum_d (mu^2 + sigma^2 - 1 - log sigma^2)
};

/// Closed-form KL divergence of N(mu, diag(exp(logvar))) from N(0, I).
double KlDivergence(const Eigen::VectorXd& mu, const Eigen::VectorXd& logvar);

/// Loss of one image with an explicit reparameterization noise `eps`.
/// Throws Error(kNonFinite) if the loss is not finite.
Loss ElboLoss(const VaeParams& params, const Image& image, const Eigen::VectorXd& eps,
              double beta);

/// Loss and its gradient, laid out like VaeParams::Parameters().
Loss ElboLossAndGradient(const VaeParams& params, const Image& image,
                         const Eigen::VectorXd& eps, double beta, std::vector<double>& gradient);

/// Largest relative error |a - n| / max(|a|, |n|, 1e-6) between analytic and
/// central-difference (step 1e-5) gradients over `count` random parameters.
double GradCheck(const VaeParams& params, const Image& image, double beta, int count = 200,
                 std::uint64_t seed = 1);

struct TrainResult {
    VaeParams params;
    double initial_loss = 0.0;         // before the first update
    std::vector<double> loss_history;  // after each epoch
    /// Mean minibatch loss seen while training each epoch (before updates).
    std::vector<double> train_loss_history;
    std::vector<double> learning_rates;
};

/// Minibatch Adam (first-moment decay = momentum, second 0.999) with
/// plateau-based rate reduction. Losses are
/// evaluated on the whole dataset with a fixed noise draw per image, so the
/// history is deterministic and flat when nothing is learned.
/// Throws Error(kEmptyInput) or Error(kNonFinite).
TrainResult Train(const std::vector<Image>& dataset, const VaeConfig& config);

/// Mean loss over a dataset with the fixed evaluation noise.
double DatasetLoss(const VaeParams& params, const std::vector<Image>& dataset);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json ParamsToJson(const VaeParams& params);
VaeParams ParamsFromJson(const nlohmann::json& j);
void SaveParams(const std::string& path, const VaeParams& params);
VaeParams LoadParams(const std::string& path);

nlohmann::json ConfigToJson(const VaeConfig& config);
VaeConfig ConfigFromJson(const nlohmann::json& j);

}  // namespace mmc::vae
