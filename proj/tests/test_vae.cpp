#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "mmc/error.h"
#include "mmc/images.h"
#include "mmc/vae.h"

namespace mmc::vae {
namespace {

VaeConfig TinyConfig() {
    VaeConfig c;
    c.height = 8;
    c.width = 8;
    c.latent_dim = 3;
    c.hidden = {10};
    c.batch_size = 8;
    c.max_epochs = 4;
    return c;
}

Eigen::VectorXd RandomVector(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = d(rng);
    return v;
}

TEST(KlDivergence, StandardNormalIsZero) {
    EXPECT_DOUBLE_EQ(KlDivergence(Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5)), 0.0);
}

TEST(KlDivergence, UnitMeanShift) {
    // mu = 1 in every dimension, unit variance: 0.5 per dimension
    EXPECT_NEAR(KlDivergence(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Zero(4)), 2.0, 1e-12);
}

TEST(KlDivergence, MatchesDirectSumAndIsNonNegative) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 8);
        const Eigen::VectorXd mu = RandomVector(rng, d, 2.0);
        const Eigen::VectorXd logvar = RandomVector(rng, d, 1.5);
        double direct = 0.0;
        for (int i = 0; i < d; ++i) {
            direct += 0.5 * (mu(i) * mu(i) + std::exp(logvar(i)) - 1.0 - logvar(i));
        }
        const double kl = KlDivergence(mu, logvar);
        EXPECT_NEAR(kl, direct, 1e-10);
        EXPECT_GE(kl, 0.0);
    }
}

TEST(Reparameterization, SampleMeanAndSpread) {
    Encoding enc;
    enc.mu = Eigen::Vector3d(0.5, -1.0, 2.0);
    enc.logvar = Eigen::Vector3d(0.0, std::log(4.0), std::log(0.25));
    constexpr int kDraws = 10000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(3);
    for (int k = 0; k < kDraws; ++k) {
        const Eigen::VectorXd z = SampleLatent(enc, 3, k);
        sum += z;
        sq += (z - enc.mu).cwiseProduct(z - enc.mu);
    }
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::exp(0.5 * enc.logvar(i));
        const double se = sigma / std::sqrt(static_cast<double>(kDraws));
        EXPECT_NEAR(sum(i) / kDraws, enc.mu(i), 3.0 * se) << "dim " << i;
        EXPECT_NEAR(std::sqrt(sq(i) / kDraws), sigma, 0.05 * sigma) << "dim " << i;
    }
}

TEST(Reparameterization, DeterministicInSeedAndDraw) {
    Encoding enc{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4)};
    EXPECT_EQ(SampleLatent(enc, 5, 9), SampleLatent(enc, 5, 9));
    EXPECT_NE(SampleLatent(enc, 5, 9), SampleLatent(enc, 5, 10));
    EXPECT_NE(SampleLatent(enc, 5, 9), SampleLatent(enc, 6, 9));
}

TEST(ElboLoss, PerfectReconstructionHasZeroReconstructionTerm) {
    VaeConfig c = TinyConfig();
    VaeParams p = InitParams(c);
    // Output layer forced to a constant 0.5 image.
    p.decoder.back().w.setZero();
    p.decoder.back().b.setZero();
    Image img{c.height, c.width, std::vector<double>(c.InputDim(), 0.5)};
    const Loss loss = ElboLoss(p, img, Eigen::VectorXd::Zero(c.latent_dim), 0.1);
    EXPECT_NEAR(loss.reconstruction, 0.0, 1e-15);
    EXPECT_NEAR(loss.total, 0.1 * loss.kl, 1e-15);
}

TEST(ElboLoss, RejectsWrongImageSize) {
    VaeParams p = InitParams(TinyConfig());
    Image img{4, 4, std::vector<double>(16, 0.0)};
    EXPECT_THROW(ElboLoss(p, img, Eigen::VectorXd::Zero(3), 0.1), Error);
    EXPECT_THROW(Encode(p, img), Error);
}

TEST(Gradient, MatchesCentralDifferences) {
    const auto images = SyntheticImages(0, 2, 3, 8, 8);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        VaeConfig c = TinyConfig();
        c.seed = seed;
        c.hidden = {10, 6};
        const VaeParams p = InitParams(c);
        for (const auto& img : images) {
            EXPECT_LT(GradCheck(p, img, c.kl_coeff, 200, seed), 1e-4);
        }
    }
}

TEST(Gradient, DefaultArchitecture) {
    VaeConfig c;
    const VaeParams p = InitParams(c);
    const Image img = SyntheticImage(1, 4, 0);
    EXPECT_LT(GradCheck(p, img, c.kl_coeff, 200, 3), 1e-4);
}

TEST(Gradient, ZeroImageAndZeroWeightsStayFinite) {
    VaeConfig c = TinyConfig();
    VaeParams p = InitParams(c);
    for (double* v : p.Parameters()) *v = 0.0;
    Image img{c.height, c.width, std::vector<double>(c.InputDim(), 0.0)};
    std::vector<double> grad;
    const Loss loss = ElboLossAndGradient(p, img, Eigen::VectorXd::Ones(c.latent_dim), 0.1, grad);
    EXPECT_TRUE(std::isfinite(loss.total));
    ASSERT_EQ(grad.size(), p.ParameterCount());
    for (double g : grad) EXPECT_TRUE(std::isfinite(g));
}

TEST(Gradient, KlTermVanishesWithoutWeight) {
    // With eps = 0 the decoder never sees logvar, so only the KL term moves
    // the logvar head.
    VaeConfig c = TinyConfig();
    VaeParams p = InitParams(c);
    p.logvar_head.b.setConstant(0.7);
    const Image img = SyntheticImage(0, 1, 0, 8, 8);
    const Eigen::VectorXd eps = Eigen::VectorXd::Zero(c.latent_dim);

    VaeParams probe = p;
    const auto all = probe.Parameters();
    const double* first = probe.logvar_head.w.data();
    const double* bias = probe.logvar_head.b.data();
    std::vector<std::size_t> head;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if ((all[i] >= first && all[i] < first + probe.logvar_head.w.size()) ||
            (all[i] >= bias && all[i] < bias + probe.logvar_head.b.size())) {
            head.push_back(i);
        }
    }
    ASSERT_EQ(head.size(), static_cast<std::size_t>(probe.logvar_head.w.size() + c.latent_dim));

    std::vector<double> g0, g1;
    ElboLossAndGradient(p, img, eps, 0.0, g0);
    ElboLossAndGradient(p, img, eps, 0.5, g1);
    double off = 0.0, on = 0.0;
    for (std::size_t i : head) {
        off = std::max(off, std::abs(g0[i]));
        on = std::max(on, std::abs(g1[i]));
    }
    EXPECT_EQ(off, 0.0);
    EXPECT_GT(on, 1e-3);
}

TEST(Train, ZeroLearningRateLeavesParametersAlone) {
    VaeConfig c = TinyConfig();
    c.learning_rate = 0.0;
    const auto data = SyntheticImages(0, 1, 20, 8, 8);
    const TrainResult r = Train(data, c);
    VaeParams init = InitParams(c);
    VaeParams trained = r.params;
    const auto a = init.Parameters();
    const auto b = trained.Parameters();
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(*a[i], *b[i]);
    for (double l : r.loss_history) EXPECT_DOUBLE_EQ(l, r.initial_loss);
}

TEST(Train, SameSeedSameHistory) {
    VaeConfig c = TinyConfig();
    const auto data = SyntheticImages(1, 2, 24, 8, 8);
    const TrainResult a = Train(data, c);
    const TrainResult b = Train(data, c);
    EXPECT_EQ(a.loss_history, b.loss_history);
    EXPECT_EQ(a.train_loss_history, b.train_loss_history);
    EXPECT_EQ(ParamsToJson(a.params).dump(), ParamsToJson(b.params).dump());
    c.seed = 8;
    EXPECT_NE(Train(data, c).loss_history, a.loss_history);
}

TEST(Train, LossDecreases) {
    VaeConfig c = TinyConfig();
    c.max_epochs = 10;
    auto data = SyntheticImages(0, 3, 40, 8, 8);
    const auto more = SyntheticImages(1, 3, 40, 8, 8);
    data.insert(data.end(), more.begin(), more.end());
    const TrainResult r = Train(data, c);
    ASSERT_EQ(r.loss_history.size(), 10u);
    ASSERT_EQ(r.train_loss_history.size(), 10u);
    ASSERT_EQ(r.learning_rates.size(), 10u);
    EXPECT_LT(r.loss_history.back(), 0.5 * r.initial_loss);
    EXPECT_DOUBLE_EQ(r.loss_history.back(), DatasetLoss(r.params, data));
}

TEST(Train, EmptyDatasetRejected) {
    EXPECT_THROW(Train({}, TinyConfig()), Error);
}

TEST(Train, InvalidConfigRejected) {
    VaeConfig c = TinyConfig();
    c.kl_coeff = 0.0;
    EXPECT_THROW(c.Validate(), Error);
    c = TinyConfig();
    c.momentum = 1.0;
    EXPECT_THROW(c.Validate(), Error);
    c = TinyConfig();
    c.hidden = {0};
    EXPECT_THROW(c.Validate(), Error);
}

TEST(Params, SaveLoadRoundTrip) {
    VaeConfig c = TinyConfig();
    c.hidden = {7, 5};
    const VaeParams p = InitParams(c);
    const auto path = std::filesystem::temp_directory_path() / "mmc_vae_roundtrip.json";
    SaveParams(path.string(), p);
    VaeParams q = LoadParams(path.string());
    std::filesystem::remove(path);
    EXPECT_EQ(q.ParameterCount(), p.ParameterCount());
    EXPECT_EQ(ParamsToJson(q).dump(), ParamsToJson(p).dump());
    const Image img = SyntheticImage(0, 1, 0, 8, 8);
    EXPECT_EQ(Encode(q, img).mu, Encode(p, img).mu);
}

TEST(Params, LoadRejectsGarbage) {
    const auto path = std::filesystem::temp_directory_path() / "mmc_vae_garbage.json";
    {
        std::ofstream(path) << "{\"format_version\": 99}";
    }
    EXPECT_THROW(LoadParams(path.string()), Error);
    std::filesystem::remove(path);
    EXPECT_THROW(LoadParams("/nonexistent/model.json"), Error);
}

}  // namespace
}  // namespace mmc::vae
