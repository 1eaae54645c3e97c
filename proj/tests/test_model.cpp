#include <gtest/gtest.h>

#include <random>

#include "grad_suite.hpp"
#include "seismonet/error.hpp"
#include "seismonet/model.hpp"

using namespace seismonet;
using namespace seismonet::model;
using nn::Shape;
namespace st = seismonet::testing;

namespace {

ModelConfig small_config(std::size_t levels, std::size_t base, std::size_t input_len) {
  ModelConfig c;
  c.levels = levels;
  c.base_channels = base;
  c.ensemble_channels = base / 2;
  c.input_len = input_len;
  return c;
}

void zero_all(nn::ParamStore<double>& store) {
  for (auto& p : store) std::fill(p->value.begin(), p->value.end(), 0.0);
}

}  // namespace

// --- configuration --------------------------------------------------------------------

TEST(ModelConfig, DefaultsAreValid) {
  EXPECT_NO_THROW(ModelConfig{}.validate());
  EXPECT_EQ(ModelConfig{}.stride, 2u);
  EXPECT_EQ(ModelConfig{}.inception_kernels, (std::vector<std::size_t>{1, 3, 5}));
}

TEST(ModelConfig, ViolationsNameTheKey) {
  auto expect_key = [](ModelConfig c, const std::string& key) {
    try {
      c.validate();
      ADD_FAILURE() << "expected ConfigError for " << key;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), key);
    }
  };
  ModelConfig c;
  c.k_p = 4;
  expect_key(c, "model.k_p");
  c = ModelConfig{};
  c.ensemble_channels = 10;
  expect_key(c, "model.ensemble_channels");
  c = ModelConfig{};
  c.levels = 0;
  expect_key(c, "model.levels");
  c = ModelConfig{};
  c.input_len = 40;
  expect_key(c, "model.input_len");
  c = ModelConfig{};
  c.inception_kernels.clear();
  expect_key(c, "model.inception_kernels");
}

TEST(ModelConfig, TextRoundTrip) {
  ModelConfig c = small_config(3, 8, 200);
  c.leaky_slope = 0.02;
  c.inception_kernels = {1, 3};
  std::map<std::string, std::string> kv;
  std::istringstream in(c.to_text());
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  EXPECT_EQ(ModelConfig::from_map(kv), c);
}

TEST(ModelConfig, SetParsesValuesAndRejectsUnknownKeys) {
  ModelConfig c;
  c.set("levels", "3");
  c.set("inception_kernels", "1,3,5,7");
  EXPECT_EQ(c.levels, 3u);
  EXPECT_EQ(c.inception_kernels.size(), 4u);
  EXPECT_THROW(c.set("levels", "three"), ConfigError);
  EXPECT_THROW(c.set("colour", "blue"), ConfigError);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t k = 0; k < 64; ++k) seen.insert(derive_seed(s, k));
  }
  EXPECT_EQ(seen.size(), 256u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

// --- plan arithmetic ------------------------------------------------------------------

TEST(LevelPlan, DefaultNetworkHasTwelveBlocksAnd512Bottleneck) {
  ModelConfig c;
  c.input_len = 500;
  SeismoNet<float> net(c, 1);
  EXPECT_EQ(net.block_count(), 12u);
  EXPECT_EQ(net.bottleneck_channels(), 512u);
  EXPECT_EQ(net.plan().encoder_channels, (std::vector<std::size_t>{16, 32, 64, 128, 256, 512}));
  EXPECT_EQ(net.plan().decoder_channels, (std::vector<std::size_t>{128, 64, 32, 16, 8}));
}

TEST(LevelPlan, BlockCountAndBottleneckForAllDepths) {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t ci : {4u, 8u, 32u}) {
      const auto c = small_config(n, ci, 8u << n);
      const auto plan = make_plan(c);
      EXPECT_EQ(plan.bottleneck_channels(), (std::size_t{1} << (n - 1)) * ci);
      SeismoNet<float> net(c, 0);
      EXPECT_EQ(net.block_count(), 2 * n + 2);
    }
  }
}

TEST(LevelPlan, LengthsFollowPaddedStridedFormula) {
  const auto plan = make_plan(small_config(3, 8, 101));
  EXPECT_EQ(plan.encoder_lengths, (std::vector<std::size_t>{101, 51, 26, 13}));
  EXPECT_EQ(plan.decoder_lengths, (std::vector<std::size_t>{26, 51, 101}));
}

// --- blocks ---------------------------------------------------------------------------

TEST(EnsembleBlock, ShapeAndZeroInput) {
  nn::ParamStore<double> store;
  EnsembleBlock<double> block(store, "ens", 16, 7);
  block.reset_parameters(1);
  nn::Tensor<double> x(Shape{2, 1, 400});
  const auto y = block.forward(x);
  EXPECT_EQ(y.shape(), (Shape{2, 16, 400}));
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(InceptionResidual, BranchSplitAndShape) {
  nn::ParamStore<double> store;
  InceptionResidual<double> block(store, "inc", 32, {1, 3, 5}, 0.01);
  EXPECT_EQ(block.branch_channels(), (std::vector<std::size_t>{12, 10, 10}));
  std::mt19937_64 rng(2);
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 32, 100}, rng)).shape(), (Shape{1, 32, 100}));
  InceptionResidual<double> narrow(store, "narrow", 2, {1, 3, 5}, 0.01);
  EXPECT_EQ(narrow.branch_count(), 2u);
}

TEST(InceptionResidual, ZeroBranchesActAsLeakyRelu) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    nn::ParamStore<double> store;
    const std::size_t c = st::pick(rng, 1, 9);
    InceptionResidual<double> block(store, "inc", c, {1, 3, 5}, 0.01);
    zero_all(store);
    const auto x = st::random_tensor(Shape{2, c, 17}, rng);
    EXPECT_EQ(block.forward(x).values(), nn::leaky_relu(x, 0.01).values());
    EXPECT_EQ(block.infer(x).values(), nn::leaky_relu(x, 0.01).values());
  }
}

TEST(ContractingBlock, ShapeRule) {
  nn::ParamStore<double> store;
  ContractingBlock<double> block(store, "ccb", 16, ModelConfig{});
  block.reset_parameters(4);
  std::mt19937_64 rng(4);
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 16, 100}, rng)).shape(), (Shape{1, 32, 50}));
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 16, 101}, rng)).shape(), (Shape{1, 32, 51}));
  // The convolution feeding batch norm carries no bias.
  EXPECT_EQ(store.find("ccb.conv_p.bias"), nullptr);
  EXPECT_NE(store.find("ccb.conv_s.bias"), nullptr);
}

TEST(ExpandingBlock, ChannelRules) {
  std::mt19937_64 rng(5);
  nn::ParamStore<double> store;
  ExpandingBlock<double> first(store, "ecb1", 512, 0, 8, 16, ModelConfig{});
  first.reset_parameters(5);
  const auto y = first.forward(st::random_tensor(Shape{1, 512, 8}, rng), nullptr);
  EXPECT_EQ(y.shape(), (Shape{1, 128, 16}));

  ExpandingBlock<double> second(store, "ecb2", 128, 256, 100, 200, ModelConfig{});
  second.reset_parameters(6);
  const auto skip = st::random_tensor(Shape{1, 256, 100}, rng);
  EXPECT_EQ(second.forward(st::random_tensor(Shape{1, 128, 100}, rng), &skip).shape(), (Shape{1, 64, 200}));
  EXPECT_THROW(second.forward(st::random_tensor(Shape{1, 128, 100}, rng), nullptr), ValidationError);
  EXPECT_THROW(first.forward(st::random_tensor(Shape{1, 512, 9}, rng), nullptr), ValidationError);
}

TEST(ExpandingBlock, StrideRemainderBecomesOutputPadding) {
  // 13 samples upsample to 25 by the kernel arithmetic; the target of 26 is reached by output padding.
  nn::ParamStore<double> store;
  ExpandingBlock<double> block(store, "ecb", 8, 0, 13, 26, ModelConfig{});
  block.reset_parameters(7);
  std::mt19937_64 rng(7);
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 8, 13}, rng), nullptr).shape(), (Shape{1, 2, 26}));
}

TEST(ExpandingBlock, ZeroTransposedConvGivesZeroUpsampledPath) {
  nn::ParamStore<double> store;
  ExpandingBlock<double> block(store, "ecb", 8, 0, 10, 20, ModelConfig{});
  zero_all(store);
  std::mt19937_64 rng(8);
  const auto y = block.forward(st::random_tensor(Shape{2, 8, 10}, rng), nullptr);
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(DenoisingBlock, ResizesToWindowLength) {
  nn::ParamStore<double> store;
  DenoisingBlock<double> block(store, "den", 8, 500, 0.01);
  block.reset_parameters(9);
  std::mt19937_64 rng(9);
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 8, 497}, rng)).shape(), (Shape{1, 1, 500}));
  EXPECT_EQ(block.forward(st::random_tensor(Shape{1, 8, 500}, rng)).shape(), (Shape{1, 1, 500}));
}

class BlockGradients : public ::testing::TestWithParam<int> {};

TEST_P(BlockGradients, RandomShapes) {
  std::mt19937_64 rng(2000 + GetParam());
  EXPECT_LT(st::grad_inception(rng).max_rel_error, 1e-4);
  EXPECT_LT(st::grad_ensemble(rng).max_rel_error, 1e-4);
  EXPECT_LT(st::grad_denoise(rng).max_rel_error, 1e-4);
  EXPECT_LT(st::grad_contracting(rng).max_rel_error, 1e-4);
  EXPECT_LT(st::grad_expanding(rng).max_rel_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Seeds, BlockGradients, ::testing::Range(0, 3));

// --- network --------------------------------------------------------------------------

TEST(SeismoNet, PreservesLengthOnWorkedConfig) {
  SeismoNet<float> net(small_config(3, 8, 500), 1);
  nn::Tensor<float> x(Shape{1, 1, 500});
  EXPECT_EQ(net.forward(x).shape(), (Shape{1, 1, 500}));
  EXPECT_EQ(net.predict(x).shape(), (Shape{1, 1, 500}));
}

TEST(SeismoNet, PreservesLengthOnRandomConfigs) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c = small_config(st::pick(rng, 1, 4), 4 * st::pick(rng, 1, 3), 0);
    c.stride = st::pick(rng, 2, 3);
    std::size_t min_len = 4;
    for (std::size_t i = 0; i < c.levels; ++i) min_len *= c.stride;
    c.input_len = min_len + st::pick(rng, 0, 60);
    SeismoNet<float> net(c, rng());
    nn::Tensor<float> x(Shape{2, 1, c.input_len});
    EXPECT_EQ(net.forward(x).shape(), x.shape()) << c.to_text();
  }
}

TEST(SeismoNet, RejectsWrongInputShape) {
  SeismoNet<float> net(small_config(2, 4, 64), 1);
  EXPECT_THROW(net.forward(nn::Tensor<float>(Shape{1, 1, 63})), ValidationError);
  EXPECT_THROW(net.forward(nn::Tensor<float>(Shape{1, 2, 64})), ValidationError);
}

TEST(SeismoNet, IdenticalRowsGiveIdenticalOutputs) {
  SeismoNet<float> net(small_config(2, 4, 64), 3);
  net.set_training(false);
  std::mt19937_64 rng(11);
  const auto row = st::uniform(64, rng);
  std::vector<float> two;
  for (int k = 0; k < 2; ++k) two.insert(two.end(), row.begin(), row.end());
  const auto y = net.predict(nn::Tensor<float>(Shape{2, 1, 64}, two));
  EXPECT_TRUE(std::equal(y.row(0, 0).begin(), y.row(0, 0).end(), y.row(1, 0).begin()));
}

TEST(SeismoNet, SeedDeterminesParameters) {
  const auto c = small_config(2, 4, 64);
  SeismoNet<float> a(c, 5), b(c, 5), d(c, 6);
  for (std::size_t i = 0; i < a.params().size(); ++i) EXPECT_EQ(a.params()[i].value, b.params()[i].value);
  EXPECT_NE(a.params()[0].value, d.params()[0].value);
}

TEST(SeismoNet, InferenceForwardMatchesPredict) {
  SeismoNet<float> net(small_config(2, 4, 64), 7);
  std::mt19937_64 rng(12);
  std::vector<float> v;
  for (double d : st::uniform(3 * 64, rng)) v.push_back(static_cast<float>(d));
  const nn::Tensor<float> x(Shape{3, 1, 64}, v);
  net.forward(x);  // moves running statistics
  net.set_training(false);
  EXPECT_EQ(net.forward(x).values(), net.predict(x).values());
}

TEST(SeismoNet, FloatAndDoubleAgree) {
  const auto c = small_config(2, 4, 64);
  SeismoNet<float> f(c, 9);
  SeismoNet<double> d(c, 9);
  d.copy_parameters_from(f);
  std::mt19937_64 rng(13);
  const auto xd = st::random_tensor(Shape{2, 1, 64}, rng);
  std::vector<float> xv(xd.values().begin(), xd.values().end());
  const auto yf = f.forward(nn::Tensor<float>(xd.shape(), xv));
  const auto yd = d.forward(xd);
  for (std::size_t i = 0; i < yf.numel(); ++i) EXPECT_NEAR(yf.values()[i], yd.values()[i], 1e-4);
}

TEST(SeismoNet, OverfitsTinyBatch) {
  SeismoNet<float> net(small_config(2, 4, 64), 11);
  std::mt19937_64 rng(14);
  std::vector<float> xv, tv;
  for (double d : st::uniform(2 * 64, rng)) xv.push_back(static_cast<float>(d));
  for (double d : st::uniform(2 * 64, rng, 0.0, 10.0)) tv.push_back(static_cast<float>(d));
  const nn::Tensor<float> x(Shape{2, 1, 64}, xv), t(Shape{2, 1, 64}, tv);
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < 20; ++step) {
    const auto loss = nn::smooth_l1_loss(net.forward(x), t);
    EXPECT_LT(loss.value, prev) << "step " << step;
    prev = loss.value;
    net.backward(loss.grad);
    nn::sgd_step(net.params(), 0.001);
  }
}

TEST(SeismoNet, TinyModelGradient) {
  std::mt19937_64 rng(15);
  EXPECT_LT(st::grad_model(rng, small_config(2, 4, 64), 2).max_rel_error, 1e-3);
}
