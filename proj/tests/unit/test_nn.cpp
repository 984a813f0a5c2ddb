#include <gtest/gtest.h>

#include <filesystem>

#include "emoface/errors.hpp"
#include "emoface/nn/archive.hpp"
#include "emoface/nn/layers.hpp"
#include "emoface/nn/ops.hpp"
#include "emoface/nn/optim.hpp"
#include "oracles.hpp"

using namespace emoface;
using nn::Tensor;
using nn::Var;

namespace {

// Weighted sum so that every output element gets a distinct upstream gradient.
Var probe_sum(const Var& y, std::uint64_t seed) {
  nn::Rng rng(seed);
  return nn::sum(nn::mul(y, nn::constant(oracle::random_tensor(rng, y.shape()))));
}

constexpr double kFloatGradTol = 2e-2;

}  // namespace

TEST(Tensor, ReshapeKeepsDataAndRejectsBadCounts) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor r = t.reshaped({3, 2});
  EXPECT_EQ(r.at(2, 1), 6.0f);
  EXPECT_THROW(t.reshaped({4, 2}), ContractError);
}

TEST(Tensor, HashSeesSingleBitChanges) {
  Tensor a({4}, {1, 2, 3, 4});
  Tensor b = a;
  EXPECT_EQ(nn::tensor_hash(a), nn::tensor_hash(b));
  b[2] = std::nextafter(3.0f, 4.0f);
  EXPECT_NE(nn::tensor_hash(a), nn::tensor_hash(b));
}

TEST(Autograd, NoGradGuardSkipsTape) {
  Var p = nn::parameter(Tensor({2}, 1.0f));
  {
    nn::NoGradGuard guard;
    EXPECT_FALSE(nn::grad_enabled());
    Var y = nn::sum(nn::square(p));
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(nn::grad_enabled());
}

TEST(Autograd, ElementwiseGradients) {
  nn::Rng rng(1);
  const Tensor a = oracle::random_tensor(rng, {3, 4}), b = oracle::random_tensor(rng, {3, 4});
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) {
        Var y = nn::add(nn::mul(nn::tanh(v[0]), nn::sigmoid(v[1])), nn::softplus(nn::sub(v[0], v[1])));
        return probe_sum(nn::leaky_relu(y), 2);
      },
      {a, b});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, MatmulLinearGradients) {
  nn::Rng rng(3);
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) { return probe_sum(nn::linear(v[0], v[1], v[2]), 4); },
      {oracle::random_tensor(rng, {3, 5}), oracle::random_tensor(rng, {5, 2}), oracle::random_tensor(rng, {2})});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, Conv2dGradients) {
  nn::Rng rng(5);
  for (int stride : {1, 2}) {
    const double err = oracle::gradient_check(
        [stride](const std::vector<Var>& v) { return probe_sum(nn::conv2d(v[0], v[1], v[2], stride, 1), 6); },
        {oracle::random_tensor(rng, {2, 2, 6, 6}), oracle::random_tensor(rng, {3, 2, 3, 3}),
         oracle::random_tensor(rng, {3})});
    EXPECT_LT(err, kFloatGradTol) << "stride " << stride;
  }
}

TEST(Autograd, NormalizationGradients) {
  nn::Rng rng(7);
  const Tensor x = oracle::random_tensor(rng, {2, 3, 4, 4});
  const Tensor s = oracle::random_tensor(rng, {2, 3}), b = oracle::random_tensor(rng, {2, 3});
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) {
        Var y = nn::scale_shift_channels(nn::instance_normalize(v[0]), v[1], v[2]);
        return nn::add(probe_sum(y, 8), probe_sum(nn::concat({nn::channel_mean(v[0]), nn::channel_std(v[0])}, 1), 9));
      },
      {x, s, b});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, ResamplingGradients) {
  nn::Rng rng(11);
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) {
        Var up = nn::upsample_nearest2x(v[0]);
        Var rs = nn::resize_bilinear(v[0], 7, 5);
        return nn::add(nn::add(probe_sum(up, 1), probe_sum(rs, 2)),
                       nn::add(probe_sum(nn::avg_pool2x(v[0]), 3), probe_sum(nn::max_pool2x(v[0]), 4)));
      },
      {oracle::random_tensor(rng, {1, 2, 4, 4})});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, GridWarpGradients) {
  nn::Rng rng(13);
  // Flows keep samples away from integer pixel positions, where bilinear
  // interpolation has kinks.
  Tensor flow({1, 2, 5, 5});
  for (auto& f : flow.storage()) f = static_cast<float>((rng.below(3) - 1.0) * 0.4 + 0.13);
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) { return probe_sum(nn::grid_warp(v[0], v[1]), 5); },
      {oracle::random_tensor(rng, {1, 2, 5, 5}), flow}, 1e-4);
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, LstmGradients) {
  nn::Rng rng(17);
  const int in = 3, hidden = 2;
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) { return probe_sum(nn::lstm(v[0], v[1], v[2], v[3]), 3); },
      {oracle::random_tensor(rng, {4, 2, in}), oracle::random_tensor(rng, {in, 4 * hidden}),
       oracle::random_tensor(rng, {hidden, 4 * hidden}), oracle::random_tensor(rng, {4 * hidden})});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Autograd, LossGradients) {
  nn::Rng rng(19);
  const double err = oracle::gradient_check(
      [](const std::vector<Var>& v) { return nn::add(nn::l1_loss(v[0], v[1]), nn::mse_loss(v[0], v[1])); },
      {oracle::random_tensor(rng, {10}), oracle::random_tensor(rng, {10})});
  EXPECT_LT(err, kFloatGradTol);
}

TEST(Lstm, OutputsAreCausal) {
  nn::Rng rng(23);
  const Tensor x = oracle::random_tensor(rng, {6, 1, 3});
  const Tensor wi = oracle::random_tensor(rng, {3, 8}), wh = oracle::random_tensor(rng, {2, 8}),
               b = oracle::random_tensor(rng, {8});
  nn::NoGradGuard guard;
  const Tensor full = nn::lstm(nn::constant(x), nn::constant(wi), nn::constant(wh), nn::constant(b)).value();
  Tensor prefix({3, 1, 3}, std::vector<float>(x.data(), x.data() + 9));
  const Tensor part = nn::lstm(nn::constant(prefix), nn::constant(wi), nn::constant(wh), nn::constant(b)).value();
  for (std::size_t i = 0; i < part.numel(); ++i) EXPECT_EQ(part[i], full[i]);
}

TEST(Adam, SkipsParametersWithoutGradient) {
  Var a = nn::parameter(Tensor({2}, 1.0f)), b = nn::parameter(Tensor({2}, 1.0f));
  nn::Adam opt({a, b}, {});
  nn::backward(nn::sum(nn::square(a)));
  opt.step();
  EXPECT_LT(a.value()[0], 1.0f);
  EXPECT_EQ(b.value()[0], 1.0f);
}

TEST(ParameterSet, SelectByPrefixAndStateRoundTrip) {
  nn::ParameterSet ps;
  nn::Rng rng(1);
  nn::Linear l1(ps, "enc.a", 2, 3, rng), l2(ps, "dec.b", 3, 1, rng);
  EXPECT_EQ(ps.select({"enc."}).size(), 2u);
  nn::ParameterSet other;
  nn::Rng rng2(99);
  nn::Linear m1(other, "enc.a", 2, 3, rng2), m2(other, "dec.b", 3, 1, rng2);
  EXPECT_NE(other.fingerprints(), ps.fingerprints());
  other.load_state(ps.state());
  EXPECT_EQ(other.fingerprints(), ps.fingerprints());
}

TEST(Archive, RoundTripIsBitwise) {
  nn::Archive a;
  a.metadata = {{"kind", "test"}, {"note", "x=1"}};
  nn::Rng rng(3);
  a.tensors = {{"w", oracle::random_tensor(rng, {2, 3})}, {"b", oracle::random_tensor(rng, {4})}};
  const auto bytes = nn::serialize_archive(a);
  const nn::Archive back = nn::parse_archive(bytes);
  EXPECT_EQ(back.meta("note"), "x=1");
  EXPECT_TRUE(back.tensor("w").bitwise_equal(a.tensors[0].second));
  EXPECT_TRUE(back.tensor("b").bitwise_equal(a.tensors[1].second));
}

TEST(Archive, RejectsTruncationCorruptionAndOldVersions) {
  nn::Archive a;
  a.tensors = {{"w", Tensor({3}, 2.0f)}};
  auto bytes = nn::serialize_archive(a);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(nn::parse_archive(std::span(bytes).first(cut)), FormatError) << cut;
  }
  auto flipped = bytes;
  flipped[flipped.size() - 12] ^= 0x01;
  EXPECT_THROW(nn::parse_archive(flipped), FormatError);
  EXPECT_THROW(nn::parse_archive(nn::serialize_archive(a, nn::kArchiveVersion - 1)), VersionError);
}
