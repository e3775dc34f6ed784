#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "con360/conditioning.hpp"
#include "oracles.hpp"

namespace cond = con360::conditioning;
using con360::ErrorKind;
using con360::TensorD;
using con360::TensorF;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const con360::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kParse;
}

TensorF random_tensor(con360::Shape shape, std::mt19937_64& rng, float lo = -1.0f,
                      float hi = 1.0f) {
  TensorF t(std::move(shape));
  std::uniform_real_distribution<float> d(lo, hi);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Small config so shape-level properties run quickly.
cond::MapEncoderConfig tiny_config() {
  cond::MapEncoderConfig cfg;
  cfg.convs = {{2, 3, 3, 2}, {3, 4, 3, 1}};
  cfg.lstm_hidden = 5;
  for (const auto& site : cond::kInjectionSites) cfg.sites[site] = {3, 1, 3, 2};
  cfg.sites[{cond::Branch::kVideo, cond::SiteLevel::kDown3}] = {6, 2, 2, 7};
  return cfg;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST(Sites, NamesRoundTrip) {
  EXPECT_EQ(cond::kInjectionSites.size(), 8u);
  for (const auto& s : cond::kInjectionSites) EXPECT_EQ(cond::site_from_name(s.name()), s);
  EXPECT_EQ((cond::InjectionSite{cond::Branch::kVideo, cond::SiteLevel::kDown3}.name()),
            "video.down3");
  EXPECT_EQ(kind_of([] { cond::site_from_name("video.mid"); }), ErrorKind::kConfiguration);
}

TEST(Config, ReferenceValidatesAndChains) {
  const auto cfg = cond::MapEncoderConfig::reference();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.sites.size(), 8u);
  EXPECT_EQ(cfg.encoded_size(256, 256), (std::pair<std::size_t, std::size_t>{32, 32}));
  auto bad = cfg;
  bad.convs[1].in_channels = 8;
  EXPECT_EQ(kind_of([&] { bad.validate(); }), ErrorKind::kConfiguration);
  auto first = cfg;
  first.convs[0].in_channels = 3;
  EXPECT_EQ(kind_of([&] { first.validate(); }), ErrorKind::kConfiguration);
}

TEST(Config, JsonRoundTrip) {
  for (const auto& cfg : {cond::MapEncoderConfig::reference(), tiny_config()}) {
    EXPECT_EQ(cond::config_from_json(cond::config_to_json(cfg)), cfg);
  }
  EXPECT_EQ(kind_of([] { cond::config_from_json("{\"convs\": []}"); }), ErrorKind::kConfiguration);
}

TEST(Stack, ShapesAndChannels) {
  std::mt19937_64 rng(3);
  const auto sal = random_tensor({32, 256, 256}, rng, 0.0f, 1.0f);
  const auto bd = random_tensor({32, 256, 256}, rng, 0.0f, 1.0f);
  const auto s = cond::stack_maps(sal, bd, 8.0);
  EXPECT_EQ(s.tensor.shape(), (con360::Shape{32, 2, 256, 256}));
  for (std::size_t t : {0u, 31u}) {
    const auto frame = s.tensor.slab(t);
    EXPECT_TRUE(std::equal(sal.slab(t).begin(), sal.slab(t).end(), frame.begin()));
    EXPECT_TRUE(std::equal(bd.slab(t).begin(), bd.slab(t).end(), frame.begin() + 256 * 256));
  }
  const auto one = cond::stack_maps(random_tensor({1, 4, 8}, rng, 0, 1),
                                    random_tensor({1, 4, 8}, rng, 0, 1), 8.0);
  EXPECT_EQ(one.tensor.shape(), (con360::Shape{1, 2, 4, 8}));
}

TEST(Stack, Errors) {
  std::mt19937_64 rng(3);
  const auto a = random_tensor({2, 4, 8}, rng, 0, 1);
  EXPECT_EQ(kind_of([&] { cond::stack_maps(a, random_tensor({2, 4, 6}, rng, 0, 1), 8.0); }),
            ErrorKind::kShape);
  auto raw = a;
  raw[5] = 1.5f;
  EXPECT_EQ(kind_of([&] { cond::stack_maps(a, raw, 8.0); }), ErrorKind::kDomain);
}

TEST(Stack, NormalizeFrames) {
  TensorF t({2, 1, 3}, {0, 5, 10, -2, 0, 2});
  EXPECT_EQ(cond::normalize_frames(t).storage(), (std::vector<float>{0, .5f, 1, 0, .5f, 1}));
}

TEST(Conv, MatchesNaiveLoop) {
  std::mt19937_64 rng(8);
  for (const cond::ConvSpec spec : {cond::ConvSpec{2, 3, 3, 2}, cond::ConvSpec{3, 2, 3, 1},
                                    cond::ConvSpec{2, 2, 5, 3}, cond::ConvSpec{1, 1, 1, 1}}) {
    const std::size_t h = 9, w = 11, k = spec.kernel, s = spec.stride, pad = k / 2;
    const auto x = random_tensor({spec.in_channels, h, w}, rng);
    const auto wt = random_tensor({spec.out_channels, spec.in_channels, k, k}, rng);
    const auto b = random_tensor({spec.out_channels}, rng);
    const auto got = cond::conv2d_relu(x, spec, wt, b);
    const std::size_t oh = (h + 2 * pad - k) / s + 1, ow = (w + 2 * pad - k) / s + 1;
    ASSERT_EQ(got.shape(), (con360::Shape{spec.out_channels, oh, ow}));
    for (std::size_t co = 0; co < spec.out_channels; ++co) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = b[co];
          for (std::size_t ci = 0; ci < spec.in_channels; ++ci) {
            for (std::size_t ky = 0; ky < k; ++ky) {
              for (std::size_t kx = 0; kx < k; ++kx) {
                const long yy = static_cast<long>(oy * s + ky) - static_cast<long>(pad);
                const long xx = static_cast<long>(ox * s + kx) - static_cast<long>(pad);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) {
                  continue;
                }
                acc += wt[((co * spec.in_channels + ci) * k + ky) * k + kx] *
                       static_cast<double>(x[(ci * h + static_cast<std::size_t>(yy)) * w +
                                             static_cast<std::size_t>(xx)]);
              }
            }
          }
          EXPECT_NEAR(got[(co * oh + oy) * ow + ox], std::max(acc, 0.0), 1e-6);
        }
      }
    }
  }
}

TEST(Pool, Examples) {
  const TensorF ones({1, 4, 4}, 1.0f);
  EXPECT_EQ(cond::adaptive_avg_pool(ones, 2, 2).storage(), std::vector<float>(4, 1.0f));
  const TensorF q({1, 2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(cond::adaptive_avg_pool(q, 1, 1)[0], 2.5f);
  // Overlapping windows: 3 -> 2 uses rows [0,2) and [1,3).
  const TensorF r({1, 1, 3}, {1, 2, 4});
  EXPECT_EQ(cond::adaptive_avg_pool(r, 1, 2).storage(), (std::vector<float>{1.5f, 3.0f}));
  EXPECT_EQ(kind_of([&] { cond::adaptive_avg_pool(q, 0, 1); }), ErrorKind::kParameter);
  EXPECT_EQ(kind_of([&] { cond::adaptive_avg_pool(q, 3, 1); }), ErrorKind::kParameter);
}

TEST(Pool, GlobalMeanPreserved) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_tensor({3, 7, 13}, rng);
    const auto p = cond::adaptive_avg_pool(x, 1, 1);
    for (std::size_t c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < 91; ++i) sum += x[c * 91 + i];
      EXPECT_NEAR(p[c], sum / 91.0, 1e-6);
    }
  }
}

TEST(Lstm, HandComputedSteps) {
  // hidden = 1, one input channel, one location, two steps.
  cond::WeightStore w;
  w.set("lstm.w_ih", TensorF({4, 1}, {0.5f, -0.25f, 1.0f, 0.75f}));
  w.set("lstm.w_hh", TensorF({4, 1}, {0.125f, 0.5f, -0.5f, 0.25f}));
  w.set("lstm.b_ih", TensorF({4}, {0.0f, 1.0f, 0.0f, 0.0f}));
  w.set("lstm.b_hh", TensorF({4}, {0.25f, 0.0f, 0.0f, -0.5f}));
  const TensorF x({2, 1, 1, 1}, {1.0f, -2.0f});
  const auto out = cond::lstm_over_time(x, 1, w);

  double h = 0.0, c = 0.0;
  std::vector<double> expected;
  for (double in : {1.0, -2.0}) {
    const double i = sigmoid(0.5 * in + 0.125 * h + 0.25);
    const double f = sigmoid(-0.25 * in + 0.5 * h + 1.0);
    const double g = std::tanh(1.0 * in - 0.5 * h);
    const double o = sigmoid(0.75 * in + 0.25 * h - 0.5);
    c = f * c + i * g;
    h = o * std::tanh(c);
    expected.push_back(h);
  }
  EXPECT_NEAR(out[0], expected[0], 1e-7);
  EXPECT_NEAR(out[1], expected[1], 1e-7);
  // Step one from zero state: i = sigmoid(0.75), g = tanh(1), o = sigmoid(0.25).
  EXPECT_NEAR(out[0], sigmoid(0.25) * std::tanh(sigmoid(0.75) * std::tanh(1.0)), 1e-7);
}

TEST(Encoder, ReferenceShapesAt256) {
  const auto cfg = cond::MapEncoderConfig::reference();
  cond::ConditioningStack s{TensorF({32, 2, 256, 256}, 0.25f), 8.0};
  const auto feats = cond::map_encoder_forward(s, cfg, cond::WeightStore::zeros(cfg));
  ASSERT_EQ(feats.size(), 8u);
  for (const auto& [site, shape] : cfg.sites) {
    EXPECT_EQ(feats.at(site).shape(),
              (con360::Shape{32, shape.channels, shape.height, shape.width}))
        << site.name();
    for (float v : feats.at(site).data()) ASSERT_EQ(v, 0.0f);
  }
  EXPECT_EQ(feats.at({cond::Branch::kVideo, cond::SiteLevel::kDown3}).shape(),
            (con360::Shape{32, 128, 8, 8}));
  EXPECT_EQ(feats.at({cond::Branch::kVideo, cond::SiteLevel::kDown4}).shape(),
            (con360::Shape{32, 128, 4, 4}));
}

TEST(Encoder, RejectsSmallInputAndBadWeights) {
  const auto cfg = cond::MapEncoderConfig::reference();
  cond::ConditioningStack s{TensorF({1, 2, 64, 128}), 8.0};
  EXPECT_EQ(kind_of([&] { cond::map_encoder_forward(s, cfg, cond::WeightStore::zeros(cfg)); }),
            ErrorKind::kConfiguration);
  auto w = cond::WeightStore::zeros(tiny_config());
  w.set("lstm.w_hh", TensorF({1, 1}));
  cond::ConditioningStack ok{TensorF({1, 2, 16, 16}), 8.0};
  EXPECT_EQ(kind_of([&] { cond::map_encoder_forward(ok, tiny_config(), w); }),
            ErrorKind::kConfiguration);
}

TEST(Encoder, TimeOrderMatters) {
  const auto cfg = tiny_config();
  const auto w = cond::WeightStore::random(cfg, 42, 0.5);
  std::mt19937_64 rng(1);
  const auto x = random_tensor({4, 2, 16, 16}, rng, 0, 1);
  TensorF rev(x.shape());
  for (std::size_t t = 0; t < 4; ++t) {
    std::ranges::copy(x.slab(3 - t), rev.slab(t).begin());
  }
  const auto a = cond::map_encoder_forward({x, 8.0}, cfg, w);
  const auto b = cond::map_encoder_forward({rev, 8.0}, cfg, w);
  const cond::InjectionSite site{cond::Branch::kVideo, cond::SiteLevel::kDown3};
  // The last output of the reversed clip sees the frames in the other order.
  const auto last_a = a.at(site).slab(3);
  const auto last_b = b.at(site).slab(3);
  EXPECT_FALSE(std::equal(last_a.begin(), last_a.end(), last_b.begin()));
  EXPECT_EQ(cond::map_encoder_forward({x, 8.0}, cfg, w), a);
}

TEST(Weights, SaveLoadRoundTrip) {
  con360::testing::TempDir dir("weights");
  const auto cfg = tiny_config();
  const auto w = cond::WeightStore::random(cfg, 9, 0.2);
  w.save(dir.path() / "w", cfg);
  const auto [loaded, lcfg] = cond::WeightStore::load(dir.path() / "w");
  EXPECT_EQ(lcfg, cfg);
  EXPECT_EQ(loaded.params(), w.params());
  EXPECT_EQ(cond::WeightStore::random(cfg, 9, 0.2).params(), w.params());
  EXPECT_NE(cond::WeightStore::random(cfg, 10, 0.2).params(), w.params());
}

TEST(Weights, ExpectedShapes) {
  const auto shapes = cond::WeightStore::expected_shapes(cond::MapEncoderConfig::reference());
  EXPECT_EQ(shapes.at("conv0.weight"), (con360::Shape{16, 2, 3, 3}));
  EXPECT_EQ(shapes.at("lstm.w_ih"), (con360::Shape{256, 64}));
  EXPECT_EQ(shapes.at("lstm.w_hh"), (con360::Shape{256, 64}));
  EXPECT_EQ(shapes.at("proj.video.down3.weight"), (con360::Shape{128, 64}));
  EXPECT_EQ(shapes.at("film.video.down3.weight"), (con360::Shape{2560, 128}));
  EXPECT_EQ(shapes.at("film.audio.up1.bias"), (con360::Shape{1280}));
  auto w = cond::WeightStore::zeros(cond::MapEncoderConfig::reference());
  EXPECT_EQ(kind_of([&] { w.get("conv0.weight", {1, 2, 3, 3}); }), ErrorKind::kConfiguration);
  EXPECT_EQ(kind_of([&] { w.get("nope"); }), ErrorKind::kConfiguration);
}

TEST(Film, ZeroWeightsAreBitwiseIdentityAtEverySite) {
  const auto cfg = cond::MapEncoderConfig::reference();
  const auto zeros = cond::WeightStore::zeros(cfg);
  std::mt19937_64 rng(2024);
  for (const auto& [site, s] : cfg.sites) {
    const auto feats = random_tensor({2, s.channels, s.height, s.width}, rng, -3, 3);
    const auto params = cond::film_params(feats, site, cfg, zeros);
    ASSERT_EQ(params.size(), 2u);
    EXPECT_EQ(params[0].gamma_hat.size(), s.target_channels);
    auto h = random_tensor({s.target_channels, s.height, s.width}, rng, -10, 10);
    h[0] = -0.0f;
    h[1] = std::numeric_limits<float>::denorm_min();
    for (const auto& p : params) {
      const auto out = cond::film_apply(h, p);
      ASSERT_EQ(out.size(), h.size());
      for (std::size_t i = 0; i < h.size(); ++i) {
        ASSERT_EQ(std::bit_cast<std::uint32_t>(out[i]), std::bit_cast<std::uint32_t>(h[i]))
            << site.name() << " " << i;
      }
    }
    const auto pooled = cond::pool_film_params(params);
    EXPECT_EQ(cond::film_apply(h, pooled), h);
  }
}

TEST(Film, ExamplesAndComposition) {
  const TensorD h({2, 3}, {1, 2, 3, -1, -2, -3});
  cond::FilmParams p{{}, {-1.0, -1.0}, {4.0, 5.0}};
  EXPECT_EQ(cond::film_apply(h, p).storage(), (std::vector<double>{4, 4, 4, 5, 5, 5}));

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1, 1);
  const cond::FilmParams p1{{}, {d(rng), d(rng)}, {d(rng), d(rng)}};
  const cond::FilmParams p2{{}, {d(rng), d(rng)}, {d(rng), d(rng)}};
  cond::FilmParams both{{}, {0, 0}, {0, 0}};
  for (std::size_t c = 0; c < 2; ++c) {
    const double a1 = 1 + p1.gamma_hat[c], a2 = 1 + p2.gamma_hat[c];
    both.gamma_hat[c] = a1 * a2 - 1;
    both.beta_hat[c] = a2 * p1.beta_hat[c] + p2.beta_hat[c];
  }
  const auto twice = cond::film_apply(cond::film_apply(h, p1), p2);
  const auto once = cond::film_apply(h, both);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(twice[i], once[i], 1e-12);
  EXPECT_EQ(kind_of([&] { cond::film_apply(TensorD({3, 2}), p1); }), ErrorKind::kShape);
}

TEST(Film, ZeroInputZeroBiasGivesZeros) {
  const auto cfg = tiny_config();
  auto w = cond::WeightStore::random(cfg, 5, 0.3);
  const cond::InjectionSite site{cond::Branch::kVideo, cond::SiteLevel::kDown3};
  w.set("film.video.down3.bias", TensorF({14}));
  const auto p = cond::film_params(TensorF({1, 6, 2, 2}), site, cfg, w);
  EXPECT_EQ(p[0].gamma_hat, std::vector<double>(7, 0.0));
  EXPECT_EQ(p[0].beta_hat, std::vector<double>(7, 0.0));
}

TEST(Film, FiniteDifferenceMatchesChainRule) {
  const auto cfg = tiny_config();
  const cond::InjectionSite site{cond::Branch::kVideo, cond::SiteLevel::kDown3};
  const auto& s = cfg.sites.at(site);
  std::mt19937_64 rng(77);
  auto w = cond::WeightStore::random(cfg, 3, 0.5);
  const auto feats = random_tensor({1, s.channels, s.height, s.width}, rng);
  TensorD h({s.target_channels, 3, 4});
  std::uniform_real_distribution<double> d(-2, 2);
  for (auto& v : h.data()) v = d(rng);

  auto objective = [&](const cond::WeightStore& ws) {
    const auto out = cond::film_apply(h, cond::film_params(feats, site, cfg, ws)[0]);
    double sum = 0.0;
    for (double v : out.data()) sum += v;
    return sum / static_cast<double>(out.size());
  };

  std::vector<double> mean(s.channels, 0.0);
  const std::size_t cells = s.height * s.width;
  for (std::size_t c = 0; c < s.channels; ++c) {
    for (std::size_t p = 0; p < cells; ++p) mean[c] += feats[c * cells + p];
    mean[c] /= static_cast<double>(cells);
  }
  const double n = static_cast<double>(h.size());
  const std::size_t per = h.size() / s.target_channels;
  const float step = 1.0f / 1024.0f;
  const std::string name = "film." + site.name() + ".weight";
  for (std::size_t r = 0; r < 2 * s.target_channels; ++r) {
    double channel_sum = 0.0;
    const std::size_t c = r % s.target_channels;
    for (std::size_t i = c * per; i < (c + 1) * per; ++i) channel_sum += h[i];
    for (std::size_t k = 0; k < s.channels; ++k) {
      const double analytic =
          (r < s.target_channels ? channel_sum : static_cast<double>(per)) * mean[k] / n;
      auto plus = w, minus = w;
      auto wp = w.get(name), wm = w.get(name);
      wp[r * s.channels + k] += step;
      wm[r * s.channels + k] -= step;
      plus.set(name, wp);
      minus.set(name, wm);
      const double numeric = (objective(plus) - objective(minus)) / (2.0 * step);
      EXPECT_NEAR(numeric, analytic, 1e-5 * std::max(1.0, std::abs(analytic))) << r << "," << k;
    }
  }
}
