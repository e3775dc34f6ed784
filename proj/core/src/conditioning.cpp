#include "con360/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "con360/io.hpp"
#include "con360/parallel.hpp"
#include "con360/saliency.hpp"

namespace con360::conditioning {
namespace {

using nlohmann::json;

std::string_view branch_name(Branch b) { return b == Branch::kAudio ? "audio" : "video"; }

std::string_view level_name(SiteLevel l) {
  switch (l) {
    case SiteLevel::kDown3: return "down3";
    case SiteLevel::kDown4: return "down4";
    case SiteLevel::kUp1: return "up1";
    case SiteLevel::kUp2: return "up2";
  }
  return "";
}

[[noreturn]] void config_error(const std::string& what) {
  raise(ErrorKind::kConfiguration, what);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::size_t conv_out(std::size_t in, const ConvSpec& spec) {
  const std::size_t pad = spec.kernel / 2;
  if (in + 2 * pad < spec.kernel) return 0;
  return (in + 2 * pad - spec.kernel) / spec.stride + 1;
}

}  // namespace

std::string InjectionSite::name() const {
  return std::string(branch_name(branch)) + "." + std::string(level_name(level));
}

InjectionSite site_from_name(std::string_view name) {
  for (const auto& site : kInjectionSites) {
    if (site.name() == name) return site;
  }
  config_error("unknown injection site '" + std::string(name) + "'");
}

MapEncoderConfig MapEncoderConfig::reference() {
  MapEncoderConfig cfg;
  cfg.convs = {{2, 16, 3, 2}, {16, 32, 3, 2}, {32, 64, 3, 2}};
  cfg.lstm_hidden = 64;
  // Video sites follow a 32x32 latent (256x256 frames), audio sites a 16-bin
  // by 100-step mel latent; both are overridable through the config file.
  const std::size_t video_c = 1280;
  const std::size_t audio_c = 640;
  cfg.sites[{Branch::kVideo, SiteLevel::kDown3}] = {128, 8, 8, video_c};
  cfg.sites[{Branch::kVideo, SiteLevel::kDown4}] = {128, 4, 4, video_c};
  cfg.sites[{Branch::kVideo, SiteLevel::kUp1}] = {128, 4, 4, video_c};
  cfg.sites[{Branch::kVideo, SiteLevel::kUp2}] = {128, 8, 8, video_c};
  cfg.sites[{Branch::kAudio, SiteLevel::kDown3}] = {128, 4, 25, audio_c};
  cfg.sites[{Branch::kAudio, SiteLevel::kDown4}] = {128, 2, 13, audio_c};
  cfg.sites[{Branch::kAudio, SiteLevel::kUp1}] = {128, 2, 13, audio_c};
  cfg.sites[{Branch::kAudio, SiteLevel::kUp2}] = {128, 4, 25, audio_c};
  return cfg;
}

void MapEncoderConfig::validate() const {
  if (convs.empty()) config_error("map encoder needs at least one convolution");
  if (convs.front().in_channels != 2) {
    config_error("first convolution must take the 2-channel stack");
  }
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    if (c.out_channels == 0 || c.kernel == 0 || c.stride == 0) {
      config_error("conv" + std::to_string(i) + " has a zero dimension");
    }
    if (i > 0 && c.in_channels != convs[i - 1].out_channels) {
      config_error("conv" + std::to_string(i) + " input channels do not chain");
    }
  }
  if (lstm_hidden == 0) config_error("lstm_hidden must be >= 1");
  for (const auto& site : kInjectionSites) {
    const auto it = sites.find(site);
    if (it == sites.end()) config_error("no shape for injection site " + site.name());
    const SiteShape& s = it->second;
    if (s.channels == 0 || s.height == 0 || s.width == 0 || s.target_channels == 0) {
      config_error("degenerate shape for injection site " + site.name());
    }
  }
  if (sites.size() != kInjectionSites.size()) config_error("unexpected extra injection sites");
}

std::pair<std::size_t, std::size_t> MapEncoderConfig::encoded_size(std::size_t in_h,
                                                                   std::size_t in_w) const {
  for (const auto& c : convs) {
    in_h = conv_out(in_h, c);
    in_w = conv_out(in_w, c);
  }
  return {in_h, in_w};
}

TensorF normalize_frames(const TensorF& maps) {
  if (maps.rank() != 3) {
    raise(ErrorKind::kShape, "expected a (T, H, W) tensor, got " + shape_to_string(maps.shape()));
  }
  TensorF out(maps.shape());
  parallel_for(maps.dim(0), [&](std::size_t t) {
    const auto normalized = saliency::minmax_normalize(maps.slab(t));
    std::ranges::copy(normalized, out.slab(t).begin());
  });
  return out;
}

ConditioningStack stack_maps(const TensorF& saliency, const TensorF& basd, double fps) {
  if (saliency.rank() != 3 || saliency.shape() != basd.shape()) {
    raise(ErrorKind::kShape, "stack inputs must share one (T, H, W) shape, got " +
                                 shape_to_string(saliency.shape()) + " and " +
                                 shape_to_string(basd.shape()));
  }
  for (const TensorF* t : {&saliency, &basd}) {
    for (float v : t->data()) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        raise(ErrorKind::kDomain, "stack inputs must be min-max normalized to [0, 1]");
      }
    }
  }
  const std::size_t frames = saliency.dim(0);
  const std::size_t h = saliency.dim(1);
  const std::size_t w = saliency.dim(2);
  ConditioningStack stack{TensorF({frames, 2, h, w}), fps};
  for (std::size_t t = 0; t < frames; ++t) {
    auto dst = stack.tensor.slab(t);
    std::ranges::copy(saliency.slab(t), dst.begin());
    std::ranges::copy(basd.slab(t), dst.begin() + static_cast<std::ptrdiff_t>(h * w));
  }
  return stack;
}

std::map<std::string, Shape> WeightStore::expected_shapes(const MapEncoderConfig& cfg) {
  cfg.validate();
  std::map<std::string, Shape> shapes;
  for (std::size_t i = 0; i < cfg.convs.size(); ++i) {
    const auto& c = cfg.convs[i];
    shapes["conv" + std::to_string(i) + ".weight"] = {c.out_channels, c.in_channels, c.kernel,
                                                      c.kernel};
    shapes["conv" + std::to_string(i) + ".bias"] = {c.out_channels};
  }
  const std::size_t in = cfg.convs.back().out_channels;
  const std::size_t h = cfg.lstm_hidden;
  shapes["lstm.w_ih"] = {4 * h, in};
  shapes["lstm.w_hh"] = {4 * h, h};
  shapes["lstm.b_ih"] = {4 * h};
  shapes["lstm.b_hh"] = {4 * h};
  for (const auto& [site, s] : cfg.sites) {
    shapes["proj." + site.name() + ".weight"] = {s.channels, h};
    shapes["proj." + site.name() + ".bias"] = {s.channels};
    shapes["film." + site.name() + ".weight"] = {2 * s.target_channels, s.channels};
    shapes["film." + site.name() + ".bias"] = {2 * s.target_channels};
  }
  return shapes;
}

WeightStore WeightStore::zeros(const MapEncoderConfig& cfg) {
  WeightStore store;
  for (auto& [name, shape] : expected_shapes(cfg)) store.params_[name] = TensorF(shape, 0.0f);
  return store;
}

WeightStore WeightStore::random(const MapEncoderConfig& cfg, std::uint64_t seed, double scale) {
  WeightStore store;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& [name, shape] : expected_shapes(cfg)) {
    TensorF t(shape);
    for (float& v : t.data()) v = static_cast<float>(dist(rng));
    store.params_[name] = std::move(t);
  }
  return store;
}

const TensorF& WeightStore::get(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) config_error("missing weight '" + name + "'");
  return it->second;
}

const TensorF& WeightStore::get(const std::string& name, const Shape& shape) const {
  const TensorF& t = get(name);
  if (t.shape() != shape) {
    config_error("weight '" + name + "' has shape " + shape_to_string(t.shape()) +
                 ", expected " + shape_to_string(shape));
  }
  return t;
}

void WeightStore::set(const std::string& name, TensorF value) {
  params_[name] = std::move(value);
}

void WeightStore::check(const MapEncoderConfig& cfg) const {
  for (const auto& [name, shape] : expected_shapes(cfg)) get(name, shape);
}

std::string config_to_json(const MapEncoderConfig& cfg) {
  json j;
  j["convs"] = json::array();
  for (const auto& c : cfg.convs) {
    j["convs"].push_back({{"in_channels", c.in_channels},
                          {"out_channels", c.out_channels},
                          {"kernel", c.kernel},
                          {"stride", c.stride}});
  }
  j["lstm_hidden"] = cfg.lstm_hidden;
  j["sites"] = json::object();
  for (const auto& [site, s] : cfg.sites) {
    j["sites"][site.name()] = {{"channels", s.channels},
                               {"height", s.height},
                               {"width", s.width},
                               {"target_channels", s.target_channels}};
  }
  return j.dump(2) + "\n";
}

MapEncoderConfig config_from_json(const std::string& text) {
  MapEncoderConfig cfg;
  try {
    const json j = json::parse(text);
    for (const auto& c : j.at("convs")) {
      cfg.convs.push_back({c.at("in_channels").get<std::size_t>(),
                           c.at("out_channels").get<std::size_t>(),
                           c.at("kernel").get<std::size_t>(), c.at("stride").get<std::size_t>()});
    }
    cfg.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
    for (const auto& [name, s] : j.at("sites").items()) {
      cfg.sites[site_from_name(name)] = {
          s.at("channels").get<std::size_t>(), s.at("height").get<std::size_t>(),
          s.at("width").get<std::size_t>(), s.at("target_channels").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    config_error(std::string("invalid encoder config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void WeightStore::save(const std::filesystem::path& dir, const MapEncoderConfig& cfg) const {
  check(cfg);
  json index;
  index["format"] = "con360-weights";
  index["version"] = 1;
  index["config"] = json::parse(config_to_json(cfg));
  index["params"] = json::array();
  for (const auto& [name, tensor] : params_) {
    const std::string file = name + ".npy";
    io::write_npy(tensor, dir / file);
    index["params"].push_back({{"name", name}, {"file", file}, {"shape", tensor.shape()}});
  }
  io::write_text_atomic(dir / "index.json", index.dump(2) + "\n");
}

std::pair<WeightStore, MapEncoderConfig> WeightStore::load(const std::filesystem::path& dir) {
  const auto bytes = io::read_file(dir / "index.json");
  json index;
  try {
    index = json::parse(bytes.begin(), bytes.end());
    if (index.at("format") != "con360-weights" || index.at("version") != 1) {
      config_error("unsupported weight container format/version");
    }
  } catch (const json::exception& e) {
    config_error(std::string("invalid weight index: ") + e.what());
  }
  const MapEncoderConfig cfg = config_from_json(index.at("config").dump());
  WeightStore store;
  for (const auto& p : index.at("params")) {
    const auto name = p.at("name").get<std::string>();
    const auto shape = p.at("shape").get<Shape>();
    TensorF t = io::read_npy_float(dir / p.at("file").get<std::string>());
    if (t.shape() != shape) config_error("weight file for '" + name + "' disagrees with index");
    store.params_[name] = std::move(t);
  }
  store.check(cfg);
  return {std::move(store), cfg};
}

TensorF conv2d_relu(const TensorF& input, const ConvSpec& spec, const TensorF& weight,
                    const TensorF& bias) {
  if (input.rank() != 3 || input.dim(0) != spec.in_channels) {
    raise(ErrorKind::kShape, "conv input " + shape_to_string(input.shape()) +
                                 " does not match " + std::to_string(spec.in_channels) +
                                 " channels");
  }
  const std::size_t h = input.dim(1);
  const std::size_t w = input.dim(2);
  const std::size_t oh = conv_out(h, spec);
  const std::size_t ow = conv_out(w, spec);
  if (oh == 0 || ow == 0) config_error("conv input too small for its kernel");
  const std::size_t k = spec.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  TensorF out({spec.out_channels, oh, ow});
  const auto x = input.data();
  const auto wt = weight.data();
  for (std::size_t co = 0; co < spec.out_channels; ++co) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = bias[co];
        const auto y0 = static_cast<std::ptrdiff_t>(oy * spec.stride) - pad;
        const auto x0 = static_cast<std::ptrdiff_t>(ox * spec.stride) - pad;
        for (std::size_t ci = 0; ci < spec.in_channels; ++ci) {
          const float* wk = &wt[((co * spec.in_channels) + ci) * k * k];
          const float* plane = &x[ci * h * w];
          for (std::size_t ky = 0; ky < k; ++ky) {
            const auto yy = y0 + static_cast<std::ptrdiff_t>(ky);
            if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (std::size_t kx = 0; kx < k; ++kx) {
              const auto xx = x0 + static_cast<std::ptrdiff_t>(kx);
              if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(w)) continue;
              acc += static_cast<double>(wk[ky * k + kx]) *
                     plane[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
            }
          }
        }
        out[(co * oh + oy) * ow + ox] = static_cast<float>(std::max(acc, 0.0));
      }
    }
  }
  return out;
}

TensorF adaptive_avg_pool(const TensorF& x, std::size_t out_h, std::size_t out_w) {
  if (x.rank() != 3) raise(ErrorKind::kShape, "adaptive_avg_pool expects (C, h, w)");
  const std::size_t c = x.dim(0);
  const std::size_t h = x.dim(1);
  const std::size_t w = x.dim(2);
  if (out_h == 0 || out_w == 0) raise(ErrorKind::kParameter, "pool output dims must be >= 1");
  if (out_h > h || out_w > w) {
    raise(ErrorKind::kParameter, "pool output " + std::to_string(out_h) + "x" +
                                     std::to_string(out_w) + " exceeds input " +
                                     std::to_string(h) + "x" + std::to_string(w));
  }
  TensorF out({c, out_h, out_w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < out_h; ++i) {
      const std::size_t r0 = i * h / out_h;
      const std::size_t r1 = ((i + 1) * h + out_h - 1) / out_h;
      for (std::size_t j = 0; j < out_w; ++j) {
        const std::size_t c0 = j * w / out_w;
        const std::size_t c1 = ((j + 1) * w + out_w - 1) / out_w;
        double sum = 0.0;
        for (std::size_t r = r0; r < r1; ++r) {
          for (std::size_t cc = c0; cc < c1; ++cc) sum += x[(ch * h + r) * w + cc];
        }
        out[(ch * out_h + i) * out_w + j] =
            static_cast<float>(sum / static_cast<double>((r1 - r0) * (c1 - c0)));
      }
    }
  }
  return out;
}

TensorF lstm_over_time(const TensorF& x, std::size_t hidden, const WeightStore& weights) {
  if (x.rank() != 4) raise(ErrorKind::kShape, "LSTM input must be (T, C, h, w)");
  const std::size_t steps = x.dim(0);
  const std::size_t in = x.dim(1);
  const std::size_t h = x.dim(2);
  const std::size_t w = x.dim(3);
  const std::size_t g = 4 * hidden;
  const auto w_ih = weights.get("lstm.w_ih", {g, in}).data();
  const auto w_hh = weights.get("lstm.w_hh", {g, hidden}).data();
  const auto b_ih = weights.get("lstm.b_ih", {g}).data();
  const auto b_hh = weights.get("lstm.b_hh", {g}).data();
  TensorF out({steps, hidden, h, w});
  const std::size_t plane = h * w;

  parallel_for(plane, [&](std::size_t loc) {
    std::vector<double> state_h(hidden, 0.0), state_c(hidden, 0.0), gates(g), input(in);
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t ci = 0; ci < in; ++ci) input[ci] = x[(t * in + ci) * plane + loc];
      for (std::size_t r = 0; r < g; ++r) {
        double acc = static_cast<double>(b_ih[r]) + b_hh[r];
        const float* wi = &w_ih[r * in];
        for (std::size_t ci = 0; ci < in; ++ci) acc += wi[ci] * input[ci];
        const float* wh = &w_hh[r * hidden];
        for (std::size_t k = 0; k < hidden; ++k) acc += wh[k] * state_h[k];
        gates[r] = acc;
      }
      for (std::size_t k = 0; k < hidden; ++k) {
        const double i_gate = sigmoid(gates[k]);
        const double f_gate = sigmoid(gates[hidden + k]);
        const double g_gate = std::tanh(gates[2 * hidden + k]);
        const double o_gate = sigmoid(gates[3 * hidden + k]);
        state_c[k] = f_gate * state_c[k] + i_gate * g_gate;
        state_h[k] = o_gate * std::tanh(state_c[k]);
        out[(t * hidden + k) * plane + loc] = static_cast<float>(state_h[k]);
      }
    }
  });
  return out;
}

SiteFeatures map_encoder_forward(const ConditioningStack& stack, const MapEncoderConfig& cfg,
                                 const WeightStore& weights) {
  cfg.validate();
  weights.check(cfg);
  const TensorF& input = stack.tensor;
  if (input.rank() != 4 || input.dim(1) != 2) {
    raise(ErrorKind::kShape, "conditioning stack must be (T, 2, H, W), got " +
                                 shape_to_string(input.shape()));
  }
  const std::size_t steps = input.dim(0);
  const auto [eh, ew] = cfg.encoded_size(input.dim(2), input.dim(3));
  for (const auto& [site, s] : cfg.sites) {
    if (s.height > eh || s.width > ew) {
      config_error("site " + site.name() + " needs " + std::to_string(s.height) + "x" +
                   std::to_string(s.width) + " but the encoder yields " + std::to_string(eh) +
                   "x" + std::to_string(ew));
    }
  }

  const std::size_t feat_c = cfg.convs.back().out_channels;
  TensorF encoded({steps, feat_c, eh, ew});
  parallel_for(steps, [&](std::size_t t) {
    const auto frame_in = input.slab(t);
    TensorF x({2, input.dim(2), input.dim(3)},
              std::vector<float>(frame_in.begin(), frame_in.end()));
    for (std::size_t i = 0; i < cfg.convs.size(); ++i) {
      const auto& spec = cfg.convs[i];
      const std::string prefix = "conv" + std::to_string(i);
      x = conv2d_relu(x, spec,
                      weights.get(prefix + ".weight",
                                  {spec.out_channels, spec.in_channels, spec.kernel, spec.kernel}),
                      weights.get(prefix + ".bias", {spec.out_channels}));
    }
    std::ranges::copy(x.data(), encoded.slab(t).begin());
  });

  const TensorF temporal = lstm_over_time(encoded, cfg.lstm_hidden, weights);
  const std::size_t hidden = cfg.lstm_hidden;

  SiteFeatures features;
  for (const auto& [site, s] : cfg.sites) {
    const auto& proj_w = weights.get("proj." + site.name() + ".weight", {s.channels, hidden});
    const auto& proj_b = weights.get("proj." + site.name() + ".bias", {s.channels});
    TensorF out({steps, s.channels, s.height, s.width});
    parallel_for(steps, [&](std::size_t t) {
      const auto slab = temporal.slab(t);
      const TensorF pooled = adaptive_avg_pool(
          TensorF({hidden, eh, ew}, std::vector<float>(slab.begin(), slab.end())), s.height,
          s.width);
      const std::size_t cells = s.height * s.width;
      auto dst = out.slab(t);
      for (std::size_t co = 0; co < s.channels; ++co) {
        for (std::size_t p = 0; p < cells; ++p) {
          double acc = proj_b[co];
          for (std::size_t k = 0; k < hidden; ++k) {
            acc += static_cast<double>(proj_w[co * hidden + k]) * pooled[k * cells + p];
          }
          dst[co * cells + p] = static_cast<float>(acc);
        }
      }
    });
    features.emplace(site, std::move(out));
  }
  return features;
}

std::vector<FilmParams> film_params(const TensorF& site_features, InjectionSite site,
                                    const MapEncoderConfig& cfg, const WeightStore& weights) {
  const auto it = cfg.sites.find(site);
  if (it == cfg.sites.end()) config_error("no shape for injection site " + site.name());
  const SiteShape& s = it->second;
  if (site_features.rank() != 4 || site_features.dim(1) != s.channels) {
    raise(ErrorKind::kShape, "site features " + shape_to_string(site_features.shape()) +
                                 " do not carry " + std::to_string(s.channels) + " channels");
  }
  const std::size_t c_site = s.channels;
  const std::size_t c_target = s.target_channels;
  const auto wt = weights.get("film." + site.name() + ".weight", {2 * c_target, c_site}).data();
  const auto bias = weights.get("film." + site.name() + ".bias", {2 * c_target}).data();
  const std::size_t cells = site_features.dim(2) * site_features.dim(3);

  std::vector<FilmParams> out(site_features.dim(0));
  parallel_for(out.size(), [&](std::size_t t) {
    const auto frame = site_features.slab(t);
    std::vector<double> mean(c_site, 0.0);
    for (std::size_t c = 0; c < c_site; ++c) {
      double sum = 0.0;
      for (std::size_t p = 0; p < cells; ++p) sum += frame[c * cells + p];
      mean[c] = sum / static_cast<double>(cells);
    }
    FilmParams& p = out[t];
    p.site = site;
    p.gamma_hat.resize(c_target);
    p.beta_hat.resize(c_target);
    for (std::size_t r = 0; r < 2 * c_target; ++r) {
      double acc = bias[r];
      for (std::size_t c = 0; c < c_site; ++c) acc += static_cast<double>(wt[r * c_site + c]) * mean[c];
      (r < c_target ? p.gamma_hat[r] : p.beta_hat[r - c_target]) = acc;
    }
  });
  return out;
}

FilmParams pool_film_params(const std::vector<FilmParams>& per_frame) {
  if (per_frame.empty()) raise(ErrorKind::kShape, "no FiLM parameters to pool");
  FilmParams pooled = per_frame.front();
  std::ranges::fill(pooled.gamma_hat, 0.0);
  std::ranges::fill(pooled.beta_hat, 0.0);
  for (const auto& p : per_frame) {
    if (p.gamma_hat.size() != pooled.gamma_hat.size() || !(p.site == pooled.site)) {
      raise(ErrorKind::kShape, "FiLM parameters disagree across frames");
    }
    for (std::size_t c = 0; c < p.gamma_hat.size(); ++c) {
      pooled.gamma_hat[c] += p.gamma_hat[c];
      pooled.beta_hat[c] += p.beta_hat[c];
    }
  }
  const double n = static_cast<double>(per_frame.size());
  for (auto& v : pooled.gamma_hat) v /= n;
  for (auto& v : pooled.beta_hat) v /= n;
  return pooled;
}

template <typename T>
Tensor<T> film_apply(const Tensor<T>& h, const FilmParams& p) {
  if (h.rank() < 1 || h.dim(0) != p.gamma_hat.size() || p.beta_hat.size() != p.gamma_hat.size()) {
    raise(ErrorKind::kShape, "FiLM parameters for " + std::to_string(p.gamma_hat.size()) +
                                 " channels cannot modulate " + shape_to_string(h.shape()));
  }
  Tensor<T> out(h.shape());
  const std::size_t per_channel = h.size() / h.dim(0);
  for (std::size_t c = 0; c < h.dim(0); ++c) {
    const double scale = 1.0 + p.gamma_hat[c];
    const double shift = p.beta_hat[c];
    // A zero shift is skipped so signed zeros pass through unchanged.
    for (std::size_t i = c * per_channel; i < (c + 1) * per_channel; ++i) {
      const double scaled = scale * static_cast<double>(h[i]);
      out[i] = static_cast<T>(shift == 0.0 ? scaled : scaled + shift);
    }
  }
  return out;
}

template TensorF film_apply(const TensorF&, const FilmParams&);
template TensorD film_apply(const TensorD&, const FilmParams&);

}  // namespace con360::conditioning
