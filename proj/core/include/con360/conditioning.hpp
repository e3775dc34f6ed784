#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "con360/tensor.hpp"

// Model-facing control tensor plus a reference forward pass of the map
// encoder (conv stack -> per-location LSTM over time -> adaptive pooling ->
// 1x1 projection) and FiLM modulation at the U-Net injection sites.
//
// FiLM sits between the cross-modal attention block and the following spatial
// self-attention block of each U-Net; this library only fixes the site
// contract, the U-Nets themselves live in the trainer.
namespace con360::conditioning {

enum class Branch { kAudio, kVideo };
enum class SiteLevel { kDown3, kDown4, kUp1, kUp2 };

struct InjectionSite {
  Branch branch = Branch::kVideo;
  SiteLevel level = SiteLevel::kDown3;

  std::string name() const;  // e.g. "video.down3"
  auto operator<=>(const InjectionSite&) const = default;
};

// Throws kConfiguration for an unknown name.
InjectionSite site_from_name(std::string_view name);

inline constexpr std::array<InjectionSite, 8> kInjectionSites = {{
    {Branch::kAudio, SiteLevel::kDown3}, {Branch::kAudio, SiteLevel::kDown4},
    {Branch::kAudio, SiteLevel::kUp1},   {Branch::kAudio, SiteLevel::kUp2},
    {Branch::kVideo, SiteLevel::kDown3}, {Branch::kVideo, SiteLevel::kDown4},
    {Branch::kVideo, SiteLevel::kUp1},   {Branch::kVideo, SiteLevel::kUp2},
}};

struct SiteShape {
  std::size_t channels = 0;         // encoder feature channels at the site
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t target_channels = 0;  // U-Net feature channels FiLM modulates

  bool operator==(const SiteShape&) const = default;
};

// Convolutions use zero padding kernel / 2 and are followed by ReLU.
struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  std::size_t stride = 2;

  bool operator==(const ConvSpec&) const = default;
};

struct MapEncoderConfig {
  std::vector<ConvSpec> convs;
  std::size_t lstm_hidden = 64;
  std::map<InjectionSite, SiteShape> sites;

  // 2->16->32->64 (k3, s2), LSTM hidden 64, all eight sites.
  static MapEncoderConfig reference();

  // Throws kConfiguration unless the conv chain starts at 2 channels, chains
  // consistently, and every injection site has a non-degenerate shape.
  void validate() const;

  // Spatial size after the conv stack for an input of in_h x in_w.
  std::pair<std::size_t, std::size_t> encoded_size(std::size_t in_h, std::size_t in_w) const;

  bool operator==(const MapEncoderConfig&) const = default;
};

struct ConditioningStack {
  TensorF tensor;  // (T, 2, H, W); channel 0 saliency, channel 1 BASD
  double fps = 8.0;
};

// Per-frame min-max normalization of a (T, H, W) tensor.
TensorF normalize_frames(const TensorF& maps);

// Throws kShape on mismatched (T, H, W) inputs and kDomain when a value lies
// outside [0, 1].
ConditioningStack stack_maps(const TensorF& saliency, const TensorF& basd, double fps);

// Named parameter tensors. Names: conv{i}.weight (out, in, k, k), conv{i}.bias,
// lstm.w_ih (4H, in), lstm.w_hh (4H, H), lstm.b_ih, lstm.b_hh (gate order i,
// f, g, o), proj.<site>.weight (C_site, H), proj.<site>.bias,
// film.<site>.weight (2 * C_target, C_site), film.<site>.bias.
class WeightStore {
 public:
  static WeightStore zeros(const MapEncoderConfig& cfg);
  // Uniform(-scale, scale) draws from a seeded mt19937_64.
  static WeightStore random(const MapEncoderConfig& cfg, std::uint64_t seed,
                            double scale = 0.1);

  static std::map<std::string, Shape> expected_shapes(const MapEncoderConfig& cfg);

  // Throws kConfiguration when a parameter is missing or mis-shaped.
  const TensorF& get(const std::string& name, const Shape& shape) const;
  const TensorF& get(const std::string& name) const;
  void set(const std::string& name, TensorF value);
  bool contains(const std::string& name) const { return params_.contains(name); }
  const std::map<std::string, TensorF>& params() const noexcept { return params_; }

  // Throws kConfiguration unless every expected parameter exists with its shape.
  void check(const MapEncoderConfig& cfg) const;

  // Directory layout: index.json (config + parameter table) and one NPY file
  // per parameter.
  void save(const std::filesystem::path& dir, const MapEncoderConfig& cfg) const;
  static std::pair<WeightStore, MapEncoderConfig> load(const std::filesystem::path& dir);

 private:
  std::map<std::string, TensorF> params_;
};

std::string config_to_json(const MapEncoderConfig& cfg);
MapEncoderConfig config_from_json(const std::string& text);

// Single-frame convolution of (C_in, H, W) with ReLU.
TensorF conv2d_relu(const TensorF& input, const ConvSpec& spec, const TensorF& weight,
                    const TensorF& bias);

// (C, h, w) -> (C, out_h, out_w); window rows [floor(i*h/oh), ceil((i+1)*h/oh)).
// Throws kParameter for zero or enlarging output sizes.
TensorF adaptive_avg_pool(const TensorF& x, std::size_t out_h, std::size_t out_w);

// One unidirectional LSTM layer over the leading (time) axis of a
// (T, C, h, w) tensor, run independently at each spatial location with zero
// initial state. Returns (T, hidden, h, w).
TensorF lstm_over_time(const TensorF& x, std::size_t hidden, const WeightStore& weights);

using SiteFeatures = std::map<InjectionSite, TensorF>;

// Returns (T, C_site, h_site, w_site) per site.
SiteFeatures map_encoder_forward(const ConditioningStack& stack, const MapEncoderConfig& cfg,
                                 const WeightStore& weights);

struct FilmParams {
  InjectionSite site;
  std::vector<double> gamma_hat;
  std::vector<double> beta_hat;
};

// Spatial mean of each frame's (C_site, h, w) features, then
// film.<site>.weight * mean + film.<site>.bias split into (gamma_hat, beta_hat).
std::vector<FilmParams> film_params(const TensorF& site_features, InjectionSite site,
                                    const MapEncoderConfig& cfg, const WeightStore& weights);

// Mean over frames, for trainers that inject one modulation per clip.
FilmParams pool_film_params(const std::vector<FilmParams>& per_frame);

// out[c] = (1 + gamma_hat[c]) * h[c] + beta_hat[c] for h shaped (C, ...).
// Throws kShape when the channel count differs.
template <typename T>
Tensor<T> film_apply(const Tensor<T>& h, const FilmParams& p);

extern template TensorF film_apply(const TensorF&, const FilmParams&);
extern template TensorD film_apply(const TensorD&, const FilmParams&);

}  // namespace con360::conditioning
