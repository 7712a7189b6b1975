#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "retexkit/flow.hpp"
#include "retexkit/image.hpp"
#include "retexkit/morphology.hpp"

namespace retexkit {

enum class PixelScale { unit_0_1, eight_bit_0_255 };

inline double pixel_max(PixelScale s) { return s == PixelScale::eight_bit_0_255 ? 255.0 : 1.0; }

struct MetricsConfig {
  int dilation_radius = 16;
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  PixelScale pixel_scale = PixelScale::eight_bit_0_255;
  FlowParams ewarp;
};

inline constexpr double kPsnrCap = 99.0;

// 10 log10(max^2 / mse), or kPsnrCap when mse == 0.
double psnr_from_mse(double mse, double max_value);

struct BackgroundScores {
  double mse = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  int frames = 0;
};

// Structural similarity of single-channel images (values in the given scale) averaged over
// pixels where region == 1. Window statistics use Gaussian weights restricted to region
// pixels, so pixels outside the region never influence the score.
double masked_ssim(const Image& a, const Image& b, const Mask& region, const MetricsConfig& cfg);

// Region = complement of the dilated mask in each frame. MSE over region pixels (all RGB
// channels, pixel_scale units) and SSIM on luma are averaged over frames; PSNR is derived
// from the averaged MSE. Throws DomainError when a frame has no background pixels.
BackgroundScores background_metrics(const VideoClip& src, const VideoClip& edited, const MaskClip& mask,
                                    const MetricsConfig& cfg);

// Tight bounding box of the mask, resized bilinearly to target size. Throws on an empty mask.
Image foreground_crop(const Image& image, const Mask& mask, int target_width, int target_height);
VideoClip foreground_crop(const VideoClip& clip, const MaskClip& mask, int target_width, int target_height);

// a.b / (|a| |b|). Throws on length mismatch, empty input or a zero norm.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Externally computed embeddings. Keys are "<slot>/edited" and "<slot>/reference" for the
// foreground slots (clip, dino, lpips, dream); "background/lpips" holds a precomputed
// one-element background LPIPS value.
using EmbeddingSet = std::map<std::string, std::vector<double>>;

// JSON object {key: [float, ...]} or an RTK1 tensor with two frames (edited, reference) of
// width D whose slot name is the file stem.
EmbeddingSet load_embeddings(const std::filesystem::path& path);

inline const std::vector<std::string> kForegroundSlots{"clip", "dino", "lpips", "dream"};

struct MetricsReport {
  BackgroundScores background;
  std::optional<double> background_lpips;
  std::map<std::string, std::optional<double>> foreground;  // one entry per kForegroundSlots
  std::optional<double> ewarp;                               // 1e-3 units; null for single frames
  int dilation = 0;
  int frames_evaluated = 0;
  double pixel_max = 255.0;
  int reference_width = 0;
  int reference_height = 0;
};

// Background block, foreground cosine slots from the embeddings (null when absent), and EWarp
// of the edited clip.
MetricsReport evaluate(const VideoClip& src, const VideoClip& edited, const MaskClip& mask, const Image& reference,
                       const EmbeddingSet* embeddings, const MetricsConfig& cfg);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

// Checks field presence and types of a serialized report; returns a list of problems.
std::vector<std::string> validate_report_json(const nlohmann::json& j);

}  // namespace retexkit
