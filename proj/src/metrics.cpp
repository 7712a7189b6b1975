#include "retexkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "retexkit/clip_io.hpp"
#include "retexkit/error.hpp"
#include "retexkit/tensor_file.hpp"

namespace retexkit {

namespace fs = std::filesystem;
using nlohmann::json;

double psnr_from_mse(double mse, double max_value) {
  if (mse < 0.0 || !std::isfinite(mse)) throw DomainError("mse must be a non-negative finite number");
  if (mse == 0.0) return kPsnrCap;
  return 10.0 * std::log10(max_value * max_value / mse);
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int r = size / 2;
  for (int i = -r; i <= r; ++i) k[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  return k;
}

// Separable correlation with zero padding outside the frame.
std::vector<double> filter_zero_pad(const std::vector<double>& in, int w, int h, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(in.size(), 0.0);
  std::vector<double> out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < w) acc += k[static_cast<std::size_t>(i + r)] * in[static_cast<std::size_t>(y) * w + xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < h) acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

Image scaled_luma(const Image& img, double scale) {
  Image g = to_gray(img);
  for (float& v : g.data()) v = static_cast<float>(v * scale);
  return g;
}

Mask complement(const Mask& m) {
  Mask out = m;
  for (auto& v : out.data()) v = v ? 0 : 1;
  return out;
}

}  // namespace

double masked_ssim(const Image& a, const Image& b, const Mask& region, const MetricsConfig& cfg) {
  if (a.channels() != 1 || b.channels() != 1) throw ShapeError("masked_ssim expects single-channel images");
  if (a.width() != b.width() || a.height() != b.height() || a.width() != region.width() ||
      a.height() != region.height()) {
    throw ShapeError("masked_ssim inputs differ in size");
  }
  if (cfg.ssim_window < 1 || cfg.ssim_window % 2 == 0) throw ConfigError("ssim window must be odd and positive");
  if (!(cfg.ssim_sigma > 0.0)) throw ConfigError("ssim sigma must be positive");

  const int w = a.width();
  const int h = a.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> m(n), ma(n), mb(n), maa(n), mbb(n), mab(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = region.data()[i] ? 1.0 : 0.0;
    const double x = a.data()[i];
    const double y = b.data()[i];
    m[i] = mi;
    ma[i] = mi * x;
    mb[i] = mi * y;
    maa[i] = mi * x * x;
    mbb[i] = mi * y * y;
    mab[i] = mi * x * y;
  }
  const auto k = gaussian_kernel(cfg.ssim_window, cfg.ssim_sigma);
  const auto sm = filter_zero_pad(m, w, h, k);
  const auto sa = filter_zero_pad(ma, w, h, k);
  const auto sb = filter_zero_pad(mb, w, h, k);
  const auto saa = filter_zero_pad(maa, w, h, k);
  const auto sbb = filter_zero_pad(mbb, w, h, k);
  const auto sab = filter_zero_pad(mab, w, h, k);

  const double L = pixel_max(cfg.pixel_scale);
  const double c1 = (cfg.ssim_k1 * L) * (cfg.ssim_k1 * L);
  const double c2 = (cfg.ssim_k2 * L) * (cfg.ssim_k2 * L);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!region.data()[i]) continue;
    const double wsum = sm[i];
    const double mu_a = sa[i] / wsum;
    const double mu_b = sb[i] / wsum;
    const double var_a = saa[i] / wsum - mu_a * mu_a;
    const double var_b = sbb[i] / wsum - mu_b * mu_b;
    const double cov = sab[i] / wsum - mu_a * mu_b;
    const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
    const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
    total += num / den;
    ++count;
  }
  if (count == 0) throw DomainError("ssim region is empty");
  return total / static_cast<double>(count);
}

BackgroundScores background_metrics(const VideoClip& src, const VideoClip& edited, const MaskClip& mask,
                                    const MetricsConfig& cfg) {
  check_same_dims(src, edited, "source/edited");
  check_same_dims(src, mask, "source/mask");
  const double scale = pixel_max(cfg.pixel_scale);
  BackgroundScores out;
  double mse_total = 0.0;
  double ssim_total = 0.0;
  for (std::size_t f = 0; f < src.size(); ++f) {
    if (src[f].channels() != 3 || edited[f].channels() != 3) throw ShapeError("background metrics expect RGB frames");
    const Mask region = complement(dilate_mask(mask[f], cfg.dilation_radius));
    if (region.count() == 0) throw DomainError("frame " + std::to_string(f) + " has no background region");

    double sum = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < region.height(); ++y) {
      for (int x = 0; x < region.width(); ++x) {
        if (!region.at(x, y)) continue;
        for (int c = 0; c < 3; ++c) {
          const double d = (static_cast<double>(src[f].at(x, y, c)) - edited[f].at(x, y, c)) * scale;
          sum += d * d;
        }
        count += 3;
      }
    }
    mse_total += sum / static_cast<double>(count);
    ssim_total += masked_ssim(scaled_luma(src[f], scale), scaled_luma(edited[f], scale), region, cfg);
  }
  out.frames = static_cast<int>(src.size());
  out.mse = mse_total / out.frames;
  out.ssim = ssim_total / out.frames;
  out.psnr = psnr_from_mse(out.mse, scale);
  return out;
}

Image foreground_crop(const Image& image, const Mask& mask, int target_width, int target_height) {
  if (image.width() != mask.width() || image.height() != mask.height()) throw ShapeError("image and mask differ in size");
  if (target_width <= 0 || target_height <= 0) throw ConfigError("crop target size must be positive");
  const Rect box = foreground_bbox(mask);
  if (box.width == 0) throw DomainError("foreground mask is empty");
  return resize_bilinear(crop(image, box), target_width, target_height);
}

VideoClip foreground_crop(const VideoClip& clip, const MaskClip& mask, int target_width, int target_height) {
  check_same_dims(clip, mask, "foreground_crop");
  VideoClip out;
  out.reserve(clip.size());
  for (std::size_t f = 0; f < clip.size(); ++f) out.push_back(foreground_crop(clip[f], mask[f], target_width, target_height));
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) throw ShapeError("cosine similarity needs equal, non-zero lengths");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw DomainError("cosine similarity of a zero-norm vector");
  const double c = ab / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

EmbeddingSet load_embeddings(const fs::path& path) {
  EmbeddingSet set;
  if (path.extension() == ".rtk") {
    const Tensor4 t = read_tensor(path);
    if (t.num_frames != 2 || t.height != 1 || t.channels != 1 || t.width == 0) {
      throw ShapeError("embedding tensor must have shape (2, 1, D, 1): " + path.string());
    }
    const std::string slot = path.stem().string();
    set[slot + "/edited"].assign(t.data.begin(), t.data.begin() + t.width);
    set[slot + "/reference"].assign(t.data.begin() + t.width, t.data.end());
    return set;
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  try {
    const json j = json::parse(in);
    if (!j.is_object()) throw IoError("embedding file must hold a JSON object: " + path.string());
    for (const auto& [key, value] : j.items()) set[key] = value.get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw IoError("malformed embeddings " + path.string() + ": " + e.what());
  }
  return set;
}

MetricsReport evaluate(const VideoClip& src, const VideoClip& edited, const MaskClip& mask, const Image& reference,
                       const EmbeddingSet* embeddings, const MetricsConfig& cfg) {
  MetricsReport r;
  r.background = background_metrics(src, edited, mask, cfg);
  r.dilation = cfg.dilation_radius;
  r.frames_evaluated = r.background.frames;
  r.pixel_max = pixel_max(cfg.pixel_scale);
  r.reference_width = reference.width();
  r.reference_height = reference.height();

  for (const std::string& slot : kForegroundSlots) r.foreground[slot] = std::nullopt;
  if (embeddings) {
    for (const std::string& slot : kForegroundSlots) {
      const auto e = embeddings->find(slot + "/edited");
      const auto ref = embeddings->find(slot + "/reference");
      if (e == embeddings->end() && ref == embeddings->end()) continue;
      if (e == embeddings->end() || ref == embeddings->end()) {
        throw ConfigError("embedding slot '" + slot + "' needs both edited and reference vectors");
      }
      r.foreground[slot] = cosine_similarity(e->second, ref->second);
    }
    if (const auto bg = embeddings->find("background/lpips"); bg != embeddings->end()) {
      if (bg->second.size() != 1) throw ShapeError("background/lpips must hold exactly one value");
      r.background_lpips = bg->second[0];
    }
  }
  if (edited.size() >= 2) r.ewarp = ewarp(edited, cfg.ewarp);
  return r;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json to_json(const MetricsReport& r) {
  json fg = json::object();
  for (const std::string& slot : kForegroundSlots) {
    const auto it = r.foreground.find(slot);
    fg[slot + "_slot"] = it == r.foreground.end() ? json(nullptr) : opt(it->second);
  }
  return {
      {"background",
       {{"mse", r.background.mse}, {"psnr", r.background.psnr}, {"ssim", r.background.ssim}, {"lpips_slot", opt(r.background_lpips)}}},
      {"foreground", fg},
      {"motion", {{"ewarp", opt(r.ewarp)}}},
      {"metadata",
       {{"dilation", r.dilation},
        {"frames_evaluated", r.frames_evaluated},
        {"pixel_max", r.pixel_max},
        {"ewarp_unit", kEwarpUnit},
        {"reference_width", r.reference_width},
        {"reference_height", r.reference_height}}},
  };
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  try {
    const json& bg = j.at("background");
    r.background.mse = bg.at("mse").get<double>();
    r.background.psnr = bg.at("psnr").get<double>();
    r.background.ssim = bg.at("ssim").get<double>();
    r.background_lpips = opt_from(bg.at("lpips_slot"));
    for (const std::string& slot : kForegroundSlots) r.foreground[slot] = opt_from(j.at("foreground").at(slot + "_slot"));
    r.ewarp = opt_from(j.at("motion").at("ewarp"));
    const json& md = j.at("metadata");
    r.dilation = md.at("dilation").get<int>();
    r.frames_evaluated = md.at("frames_evaluated").get<int>();
    r.background.frames = r.frames_evaluated;
    r.pixel_max = md.at("pixel_max").get<double>();
    r.reference_width = md.value("reference_width", 0);
    r.reference_height = md.value("reference_height", 0);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed metrics report: ") + e.what());
  }
  return r;
}

std::vector<std::string> validate_report_json(const json& j) {
  std::vector<std::string> problems;
  auto need_object = [&](const char* key) -> const json* {
    if (!j.contains(key) || !j.at(key).is_object()) {
      problems.push_back(std::string("missing object '") + key + "'");
      return nullptr;
    }
    return &j.at(key);
  };
  auto need_number = [&](const json* obj, const std::string& key, bool nullable) {
    if (!obj) return;
    if (!obj->contains(key)) {
      problems.push_back("missing field '" + key + "'");
      return;
    }
    const json& v = obj->at(key);
    if (!(v.is_number() || (nullable && v.is_null()))) problems.push_back("field '" + key + "' has the wrong type");
  };
  const json* bg = need_object("background");
  need_number(bg, "mse", false);
  need_number(bg, "psnr", false);
  need_number(bg, "ssim", false);
  need_number(bg, "lpips_slot", true);
  const json* fg = need_object("foreground");
  for (const std::string& slot : kForegroundSlots) need_number(fg, slot + "_slot", true);
  const json* motion = need_object("motion");
  need_number(motion, "ewarp", true);
  const json* md = need_object("metadata");
  need_number(md, "dilation", false);
  need_number(md, "frames_evaluated", false);
  need_number(md, "pixel_max", false);

  if (bg && problems.empty()) {
    const double mse = bg->at("mse").get<double>();
    const double psnr = bg->at("psnr").get<double>();
    const double ssim = bg->at("ssim").get<double>();
    const double expect = psnr_from_mse(mse, md->at("pixel_max").get<double>());
    if (std::abs(expect - psnr) > 1e-9 * std::max(1.0, std::abs(expect))) problems.push_back("psnr inconsistent with mse");
    if (ssim < -1.0 || ssim > 1.0) problems.push_back("ssim outside [-1, 1]");
  }
  return problems;
}

}  // namespace retexkit
