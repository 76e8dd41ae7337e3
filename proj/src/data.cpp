#include "monoseg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "monoseg/noise.hpp"
#include "monoseg/rng.hpp"

namespace monoseg {

namespace {

struct Blob {
  double cx, cy;        // center (pixel coordinates)
  double ax, ay;        // semi-axes
  double n;             // superellipse exponent
  double amp[3];        // ripple amplitudes for harmonics 2..4
  double phase[3];
  double reach;         // radius bound incl. ripple

  double boundary_radius(double phi) const {
    double base = std::pow(std::pow(std::abs(std::cos(phi) / ax), n) +
                               std::pow(std::abs(std::sin(phi) / ay), n),
                           -1.0 / n);
    double ripple = 1.0;
    for (int k = 0; k < 3; ++k)
      ripple += amp[k] * std::cos((k + 2) * phi + phase[k]);
    return base * ripple;
  }

  bool contains(double x, double y) const {
    double dx = x - cx, dy = y - cy;
    double r = std::hypot(dx, dy);
    if (r > reach) return false;
    if (r == 0.0) return true;
    return r <= boundary_radius(std::atan2(dy, dx));
  }

  // 1 deep inside, 0 far outside, linear ramp across the boundary. Exactly
  // 0.5 on the contour, so the half-coverage set is the contains() region.
  double coverage(double x, double y, double ramp) const {
    double dx = x - cx, dy = y - cy;
    double r = std::hypot(dx, dy);
    if (r > reach + ramp) return 0.0;
    if (r == 0.0) return 1.0;
    double s = r - boundary_radius(std::atan2(dy, dx));
    return std::clamp(0.5 - s / (2.0 * ramp), 0.0, 1.0);
  }

  // distance outside the contour (negative inside)
  double signed_dist(double x, double y) const {
    double dx = x - cx, dy = y - cy;
    double r = std::hypot(dx, dy);
    if (r == 0.0) return -boundary_radius(0.0);
    return r - boundary_radius(std::atan2(dy, dx));
  }
};

Blob draw_blob(SplitMix64& rng, int h, int w) {
  double scale = std::min(h, w) / 64.0;
  double lo = std::max(2.0, 6.0 * scale), hi = std::max(3.0, 14.0 * scale);
  Blob b;
  b.ax = rng.next_uniform(lo, hi);
  b.ay = rng.next_uniform(lo, hi);
  b.n = rng.next_uniform(1.5, 3.5);
  double amp_sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    b.amp[k] = rng.next_uniform(-0.05, 0.05);
    b.phase[k] = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    amp_sum += std::abs(b.amp[k]);
  }
  b.reach = std::max(b.ax, b.ay) * (1.0 + amp_sum);
  double margin = b.reach + 2.0;
  if (2.0 * margin >= std::min(h, w))
    throw std::runtime_error("image too small for blob placement");
  b.cx = rng.next_uniform(margin, w - margin);
  b.cy = rng.next_uniform(margin, h - margin);
  return b;
}

}  // namespace

SyntheticSample generate_sample(std::uint64_t seed, int height, int width,
                                int n_objects) {
  if (n_objects < 1 || n_objects > 2)
    throw std::invalid_argument("n_objects must be 1 or 2");
  if (height < 16 || width < 16)
    throw std::invalid_argument("image too small");

  SplitMix64 rng(derive_key(seed, hash_str("sample")));
  double bg = rng.next_uniform(0.25, 0.35);
  double fg = rng.next_uniform(0.65, 0.75);

  std::vector<Blob> blobs;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 256)
      throw std::runtime_error("could not place disjoint objects");
    blobs.clear();
    for (int o = 0; o < n_objects; ++o)
      blobs.push_back(draw_blob(rng, height, width));
    bool ok = true;
    for (int a = 0; ok && a < n_objects; ++a)
      for (int b = a + 1; b < n_objects; ++b) {
        double d = std::hypot(blobs[a].cx - blobs[b].cx,
                              blobs[a].cy - blobs[b].cy);
        // keep a 2 px gap so components stay separate under 8-connectivity
        if (d <= blobs[a].reach + blobs[b].reach + 2.0) ok = false;
      }
    if (ok) break;
  }

  SyntheticSample s;
  s.image_id = "s" + std::to_string(seed);
  s.gt_mask = BinaryMask(height, width, 0);
  s.image = Image(height, width, bg);
  // ~2 px boundary ramp at the reference 64x64 scale: near the contour the
  // intensity alone does not pin down the object, only the annotations do
  double sc = std::min(height, width) / 64.0;
  double ramp = std::max(1.0, 2.0 * sc);

  // each object sits in a dim glow that decays outward from its contour;
  // the glow is background, but it fills the marginal parts of the boxes,
  // so box supervision alone cannot tell where the object ends and it starts
  std::vector<double> halo_amp, halo_w;
  for (std::size_t k = 0; k < blobs.size(); ++k) {
    halo_amp.push_back(rng.next_uniform(0.42, 0.52));
    halo_w.push_back(rng.next_uniform(2.5, 3.5) * sc);
  }

  for (int i = 0; i < height; ++i)
    for (int j = 0; j < width; ++j) {
      double x = j + 0.5, y = i + 0.5;
      double c = 0.0, glow = 0.0;
      for (std::size_t k = 0; k < blobs.size(); ++k) {
        const Blob& b = blobs[k];
        c = std::max(c, b.coverage(x, y, ramp));
        if (b.contains(x, y)) s.gt_mask(i, j) = 1;
        double d = b.signed_dist(x, y);
        if (d > 0.0 && d < halo_w[k])
          glow = std::max(glow, halo_amp[k] * (1.0 - d / halo_w[k]));
      }
      s.image(i, j) = std::max(bg + (fg - bg) * c, bg + glow);
    }
  for (double& v : s.image.values())
    v = std::clamp(v + 0.05 * rng.next_gauss(), 0.0, 1.0);

  for (const BinaryMask& comp : connected_components(s.gt_mask))
    s.clean_boxes.push_back(*tightest_box(comp));
  if (int(s.clean_boxes.size()) != n_objects)
    throw std::runtime_error("object count mismatch after rendering");
  return s;
}

Manifest generate_dataset(const std::filesystem::path& dir, std::uint64_t seed,
                          const DatasetOptions& opt) {
  if (opt.count < 1) throw std::invalid_argument("count must be positive");
  if (opt.min_objects < 1 || opt.max_objects > 2 ||
      opt.min_objects > opt.max_objects)
    throw std::invalid_argument("object count range must lie in {1,2}");

  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "masks");

  Manifest m;
  m.seed = seed;
  m.sigma = opt.sigma;
  m.height = opt.height;
  m.width = opt.width;
  m.dir = dir;

  SplitMix64 counts(derive_key(seed, hash_str("object_counts")));
  std::vector<BoxRecord> clean;
  for (int idx = 0; idx < opt.count; ++idx) {
    char id[16];
    std::snprintf(id, sizeof id, "img_%04d", idx);
    int n_objects = counts.next_int(opt.min_objects, opt.max_objects);
    SyntheticSample s = generate_sample(derive_key(seed, hash_str(id)),
                                        opt.height, opt.width, n_objects);
    ManifestEntry e;
    e.image_id = id;
    e.image_path = std::string("images/") + id + ".pgm";
    e.mask_path = std::string("masks/") + id + ".pgm";
    e.clean_boxes = s.clean_boxes;
    write_pgm(dir / e.image_path, s.image);
    write_pgm(dir / e.mask_path, s.gt_mask);
    clean.push_back({e.image_id, e.clean_boxes});
    m.entries.push_back(std::move(e));
  }

  NoiseParams np;
  np.sigma = opt.sigma;
  np.seed = seed;
  np.min_size = opt.min_size;
  std::vector<BoxRecord> noisy =
      perturb_dataset(clean, np, opt.height, opt.width);
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    m.entries[i].noisy_boxes = noisy[i].boxes;

  write_manifest(dir / "manifest.jsonl", m);
  return m;
}

}  // namespace monoseg
