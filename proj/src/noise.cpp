#include "monoseg/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "monoseg/rng.hpp"

namespace monoseg {

namespace {

SplitMix64 box_stream(const NoiseParams& params, const std::string& image_id,
                      int box_index) {
  return SplitMix64(
      derive_key(params.seed, hash_str(image_id), std::uint64_t(box_index)));
}

Box apply_draws(const Box& box, const NoiseParams& params,
                const NoiseDraws& d) {
  double w = box.width(), h = box.height();
  if (d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0 && d[3] == 0.0 &&
      w >= params.min_size && h >= params.min_size)
    return box;  // keep zero perturbation bit-exact
  double xc = box.x_center() + d[0] * w;
  double yc = box.y_center() + d[1] * h;
  double nw = std::max((1.0 + d[2]) * w, params.min_size);
  double nh = std::max((1.0 + d[3]) * h, params.min_size);
  return Box{xc - 0.5 * nw, yc - 0.5 * nh, xc + 0.5 * nw, yc + 0.5 * nh};
}

// The clipped box must cover at least one pixel center, so it still
// rasterizes to a nonempty mask.
bool covers_a_pixel(const Box& c) {
  if (!(c.x_lt < c.x_rb) || !(c.y_lt < c.y_rb)) return false;
  double jx = std::ceil(c.x_lt - 0.5) + 0.5;  // first center >= x_lt
  double iy = std::ceil(c.y_lt - 0.5) + 0.5;
  return jx <= c.x_rb && iy <= c.y_rb;
}

}  // namespace

Box perturb_box(const Box& box, const NoiseParams& params, int height,
                int width, const NoiseDraws* draws,
                const std::string& image_id, int box_index) {
  if (!box.valid()) throw std::invalid_argument("invalid box");
  if (params.sigma < 0.0) throw std::invalid_argument("negative sigma");
  if (params.min_size < 1.0) throw std::invalid_argument("min_size < 1");

  NoiseDraws d;
  if (draws) {
    d = *draws;
  } else {
    SplitMix64 rng = box_stream(params, image_id, box_index);
    for (double& v : d) v = params.sigma * rng.next_gauss();
  }
  Box out = clip_box(apply_draws(box, params, d), height, width);
  if (!covers_a_pixel(out))
    throw std::runtime_error("noise destroyed annotation");
  return out;
}

std::vector<BoxRecord> perturb_dataset(const std::vector<BoxRecord>& clean,
                                       const NoiseParams& params, int height,
                                       int width) {
  std::vector<BoxRecord> out;
  out.reserve(clean.size());
  for (const BoxRecord& rec : clean) {
    BoxRecord nrec;
    nrec.image_id = rec.image_id;
    nrec.boxes.reserve(rec.boxes.size());
    for (std::size_t k = 0; k < rec.boxes.size(); ++k) {
      SplitMix64 rng = box_stream(params, rec.image_id, int(k));
      bool done = false;
      for (int attempt = 0; attempt < 16 && !done; ++attempt) {
        NoiseDraws d;
        for (double& v : d) v = params.sigma * rng.next_gauss();
        Box cand = clip_box(apply_draws(rec.boxes[k], params, d), height, width);
        if (covers_a_pixel(cand)) {
          nrec.boxes.push_back(cand);
          done = true;
        }
      }
      if (!done)
        throw std::runtime_error("noise destroyed annotation (image " +
                                 rec.image_id + ", box " + std::to_string(k) +
                                 ")");
    }
    out.push_back(std::move(nrec));
  }
  return out;
}

std::vector<double> noise_draws(const NoiseParams& params,
                                const std::string& image_id, int box_index,
                                int count) {
  SplitMix64 rng = box_stream(params, image_id, box_index);
  std::vector<double> out(count);
  for (double& v : out) v = params.sigma * rng.next_gauss();
  return out;
}

}  // namespace monoseg
