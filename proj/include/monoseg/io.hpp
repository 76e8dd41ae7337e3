#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "monoseg/geometry.hpp"
#include "monoseg/grid.hpp"
#include "monoseg/noise.hpp"

namespace monoseg {

// 8-bit binary PGM (P5). Images quantize as round(v * 255); masks write 0/255
// and read back exactly. Parse errors report the byte offset.
void write_pgm(const std::filesystem::path& path, const Image& img);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);
Image read_pgm_image(const std::filesystem::path& path);
BinaryMask read_pgm_mask(const std::filesystem::path& path);

// One JSONL row per image: {"image_id": ..., "boxes": [...]}.
void write_boxes_jsonl(const std::filesystem::path& path,
                       const std::vector<BoxRecord>& records);
std::vector<BoxRecord> read_boxes_jsonl(const std::filesystem::path& path);

struct ManifestEntry {
  std::string image_id;
  std::string image_path;  // relative to the manifest's directory
  std::string mask_path;
  std::vector<Box> clean_boxes;
  std::vector<Box> noisy_boxes;
};

// manifest.jsonl: a meta line, then one entry line per image.
struct Manifest {
  std::uint64_t seed = 0;
  double sigma = 0.0;
  int height = 0;
  int width = 0;
  std::vector<ManifestEntry> entries;
  std::filesystem::path dir;  // set on read; resolves relative paths

  std::filesystem::path resolve(const std::string& rel) const {
    return dir / rel;
  }
};

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

// Shortest round-trippable decimal for CSV cells ("%.10g").
std::string csv_num(double v);

}  // namespace monoseg
