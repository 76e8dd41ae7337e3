#include "monoseg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace monoseg {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

[[noreturn]] void pgm_fail(const std::filesystem::path& path, std::size_t at,
                           const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what + " at byte " +
                           std::to_string(at));
}

// PGM token scanner: whitespace-separated, '#' comments run to end of line.
struct PgmScanner {
  const std::string& s;
  const std::filesystem::path& path;
  std::size_t at = 0;

  void skip_separators() {
    while (at < s.size()) {
      char c = s[at];
      if (c == '#') {
        while (at < s.size() && s[at] != '\n') ++at;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++at;
      } else {
        break;
      }
    }
  }

  int next_uint(const char* what) {
    skip_separators();
    if (at >= s.size() || !std::isdigit(static_cast<unsigned char>(s[at])))
      pgm_fail(path, at, std::string("expected ") + what);
    long v = 0;
    while (at < s.size() && std::isdigit(static_cast<unsigned char>(s[at]))) {
      v = v * 10 + (s[at] - '0');
      if (v > 1'000'000) pgm_fail(path, at, std::string(what) + " too large");
      ++at;
    }
    return int(v);
  }
};

// Returns raw 8-bit pixel rows after validating the P5 header.
Grid<std::uint8_t> read_pgm_raw(const std::filesystem::path& path) {
  std::string s = read_file(path);
  if (s.size() < 2 || s[0] != 'P' || s[1] != '5')
    pgm_fail(path, 0, "expected P5 magic");
  PgmScanner sc{s, path, 2};
  int w = sc.next_uint("width");
  int h = sc.next_uint("height");
  int maxval = sc.next_uint("maxval");
  if (w <= 0 || h <= 0) pgm_fail(path, sc.at, "non-positive dimensions");
  if (maxval != 255) pgm_fail(path, sc.at, "maxval must be 255");
  // exactly one whitespace byte separates header and raster
  if (sc.at >= s.size() || !std::isspace(static_cast<unsigned char>(s[sc.at])))
    pgm_fail(path, sc.at, "expected whitespace before raster");
  ++sc.at;
  std::size_t need = std::size_t(w) * h;
  if (s.size() - sc.at != need)
    pgm_fail(path, sc.at, "raster has " + std::to_string(s.size() - sc.at) +
                              " bytes, expected " + std::to_string(need));
  Grid<std::uint8_t> g(h, w);
  std::copy(s.begin() + std::ptrdiff_t(sc.at), s.end(),
            reinterpret_cast<char*>(g.data()));
  return g;
}

std::string pgm_bytes(int rows, int cols, const std::uint8_t* px) {
  std::string out = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) +
                    "\n255\n";
  out.append(reinterpret_cast<const char*>(px), std::size_t(rows) * cols);
  return out;
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Image& img) {
  Grid<std::uint8_t> q(img.rows(), img.cols());
  for (std::size_t k = 0; k < img.size(); ++k) {
    double v = std::clamp(img.values()[k], 0.0, 1.0);
    q.values()[k] = std::uint8_t(std::lround(v * 255.0));
  }
  write_file(path, pgm_bytes(q.rows(), q.cols(), q.data()));
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  Grid<std::uint8_t> q(mask.rows(), mask.cols());
  for (std::size_t k = 0; k < mask.size(); ++k)
    q.values()[k] = mask.values()[k] ? 255 : 0;
  write_file(path, pgm_bytes(q.rows(), q.cols(), q.data()));
}

Image read_pgm_image(const std::filesystem::path& path) {
  Grid<std::uint8_t> raw = read_pgm_raw(path);
  Image img(raw.rows(), raw.cols());
  for (std::size_t k = 0; k < raw.size(); ++k)
    img.values()[k] = raw.values()[k] / 255.0;
  return img;
}

BinaryMask read_pgm_mask(const std::filesystem::path& path) {
  Grid<std::uint8_t> raw = read_pgm_raw(path);
  BinaryMask mask(raw.rows(), raw.cols());
  for (std::size_t k = 0; k < raw.size(); ++k)
    mask.values()[k] = raw.values()[k] ? 1 : 0;
  return mask;
}

namespace {

json box_to_json(const Box& b) {
  return json{{"x_lt", b.x_lt}, {"y_lt", b.y_lt}, {"x_rb", b.x_rb}, {"y_rb", b.y_rb}};
}

Box box_from_json(const json& j) {
  return Box{j.at("x_lt").get<double>(), j.at("y_lt").get<double>(),
             j.at("x_rb").get<double>(), j.at("y_rb").get<double>()};
}

json boxes_to_json(const std::vector<Box>& boxes) {
  json a = json::array();
  for (const Box& b : boxes) a.push_back(box_to_json(b));
  return a;
}

std::vector<Box> boxes_from_json(const json& j) {
  std::vector<Box> out;
  for (const json& e : j) out.push_back(box_from_json(e));
  return out;
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": " +
                               e.what());
    }
  }
  return rows;
}

}  // namespace

void write_boxes_jsonl(const std::filesystem::path& path,
                       const std::vector<BoxRecord>& records) {
  std::string out;
  for (const BoxRecord& r : records) {
    json row{{"image_id", r.image_id}, {"boxes", boxes_to_json(r.boxes)}};
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<BoxRecord> read_boxes_jsonl(const std::filesystem::path& path) {
  std::vector<BoxRecord> out;
  for (const json& row : read_jsonl(path))
    out.push_back({row.at("image_id").get<std::string>(),
                   boxes_from_json(row.at("boxes"))});
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::string out;
  json meta{{"meta",
             {{"schema_version", 1},
              {"seed", m.seed},
              {"sigma", m.sigma},
              {"height", m.height},
              {"width", m.width}}}};
  out += meta.dump();
  out += '\n';
  for (const ManifestEntry& e : m.entries) {
    json row{{"image_id", e.image_id},
             {"image", e.image_path},
             {"mask", e.mask_path},
             {"clean_boxes", boxes_to_json(e.clean_boxes)},
             {"noisy_boxes", boxes_to_json(e.noisy_boxes)}};
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::vector<json> rows = read_jsonl(path);
  if (rows.empty() || !rows[0].contains("meta"))
    throw std::runtime_error(path.string() + ": missing meta line");
  const json& meta = rows[0].at("meta");
  if (meta.at("schema_version").get<int>() != 1)
    throw std::runtime_error(path.string() + ": unsupported schema version");
  Manifest m;
  m.seed = meta.at("seed").get<std::uint64_t>();
  m.sigma = meta.at("sigma").get<double>();
  m.height = meta.at("height").get<int>();
  m.width = meta.at("width").get<int>();
  m.dir = path.parent_path();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const json& row = rows[i];
    ManifestEntry e;
    e.image_id = row.at("image_id").get<std::string>();
    e.image_path = row.at("image").get<std::string>();
    e.mask_path = row.at("mask").get<std::string>();
    e.clean_boxes = boxes_from_json(row.at("clean_boxes"));
    e.noisy_boxes = boxes_from_json(row.at("noisy_boxes"));
    if (e.clean_boxes.size() != e.noisy_boxes.size())
      throw std::runtime_error(path.string() + ": box lists misaligned for " +
                               e.image_id);
    m.entries.push_back(std::move(e));
  }
  return m;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace monoseg
