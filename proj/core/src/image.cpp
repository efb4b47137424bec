#include "meshstab/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "meshstab/errors.hpp"

namespace meshstab {

GrayFrame::GrayFrame(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("GrayFrame: negative size");
}

GrayFrame::GrayFrame(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0 || data_.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("GrayFrame: data length does not match width x height");
}

bool sample_bilinear(const GrayFrame& frame, double x, double y, double& value) {
  constexpr double kSlack = 1e-6;
  const double xmax = frame.width() - 1;
  const double ymax = frame.height() - 1;
  if (!(x >= -kSlack && y >= -kSlack && x <= xmax + kSlack && y <= ymax + kSlack)) return false;
  x = std::clamp(x, 0.0, xmax);
  y = std::clamp(y, 0.0, ymax);
  const int x0 = std::min(static_cast<int>(x), std::max(frame.width() - 2, 0));
  const int y0 = std::min(static_cast<int>(y), std::max(frame.height() - 2, 0));
  const int x1 = std::min(x0 + 1, frame.width() - 1);
  const int y1 = std::min(y0 + 1, frame.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * frame.at(x0, y0) + fx * frame.at(x1, y0);
  const double bottom = (1.0 - fx) * frame.at(x0, y1) + fx * frame.at(x1, y1);
  value = (1.0 - fy) * top + fy * bottom;
  return true;
}

namespace {

// Reads the next whitespace-delimited PNM header token, skipping comments.
std::string next_pnm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (in) {
    if (c == '#') {
      while (in && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!token.empty()) return token;
    } else {
      token.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  return token;
}

int parse_header_int(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": bad header field '" + token + "'");
  }
}

}  // namespace

GrayFrame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_pnm_token(in) != "P5") throw ParseError(path.string() + ": not a binary PGM (P5)");
  const int w = parse_header_int(next_pnm_token(in), path);
  const int h = parse_header_int(next_pnm_token(in), path);
  const int maxval = parse_header_int(next_pnm_token(in), path);
  if (w <= 0 || h <= 0) throw ParseError(path.string() + ": non-positive size");
  if (maxval != 255) throw ParseError(path.string() + ": only maxval 255 is supported");
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw ParseError(path.string() + ": truncated pixel data");
  return GrayFrame(w, h, std::move(data));
}

void write_pgm(const GrayFrame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data().data()),
            static_cast<std::streamsize>(frame.data().size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<GrayFrame> read_y4m(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream fields(header);
  std::string tag;
  fields >> tag;
  if (tag != "YUV4MPEG2") throw ParseError(path.string() + ": missing YUV4MPEG2 signature", 1);
  int w = 0, h = 0;
  std::string chroma = "420";
  while (fields >> tag) {
    if (tag[0] == 'W') w = parse_header_int(tag.substr(1), path);
    else if (tag[0] == 'H') h = parse_header_int(tag.substr(1), path);
    else if (tag[0] == 'C') chroma = tag.substr(1);
  }
  if (w <= 0 || h <= 0) throw ParseError(path.string() + ": missing frame size", 1);

  const std::size_t luma = static_cast<std::size_t>(w) * h;
  const std::size_t cw = (w + 1) / 2, ch = (h + 1) / 2;
  std::size_t chroma_bytes = 0;
  if (chroma.rfind("420", 0) == 0) chroma_bytes = 2 * cw * ch;
  else if (chroma.rfind("422", 0) == 0) chroma_bytes = 2 * cw * h;
  else if (chroma.rfind("444", 0) == 0) chroma_bytes = 2 * luma;
  else if (chroma.rfind("mono", 0) == 0) chroma_bytes = 0;
  else throw ParseError(path.string() + ": unsupported chroma format C" + chroma, 1);

  std::vector<GrayFrame> frames;
  std::string frame_header;
  std::vector<char> skip(chroma_bytes);
  while (std::getline(in, frame_header)) {
    if (frame_header.rfind("FRAME", 0) != 0)
      throw ParseError(path.string() + ": expected FRAME marker at frame " + std::to_string(frames.size()));
    std::vector<std::uint8_t> data(luma);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(luma));
    if (chroma_bytes) in.read(skip.data(), static_cast<std::streamsize>(chroma_bytes));
    if (!in) throw ParseError(path.string() + ": truncated frame " + std::to_string(frames.size()));
    frames.emplace_back(w, h, std::move(data));
  }
  return frames;
}

std::vector<GrayFrame> read_frame_sequence(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw IoError("no such file or directory: " + path.string());
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<GrayFrame> frames;
    frames.reserve(files.size());
    for (const auto& f : files) frames.push_back(read_pgm(f));
    return frames;
  }
  if (path.extension() == ".y4m") return read_y4m(path);
  return {read_pgm(path)};
}

void write_frame_sequence(std::span<const GrayFrame> frames, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "frame_%05zu.pgm", i);
    write_pgm(frames[i], directory / name);
  }
}

GrayFrame luma_from_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw std::invalid_argument("luma_from_rgb: buffer size mismatch");
  GrayFrame out(width, height);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double y = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(y), 0L, 255L));
  }
  return out;
}

}  // namespace meshstab
