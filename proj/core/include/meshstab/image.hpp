#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace meshstab {

/// 8-bit luminance image, row-major.
class GrayFrame {
 public:
  GrayFrame() = default;
  GrayFrame(int width, int height, std::uint8_t fill = 0);
  GrayFrame(int width, int height, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const GrayFrame&, const GrayFrame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Bilinear sample at continuous pixel coordinates. Returns false when (x, y)
/// falls outside [0, W-1] x [0, H-1] by more than a 1e-6 px slack.
bool sample_bilinear(const GrayFrame& frame, double x, double y, double& value);

GrayFrame read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayFrame& frame, const std::filesystem::path& path);

/// Luma planes of an uncompressed YUV4MPEG2 stream.
std::vector<GrayFrame> read_y4m(const std::filesystem::path& path);

/// Either a directory of binary PGM files (sorted by name) or a .y4m file.
std::vector<GrayFrame> read_frame_sequence(const std::filesystem::path& path);

/// Writes frame_00000.pgm, frame_00001.pgm, ... into `directory`.
void write_frame_sequence(std::span<const GrayFrame> frames, const std::filesystem::path& directory);

/// Rec.601 luma of an interleaved 8-bit RGB buffer.
GrayFrame luma_from_rgb(int width, int height, std::span<const std::uint8_t> rgb);

}  // namespace meshstab
