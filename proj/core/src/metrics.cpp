#include "meshstab/metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace meshstab {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

std::array<double, kWindow> gaussian_kernel() {
  std::array<double, kWindow> k{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Valid-mode separable Gaussian filter.
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h) {
  static const auto k = gaussian_kernel();
  const int ow = w - kWindow + 1, oh = h - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[static_cast<std::size_t>(i)] * img[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < kWindow; ++i) s += k[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double segment_stability(std::span<const Point2> points) {
  if (points.size() < 2) return 1.0;
  double path = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) path += distance(points[i], points[i - 1]);
  if (path == 0.0) return 1.0;
  return distance(points.front(), points.back()) / path;
}

StabilityReport stability_score(const TrajectorySet& ts) {
  StabilityReport report;
  for (const auto& tr : ts.trajectories()) {
    const std::span<const Point2> pts(tr.points);
    for (std::size_t s = 0; s + kStabilitySegmentLength <= pts.size(); s += kStabilitySegmentLength)
      report.segment_scores.push_back(segment_stability(pts.subspan(s, kStabilitySegmentLength)));
  }
  report.defined = !report.segment_scores.empty();
  if (report.defined)
    report.mean = std::accumulate(report.segment_scores.begin(), report.segment_scores.end(), 0.0) /
                  static_cast<double>(report.segment_scores.size());
  return report;
}

double ssim_pair(const GrayFrame& a, const GrayFrame& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("ssim_pair: size mismatch");
  const int w = a.width(), h = a.height();
  if (w < kWindow || h < kWindow) throw std::invalid_argument("ssim_pair: frames must be at least 11x11");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> fa(n), fb(n), faa(n), fbb(n), fab(n);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = a.data()[i];
    fb[i] = b.data()[i];
    faa[i] = fa[i] * fa[i];
    fbb[i] = fb[i] * fb[i];
    fab[i] = fa[i] * fb[i];
  }
  const auto ma = filter_valid(fa, w, h), mb = filter_valid(fb, w, h);
  const auto saa = filter_valid(faa, w, h), sbb = filter_valid(fbb, w, h), sab = filter_valid(fab, w, h);
  double sum = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double va = saa[i] - ma[i] * ma[i];
    const double vb = sbb[i] - mb[i] * mb[i];
    const double cov = sab[i] - ma[i] * mb[i];
    const double num = (2.0 * ma[i] * mb[i] + kC1) * (2.0 * cov + kC2);
    const double den = (ma[i] * ma[i] + mb[i] * mb[i] + kC1) * (va + vb + kC2);
    sum += num / den;
  }
  return sum / static_cast<double>(ma.size());
}

SsimReport video_ssim(std::span<const GrayFrame> frames) {
  if (frames.size() < 2) throw std::invalid_argument("video_ssim: need at least 2 frames");
  SsimReport report;
  for (std::size_t i = 1; i < frames.size(); ++i) report.pair_values.push_back(ssim_pair(frames[i - 1], frames[i]));
  report.mean = std::accumulate(report.pair_values.begin(), report.pair_values.end(), 0.0) /
                static_cast<double>(report.pair_values.size());
  return report;
}

double residual_jitter_energy(const TrajectorySet& ts) {
  double e = 0.0;
  for (const auto& tr : ts.trajectories())
    for (std::size_t i = 1; i + 1 < tr.points.size(); ++i)
      e += squared_norm(tr.points[i + 1] - 2.0 * tr.points[i] + tr.points[i - 1]);
  return e;
}

}  // namespace meshstab
