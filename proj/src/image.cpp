#include "pgmm/image.hpp"

#include <cmath>

namespace pgmm {

double Vec2::norm() const { return std::hypot(row, col); }

double wrap_angle(double a) {
  double y = std::remainder(a, kTwoPi);
  if (y <= -kPi) y += kTwoPi;
  return y;
}

double wrap_angle_positive(double a) {
  double y = std::fmod(a, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y -= kTwoPi;
  return y;
}

Vec2 rotate_vec(Vec2 p, double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  return {c * p.row - s * p.col, s * p.row + c * p.col};
}

template <typename T>
T sample_bilinear(const BasicImage<T>& img, double row, double col, T fill) {
  const int n = img.side();
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const int r0 = static_cast<int>(r0f);
  const int c0 = static_cast<int>(c0f);
  const double fr = row - r0f;
  const double fc = col - c0f;
  auto at = [&](int r, int c) -> T {
    if (r < 0 || r >= n || c < 0 || c >= n) return fill;
    return img(r, c);
  };
  // Exact hits skip the neighbour reads so boundary pixels never pull in fill.
  T top = fc == 0.0 ? at(r0, c0) : at(r0, c0) * (1.0 - fc) + at(r0, c0 + 1) * fc;
  if (fr == 0.0) return top;
  T bottom = fc == 0.0 ? at(r0 + 1, c0) : at(r0 + 1, c0) * (1.0 - fc) + at(r0 + 1, c0 + 1) * fc;
  return top * (1.0 - fr) + bottom * fr;
}

template double sample_bilinear(const BasicImage<double>&, double, double, double);
template Complex sample_bilinear(const BasicImage<Complex>&, double, double, Complex);

template <typename T>
BasicImage<T> shift_image(const BasicImage<T>& in, Vec2 t) {
  const int n = in.side();
  BasicImage<T> out(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = sample_bilinear(in, r - t.row, c - t.col);
  return out;
}

template BasicImage<double> shift_image(const BasicImage<double>&, Vec2);
template BasicImage<Complex> shift_image(const BasicImage<Complex>&, Vec2);

Image rotate_image(const Image& in, double alpha, double fill) {
  return warp_pose(in, alpha, {}, fill);
}

Image warp_pose(const Image& in, double alpha, Vec2 t, double fill) {
  const int n = in.side();
  const double ctr = frame_center(n);
  Image out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Vec2 src = rotate_vec({r - ctr - t.row, c - ctr - t.col}, alpha);
      out(r, c) = sample_bilinear(in, src.row + ctr, src.col + ctr, fill);
    }
  }
  return out;
}

Image unwarp_pose(const Image& in, double alpha, Vec2 t, double fill) {
  const int n = in.side();
  const double ctr = frame_center(n);
  Image out(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Vec2 src = rotate_vec({r - ctr, c - ctr}, -alpha) + t;
      out(r, c) = sample_bilinear(in, src.row + ctr, src.col + ctr, fill);
    }
  }
  return out;
}

double image_mean(const Image& img) {
  double s = 0.0;
  for (double v : img.data()) s += v;
  return img.empty() ? 0.0 : s / static_cast<double>(img.size());
}

double image_variance(const Image& img) {
  const double m = image_mean(img);
  double s = 0.0;
  for (double v : img.data()) s += (v - m) * (v - m);
  return img.empty() ? 0.0 : s / static_cast<double>(img.size());
}

double dot(const Image& a, const Image& b) {
  if (a.size() != b.size()) throw Error("dot: image size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Image& img) { return std::sqrt(dot(img, img)); }

}  // namespace pgmm
