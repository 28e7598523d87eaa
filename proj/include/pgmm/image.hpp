#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pgmm {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised for invalid inputs and malformed data. The CLI maps it to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A displacement or position in pixel units, (row, col).
struct Vec2 {
  double row = 0.0;
  double col = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.row + b.row, a.col + b.col}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.row - b.row, a.col - b.col}; }
  friend Vec2 operator-(Vec2 a) { return {-a.row, -a.col}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.row, s * a.col}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
  double norm() const;
};

/// Square single-channel image, row-major.
template <typename T>
class BasicImage {
 public:
  BasicImage() = default;
  explicit BasicImage(int side, T fill = T{})
      : side_(side), pixels_(static_cast<std::size_t>(side) * side, fill) {}
  BasicImage(int side, std::vector<T> pixels) : side_(side), pixels_(std::move(pixels)) {
    if (pixels_.size() != static_cast<std::size_t>(side) * side)
      throw Error("image pixel count does not match side " + std::to_string(side));
  }

  int side() const { return side_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  T& operator()(int row, int col) { return pixels_[static_cast<std::size_t>(row) * side_ + col]; }
  const T& operator()(int row, int col) const {
    return pixels_[static_cast<std::size_t>(row) * side_ + col];
  }
  T& operator[](std::size_t i) { return pixels_[i]; }
  const T& operator[](std::size_t i) const { return pixels_[i]; }

  std::span<T> data() { return pixels_; }
  std::span<const T> data() const { return pixels_; }
  std::vector<T>& vec() { return pixels_; }
  const std::vector<T>& vec() const { return pixels_; }

  friend bool operator==(const BasicImage&, const BasicImage&) = default;

 private:
  int side_ = 0;
  std::vector<T> pixels_;
};

using Image = BasicImage<double>;
using ComplexImage = BasicImage<Complex>;
using ImageStack = std::vector<Image>;

/// Pixel index of the rotation/translation origin: (side/2, side/2).
inline int frame_center(int side) { return side / 2; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);
/// Wraps an angle to [0, 2pi).
double wrap_angle_positive(double a);

/// Rotates a (row, col) offset: the polar angle atan2(col, row) advances by alpha.
Vec2 rotate_vec(Vec2 p, double alpha);

/// Bilinear sample at fractional (row, col); outside samples read `fill`.
template <typename T>
T sample_bilinear(const BasicImage<T>& img, double row, double col, T fill = T{});

/// out(p) = in(p - t): content moves by +t. Zero fill.
template <typename T>
BasicImage<T> shift_image(const BasicImage<T>& in, Vec2 t);

/// out(p) = in(R_alpha p) about the frame center. Coefficient phases advance by alpha * omega.
Image rotate_image(const Image& in, double alpha, double fill = 0.0);

/// Forward rigid pose: out(p) = in(R_alpha (p - t)), a single bilinear resampling.
Image warp_pose(const Image& in, double alpha, Vec2 t, double fill = 0.0);

/// Inverse of warp_pose: out(q) = in(R_{-alpha} q + t).
Image unwarp_pose(const Image& in, double alpha, Vec2 t, double fill = 0.0);

double image_mean(const Image& img);
double image_variance(const Image& img);
/// Real inner product sum a*b over pixels.
double dot(const Image& a, const Image& b);
double l2_norm(const Image& img);

}  // namespace pgmm
