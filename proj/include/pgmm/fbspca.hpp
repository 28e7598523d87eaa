#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pgmm/fb_basis.hpp"
#include "pgmm/image.hpp"

namespace pgmm {

/// Per-component magnitude and phase, z_j = r_j e^{i phi_j}.
struct PolarCoeff {
  std::vector<double> r;
  std::vector<double> phi;  ///< wrapped to (-pi, pi]; 0 where r == 0

  std::size_t size() const { return r.size(); }
  static PolarCoeff from_complex(std::span<const Complex> z);
  std::vector<Complex> to_complex() const;
};

/// Fitted steerable basis.
///
/// Components with omega > 0 stand for the conjugate pair (Psi_j, conj Psi_j);
/// omega == 0 components are real images and carry real coefficients. The set
/// {Psi_j} together with the conjugate partners is orthonormal.
struct FbModel {
  BandLimitSpec spec;
  int k_max = 0;
  std::vector<int> omega;
  std::vector<double> eigvals;
  Image mean;
  Eigen::MatrixXcd components;  ///< L*L x m, column j is Psi_j in row-major pixel order

  int side() const { return spec.image_side; }
  int m() const { return static_cast<int>(omega.size()); }
  ComplexImage component(int j) const;
};

FbModel fit(const ImageStack& images, const BandLimitSpec& spec, int m);

/// z_j = <Psi_j, I - mu>. Imaginary parts of omega == 0 entries are dropped.
std::vector<Complex> encode_complex(const FbModel& model, const Image& image);
PolarCoeff encode(const FbModel& model, const Image& image);
/// Encodes a whole stack; column i holds image i.
Eigen::MatrixXcd encode_stack(const FbModel& model, const ImageStack& images);

/// mu + sum_{omega=0} Re(z_j) Psi_j + 2 sum_{omega>0} Re(z_j Psi_j).
Image decode_complex(const FbModel& model, std::span<const Complex> z);
Image decode(const FbModel& model, const PolarCoeff& z);

/// phi_j <- wrap(phi_j + alpha * omega_j); r untouched.
PolarCoeff rotate(const PolarCoeff& z, double alpha, std::span<const int> omega);
std::vector<Complex> rotate_complex(std::span<const Complex> z, double alpha,
                                    std::span<const int> omega);

void save_model(const FbModel& model, const std::string& path);
/// Band-limit parameters other than the side are not persisted and load as defaults.
FbModel load_model(const std::string& path);

}  // namespace pgmm
