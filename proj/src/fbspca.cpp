#include "pgmm/fbspca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "binary_io.hpp"
#include "fft.hpp"

namespace pgmm {

PolarCoeff PolarCoeff::from_complex(std::span<const Complex> z) {
  PolarCoeff p;
  p.r.resize(z.size());
  p.phi.resize(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    p.r[j] = std::abs(z[j]);
    p.phi[j] = p.r[j] == 0.0 ? 0.0 : wrap_angle(std::arg(z[j]));
  }
  return p;
}

std::vector<Complex> PolarCoeff::to_complex() const {
  std::vector<Complex> z(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) z[j] = std::polar(r[j], phi[j]);
  return z;
}

ComplexImage FbModel::component(int j) const {
  const int L = side();
  std::vector<Complex> px(components.col(j).data(), components.col(j).data() + L * L);
  return ComplexImage(L, std::move(px));
}

namespace {

void check_side(const FbModel& model, const Image& image) {
  if (image.side() != model.side())
    throw Error("image side " + std::to_string(image.side()) + " does not match model side " +
                std::to_string(model.side()));
}

struct Candidate {
  double eigval;
  int k;
  int index;  // column of the block eigenvector matrix
};

// Symmetric (Lowdin) orthonormalization of the components together with the
// conjugate partners of omega > 0 components. Preserves the conjugate pairing
// and keeps omega == 0 components real.
void lowdin(Eigen::MatrixXcd& psi, const std::vector<int>& omega) {
  const int m = static_cast<int>(omega.size());
  std::vector<int> partner;
  for (int j = 0; j < m; ++j)
    if (omega[j] > 0) partner.push_back(j);
  const int total = m + static_cast<int>(partner.size());
  Eigen::MatrixXcd v(psi.rows(), total);
  v.leftCols(m) = psi;
  for (std::size_t a = 0; a < partner.size(); ++a) v.col(m + a) = psi.col(partner[a]).conjugate();
  const Eigen::MatrixXcd gram = v.adjoint() * v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  const Eigen::VectorXd d = es.eigenvalues().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd inv_sqrt = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::MatrixXcd out = v * inv_sqrt.leftCols(m);
  psi = out;
  for (int j = 0; j < m; ++j)
    if (omega[j] == 0) psi.col(j) = psi.col(j).real().cast<Complex>();
}

}  // namespace

FbModel fit(const ImageStack& images, const BandLimitSpec& spec, int m) {
  spec.validate();
  if (m < 1) throw Error("fit: m must be positive");
  if (images.size() < static_cast<std::size_t>(m))
    throw Error("fit: need at least m = " + std::to_string(m) + " images, got " +
                std::to_string(images.size()));
  const int L = spec.image_side;
  for (const auto& im : images)
    if (im.side() != L) throw Error("fit: image side does not match band-limit spec");

  const BesselIndexSet idx = build_index_set(spec);
  if (m > idx.nonnegative_count())
    throw Error("fit: m = " + std::to_string(m) + " exceeds basis count " +
                std::to_string(idx.nonnegative_count()));
  const BasisGrid basis = build_basis(spec, idx, false);

  const int n = static_cast<int>(images.size());
  const std::size_t npx = static_cast<std::size_t>(L) * L;
  Image mean(L);
  for (const auto& im : images)
    for (std::size_t p = 0; p < npx; ++p) mean[p] += im[p];
  for (std::size_t p = 0; p < npx; ++p) mean[p] /= n;

  const auto& support = basis.polar.support;
  const int ns = static_cast<int>(support.size());
  const int nb = static_cast<int>(basis.functions.size());
  Eigen::MatrixXcd bconj(ns, nb);
  for (int f = 0; f < nb; ++f)
    for (int s = 0; s < ns; ++s) bconj(s, f) = std::conj(basis.functions[f].fourier[support[s]]);

  Eigen::MatrixXcd spectra(n, ns);
  double energy = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : energy)
  for (int i = 0; i < n; ++i) {
    Image centered(L);
    for (std::size_t p = 0; p < npx; ++p) {
      centered[p] = images[i][p] - mean[p];
      energy += images[i][p] * images[i][p];
    }
    const std::vector<Complex> f = detail::centered_dft(centered);
    for (int s = 0; s < ns; ++s) spectra(i, s) = f[support[s]];
  }
  const Eigen::MatrixXcd coeffs = spectra * bconj;  // n x nb raw a_{k,q}

  // The sampled functions of one block are only approximately orthonormal on
  // the lattice; whiten each block with G^{-1/2} so the PCA directions are
  // expressed in an exactly orthonormal frame.
  std::vector<Eigen::MatrixXcd> whiten(idx.k_max + 1);
  for (int k = 0; k <= idx.k_max; ++k) {
    const int p = basis.block_size(k);
    const auto bk = bconj.middleCols(basis.block_start[k], p);
    const Eigen::MatrixXcd gram = (bk.adjoint() * bk).conjugate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    whiten[k] = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                es.eigenvectors().adjoint();
    if (k == 0) whiten[k] = whiten[k].real().cast<Complex>();
  }

  std::vector<Candidate> cands;
  std::vector<Eigen::MatrixXcd> block_vecs(idx.k_max + 1);
  double max_eig = 0.0;
  for (int k = 0; k <= idx.k_max; ++k) {
    const int p = basis.block_size(k);
    const Eigen::MatrixXcd a = coeffs.middleCols(basis.block_start[k], p) * whiten[k].conjugate();
    const Eigen::MatrixXcd cov = (a.adjoint() * a) / static_cast<double>(n);
    Eigen::VectorXd vals;
    if (k == 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.real());
      vals = es.eigenvalues();
      block_vecs[k] = es.eigenvectors().cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
      vals = es.eigenvalues();
      block_vecs[k] = es.eigenvectors();
    }
    for (int c = 0; c < p; ++c) {
      const double v = std::max(0.0, vals[c]);
      cands.push_back({v, k, c});
      max_eig = std::max(max_eig, v);
    }
  }
  if (max_eig <= 1e-20 * energy / n) throw Error("zero variance");

  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.eigval != y.eigval) return x.eigval > y.eigval;
    if (x.k != y.k) return x.k < y.k;
    return x.index > y.index;  // eigenvalues come ascending; larger index = larger value
  });
  cands.resize(m);

  FbModel model;
  model.spec = spec;
  model.k_max = idx.k_max;
  model.mean = std::move(mean);
  model.components.resize(static_cast<Eigen::Index>(npx), m);
  for (int j = 0; j < m; ++j) {
    const Candidate& c = cands[j];
    model.omega.push_back(c.k);
    model.eigvals.push_back(c.eigval);
    std::vector<Complex> g(npx, Complex{});
    const int p = basis.block_size(c.k);
    const Eigen::VectorXcd coef = whiten[c.k] * block_vecs[c.k].col(c.index);
    for (int q = 0; q < p; ++q) {
      const Complex w = coef[q];
      const auto& fq = basis.functions[basis.block_start[c.k] + q].fourier;
      for (int s : support) g[s] += w * fq[s];
    }
    std::vector<Complex> img = detail::centered_idft(g, L);
    for (std::size_t px = 0; px < npx; ++px)
      model.components(static_cast<Eigen::Index>(px), j) = c.k == 0 ? Complex(img[px].real(), 0.0) : img[px];
  }
  lowdin(model.components, model.omega);
  return model;
}

std::vector<Complex> encode_complex(const FbModel& model, const Image& image) {
  check_side(model, image);
  const Eigen::Index npx = static_cast<Eigen::Index>(image.size());
  Eigen::VectorXd x(npx);
  for (Eigen::Index p = 0; p < npx; ++p) x[p] = image[p] - model.mean[p];
  const Eigen::VectorXcd z = model.components.adjoint() * x.cast<Complex>();
  std::vector<Complex> out(z.data(), z.data() + z.size());
  for (int j = 0; j < model.m(); ++j)
    if (model.omega[j] == 0) out[j] = {out[j].real(), 0.0};
  return out;
}

PolarCoeff encode(const FbModel& model, const Image& image) {
  return PolarCoeff::from_complex(encode_complex(model, image));
}

Eigen::MatrixXcd encode_stack(const FbModel& model, const ImageStack& images) {
  const Eigen::Index npx = static_cast<Eigen::Index>(model.mean.size());
  const Eigen::Index n = static_cast<Eigen::Index>(images.size());
  Eigen::MatrixXcd x(npx, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    check_side(model, images[i]);
    for (Eigen::Index p = 0; p < npx; ++p) x(p, i) = images[i][p] - model.mean[p];
  }
  Eigen::MatrixXcd z = model.components.adjoint() * x;
  for (int j = 0; j < model.m(); ++j)
    if (model.omega[j] == 0) z.row(j) = z.row(j).real().cast<Complex>();
  return z;
}

Image decode_complex(const FbModel& model, std::span<const Complex> z) {
  if (static_cast<int>(z.size()) != model.m()) throw Error("decode: coefficient length mismatch");
  Eigen::VectorXcd w(model.m());
  for (int j = 0; j < model.m(); ++j)
    w[j] = model.omega[j] == 0 ? Complex(z[j].real(), 0.0) : 2.0 * z[j];
  const Eigen::VectorXd x = (model.components * w).real();
  Image out = model.mean;
  for (std::size_t p = 0; p < out.size(); ++p) out[p] += x[static_cast<Eigen::Index>(p)];
  return out;
}

Image decode(const FbModel& model, const PolarCoeff& z) {
  return decode_complex(model, z.to_complex());
}

PolarCoeff rotate(const PolarCoeff& z, double alpha, std::span<const int> omega) {
  if (z.size() != omega.size()) throw Error("rotate: omega length mismatch");
  PolarCoeff out = z;
  for (std::size_t j = 0; j < z.size(); ++j)
    out.phi[j] = z.r[j] == 0.0 ? 0.0 : wrap_angle(z.phi[j] + alpha * omega[j]);
  return out;
}

std::vector<Complex> rotate_complex(std::span<const Complex> z, double alpha,
                                    std::span<const int> omega) {
  if (z.size() != omega.size()) throw Error("rotate: omega length mismatch");
  std::vector<Complex> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] * std::polar(1.0, alpha * omega[j]);
  return out;
}

namespace {
constexpr char kModelMagic[] = "FBSPCA1";  // 7 chars + NUL = 8 bytes
}

void save_model(const FbModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  detail::write_magic(os, kModelMagic);
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.side()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.m()));
  detail::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.k_max));
  for (int w : model.omega) detail::write_le<std::int32_t>(os, w);
  for (double e : model.eigvals) detail::write_le<double>(os, e);
  for (double v : model.mean.data()) detail::write_le<double>(os, v);
  const Eigen::Index npx = model.components.rows();
  for (int j = 0; j < model.m(); ++j)
    for (Eigen::Index p = 0; p < npx; ++p) detail::write_le<double>(os, model.components(p, j).real());
  for (int j = 0; j < model.m(); ++j)
    for (Eigen::Index p = 0; p < npx; ++p) detail::write_le<double>(os, model.components(p, j).imag());
  if (!os) throw Error("write failed: " + path);
}

FbModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  const std::string what = "model " + path;
  detail::expect_magic(is, kModelMagic, what);
  FbModel model;
  model.spec.image_side = static_cast<int>(detail::read_le<std::uint32_t>(is, what));
  const int m = static_cast<int>(detail::read_le<std::uint32_t>(is, what));
  model.k_max = static_cast<int>(detail::read_le<std::uint32_t>(is, what));
  const int L = model.spec.image_side;
  if (L < 1 || L > 65536 || m < 1) throw Error(what + ": implausible header");
  for (int j = 0; j < m; ++j) model.omega.push_back(detail::read_le<std::int32_t>(is, what));
  for (int j = 0; j < m; ++j) model.eigvals.push_back(detail::read_le<double>(is, what));
  model.mean = Image(L);
  for (double& v : model.mean.vec()) v = detail::read_le<double>(is, what);
  const Eigen::Index npx = static_cast<Eigen::Index>(L) * L;
  Eigen::MatrixXd re(npx, m), im(npx, m);
  for (int j = 0; j < m; ++j)
    for (Eigen::Index p = 0; p < npx; ++p) re(p, j) = detail::read_le<double>(is, what);
  for (int j = 0; j < m; ++j)
    for (Eigen::Index p = 0; p < npx; ++p) im(p, j) = detail::read_le<double>(is, what);
  model.components = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
  return model;
}

}  // namespace pgmm
