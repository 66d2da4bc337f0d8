// Copyright 2026 The aeroop Authors
// SPDX-License-Identifier: Apache-2.0

#include <unsupported/Eigen/FFT>

#include "aeroop/error.hpp"
#include "aeroop/frft.hpp"

namespace aeroop {
namespace {

Tensor transform_2d(const Tensor& field, bool inverse, const char* op) {
  if (field.rank() != 2 || !field.is_complex()) {
    throw ShapeError(std::string(op) + ": expects a complex H x W field, got " +
                     shape_str(field.shape()) + " " + dtype_str(field.dtype()));
  }
  const std::size_t h = field.dim(0), w = field.dim(1);
  Eigen::FFT<double> fft;
  std::vector<cplx> data(field.cvalues().begin(), field.cvalues().end());
  std::vector<cplx> in, out;

  in.resize(w);
  for (std::size_t i = 0; i < h; ++i) {
    std::copy_n(data.begin() + i * w, w, in.begin());
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    std::copy_n(out.begin(), w, data.begin() + i * w);
  }
  in.resize(h);
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < h; ++i) in[i] = data[i * w + j];
    inverse ? fft.inv(out, in) : fft.fwd(out, in);
    for (std::size_t i = 0; i < h; ++i) data[i * w + j] = out[i];
  }
  return Tensor::complex({h, w}, std::move(data));
}

}  // namespace

Tensor fft_2d(const Tensor& field) { return transform_2d(field, false, "fft_2d"); }

// Eigen's inverse already applies 1/n per axis.
Tensor ifft_2d(const Tensor& spectrum) { return transform_2d(spectrum, true, "ifft_2d"); }

}  // namespace aeroop
