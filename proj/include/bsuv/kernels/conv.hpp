#pragma once

#include <span>

#include "bsuv/tensor.hpp"

namespace bsuv::kernels {

// 3x3 convolution, stride 1, zero padding 1 (spatial shape preserved).
//   weight layout: [cout][cin][3][3]
//   x: [n, cin, h, w]  ->  y: [n, cout, h, w]
void conv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y);
// Accumulates into dweight; writes dx when non-null.
void conv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                      std::span<double> dweight);

// 3x3 transposed convolution with stride 2, output exactly (2h, 2w):
//   y[co, 2i+ky-1, 2j+kx-1] += weight[ci][co][ky][kx] * x[ci, i, j]
//   weight layout: [cin][cout][3][3]
void upconv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y);
void upconv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                        std::span<double> dweight);

namespace reference {
// Direct nested-loop versions with identical contracts.
void conv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y);
void conv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                      std::span<double> dweight);
void upconv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y);
void upconv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                        std::span<double> dweight);
}  // namespace reference

}  // namespace bsuv::kernels
