#include "bsuv/kernels/conv.hpp"

#include <algorithm>
#include <vector>

#include <Eigen/Core>

#include "bsuv/error.hpp"

namespace bsuv::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<RowMatrix>;
using ConstMapRM = Eigen::Map<const RowMatrix>;

// col[(c*9 + ky*3 + kx), oy*wo + ox] = src[c, oy*stride + ky - 1, ox*stride + kx - 1]
void im2col(const double* src, int channels, int hs, int ws, int stride, int ho, int wo, double* col) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int c = 0; c < channels; ++c) {
    const double* s = src + static_cast<std::size_t>(c) * hs * ws;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = col + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          const int sy = oy * stride + ky - 1;
          double* row = dst + static_cast<std::size_t>(oy) * wo;
          if (sy < 0 || sy >= hs) {
            std::fill_n(row, wo, 0.0);
            continue;
          }
          const double* srow = s + static_cast<std::size_t>(sy) * ws;
          for (int ox = 0; ox < wo; ++ox) {
            const int sx = ox * stride + kx - 1;
            row[ox] = (sx >= 0 && sx < ws) ? srow[sx] : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds columns back into dst (which is not cleared).
void col2im(const double* col, int channels, int hs, int ws, int stride, int ho, int wo, double* dst) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int c = 0; c < channels; ++c) {
    double* d = dst + static_cast<std::size_t>(c) * hs * ws;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* src = col + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          const int sy = oy * stride + ky - 1;
          if (sy < 0 || sy >= hs) continue;
          const double* row = src + static_cast<std::size_t>(oy) * wo;
          double* drow = d + static_cast<std::size_t>(sy) * ws;
          for (int ox = 0; ox < wo; ++ox) {
            const int sx = ox * stride + kx - 1;
            if (sx >= 0 && sx < ws) drow[sx] += row[ox];
          }
        }
      }
    }
  }
}

void check_weight(std::span<const double> weight, int cin, int cout) {
  if (weight.size() != static_cast<std::size_t>(cin) * cout * 9) {
    throw Error(Errc::ShapeMismatch, "convolution weight size does not match channel counts");
  }
}

// Sums per-thread weight gradients into the caller's buffer.
struct GradAccumulator {
  explicit GradAccumulator(std::span<double> target) : target_(target) {}
  std::vector<double> local() const { return std::vector<double>(target_.size(), 0.0); }
  void merge(const std::vector<double>& part) {
#pragma omp critical(bsuv_conv_grad_merge)
    for (std::size_t i = 0; i < part.size(); ++i) target_[i] += part[i];
  }
  std::span<double> target_;
};

}  // namespace

void conv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y) {
  check_weight(weight, x.c, cout);
  y = Tensor4(x.n, cout, x.h, x.w);
  const ConstMapRM wm(weight.data(), cout, x.c * 9);
  const Eigen::Index plane = static_cast<Eigen::Index>(x.plane_size());
#pragma omp parallel
  {
    std::vector<double> col(static_cast<std::size_t>(x.c) * 9 * x.plane_size());
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(x.sample(n).data(), x.c, x.h, x.w, 1, x.h, x.w, col.data());
      MapRM out(y.sample(n).data(), cout, plane);
      out.noalias() = wm * ConstMapRM(col.data(), x.c * 9, plane);
    }
  }
}

void conv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                      std::span<double> dweight) {
  const int cout = dy.c;
  check_weight(weight, x.c, cout);
  if (dy.n != x.n || dy.h != x.h || dy.w != x.w) throw Error(Errc::ShapeMismatch, "conv3x3 gradient shape");
  if (dx) *dx = Tensor4(x.n, x.c, x.h, x.w);
  const ConstMapRM wm(weight.data(), cout, x.c * 9);
  const Eigen::Index plane = static_cast<Eigen::Index>(x.plane_size());
  GradAccumulator acc(dweight);
#pragma omp parallel
  {
    std::vector<double> col(static_cast<std::size_t>(x.c) * 9 * x.plane_size());
    std::vector<double> dw = acc.local();
    MapRM dwm(dw.data(), cout, x.c * 9);
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      const ConstMapRM g(dy.sample(n).data(), cout, plane);
      im2col(x.sample(n).data(), x.c, x.h, x.w, 1, x.h, x.w, col.data());
      MapRM cm(col.data(), x.c * 9, plane);
      dwm.noalias() += g * cm.transpose();
      if (dx) {
        cm.noalias() = wm.transpose() * g;
        col2im(col.data(), x.c, x.h, x.w, 1, x.h, x.w, dx->sample(n).data());
      }
    }
    acc.merge(dw);
  }
}

void upconv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y) {
  check_weight(weight, x.c, cout);
  y = Tensor4(x.n, cout, 2 * x.h, 2 * x.w);
  const ConstMapRM wm(weight.data(), x.c, cout * 9);
  const Eigen::Index plane = static_cast<Eigen::Index>(x.plane_size());
#pragma omp parallel
  {
    std::vector<double> col(static_cast<std::size_t>(cout) * 9 * x.plane_size());
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      MapRM cm(col.data(), cout * 9, plane);
      cm.noalias() = wm.transpose() * ConstMapRM(x.sample(n).data(), x.c, plane);
      col2im(col.data(), cout, y.h, y.w, 2, x.h, x.w, y.sample(n).data());
    }
  }
}

void upconv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                        std::span<double> dweight) {
  const int cout = dy.c;
  check_weight(weight, x.c, cout);
  if (dy.n != x.n || dy.h != 2 * x.h || dy.w != 2 * x.w) throw Error(Errc::ShapeMismatch, "upconv gradient shape");
  if (dx) *dx = Tensor4(x.n, x.c, x.h, x.w);
  const ConstMapRM wm(weight.data(), x.c, cout * 9);
  const Eigen::Index plane = static_cast<Eigen::Index>(x.plane_size());
  GradAccumulator acc(dweight);
#pragma omp parallel
  {
    std::vector<double> col(static_cast<std::size_t>(cout) * 9 * x.plane_size());
    std::vector<double> dw = acc.local();
    MapRM dwm(dw.data(), x.c, cout * 9);
#pragma omp for schedule(static)
    for (int n = 0; n < x.n; ++n) {
      im2col(dy.sample(n).data(), cout, dy.h, dy.w, 2, x.h, x.w, col.data());
      const ConstMapRM cm(col.data(), cout * 9, plane);
      const ConstMapRM xm(x.sample(n).data(), x.c, plane);
      dwm.noalias() += xm * cm.transpose();
      if (dx) MapRM(dx->sample(n).data(), x.c, plane).noalias() = wm * cm;
    }
    acc.merge(dw);
  }
}

namespace reference {

void conv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y) {
  check_weight(weight, x.c, cout);
  y = Tensor4(x.n, cout, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < cout; ++co)
      for (int oy = 0; oy < x.h; ++oy)
        for (int ox = 0; ox < x.w; ++ox) {
          double s = 0.0;
          for (int ci = 0; ci < x.c; ++ci)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int iy = oy + ky - 1, ix = ox + kx - 1;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                s += weight[((static_cast<std::size_t>(co) * x.c + ci) * 3 + ky) * 3 + kx] * x.at(n, ci, iy, ix);
              }
          y.at(n, co, oy, ox) = s;
        }
}

void conv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                      std::span<double> dweight) {
  const int cout = dy.c;
  check_weight(weight, x.c, cout);
  if (dx) *dx = Tensor4(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int co = 0; co < cout; ++co)
      for (int oy = 0; oy < x.h; ++oy)
        for (int ox = 0; ox < x.w; ++ox) {
          const double g = dy.at(n, co, oy, ox);
          for (int ci = 0; ci < x.c; ++ci)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int iy = oy + ky - 1, ix = ox + kx - 1;
                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                const std::size_t wi = ((static_cast<std::size_t>(co) * x.c + ci) * 3 + ky) * 3 + kx;
                dweight[wi] += g * x.at(n, ci, iy, ix);
                if (dx) dx->at(n, ci, iy, ix) += g * weight[wi];
              }
        }
}

void upconv3x3_forward(const Tensor4& x, std::span<const double> weight, int cout, Tensor4& y) {
  check_weight(weight, x.c, cout);
  y = Tensor4(x.n, cout, 2 * x.h, 2 * x.w);
  for (int n = 0; n < x.n; ++n)
    for (int ci = 0; ci < x.c; ++ci)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j)
          for (int co = 0; co < cout; ++co)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int oy = 2 * i + ky - 1, ox = 2 * j + kx - 1;
                if (oy < 0 || oy >= y.h || ox < 0 || ox >= y.w) continue;
                y.at(n, co, oy, ox) +=
                    weight[((static_cast<std::size_t>(ci) * cout + co) * 3 + ky) * 3 + kx] * x.at(n, ci, i, j);
              }
}

void upconv3x3_backward(const Tensor4& x, std::span<const double> weight, const Tensor4& dy, Tensor4* dx,
                        std::span<double> dweight) {
  const int cout = dy.c;
  check_weight(weight, x.c, cout);
  if (dx) *dx = Tensor4(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n)
    for (int ci = 0; ci < x.c; ++ci)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j)
          for (int co = 0; co < cout; ++co)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                const int oy = 2 * i + ky - 1, ox = 2 * j + kx - 1;
                if (oy < 0 || oy >= dy.h || ox < 0 || ox >= dy.w) continue;
                const std::size_t wi = ((static_cast<std::size_t>(ci) * cout + co) * 3 + ky) * 3 + kx;
                const double g = dy.at(n, co, oy, ox);
                dweight[wi] += g * x.at(n, ci, i, j);
                if (dx) dx->at(n, ci, i, j) += g * weight[wi];
              }
}

}  // namespace reference

}  // namespace bsuv::kernels
