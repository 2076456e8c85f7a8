#include <doctest.h>

#include <cmath>
#include <thread>

#include "bsuv/error.hpp"
#include "bsuv/kernels/conv.hpp"
#include "bsuv/network.hpp"
#include "support.hpp"

using namespace bsuv;
using bsuv::testing::random_input;

namespace {

Tensor4 random_tensor(int n, int c, int h, int w, Rng& rng) {
  Tensor4 t(n, c, h, w);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.data) v = u(rng);
  return t;
}

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

NetworkConfig small_config() {
  NetworkConfig c;
  c.stage_widths = {4, 8, 8};
  c.convs_per_stage = 2;
  return c;
}

}  // namespace

TEST_CASE("im2col convolution matches the direct loop") {
  Rng rng(3);
  for (auto [n, cin, cout, h, w] : {std::array{1, 1, 1, 1, 1}, std::array{2, 3, 5, 7, 6}, std::array{3, 12, 4, 8, 8}}) {
    const Tensor4 x = random_tensor(n, cin, h, w, rng);
    const auto wt = random_vec(static_cast<std::size_t>(cout) * cin * 9, rng);
    Tensor4 fast, ref;
    kernels::conv3x3_forward(x, wt, cout, fast);
    kernels::reference::conv3x3_forward(x, wt, cout, ref);
    CHECK(fast.same_shape(ref));
    CHECK(max_abs_diff(fast.data, ref.data) < 1e-12);

    const Tensor4 dy = random_tensor(n, cout, h, w, rng);
    Tensor4 dx_fast, dx_ref;
    std::vector<double> dw_fast(wt.size(), 0.5), dw_ref(wt.size(), 0.5);
    kernels::conv3x3_backward(x, wt, dy, &dx_fast, dw_fast);
    kernels::reference::conv3x3_backward(x, wt, dy, &dx_ref, dw_ref);
    CHECK(max_abs_diff(dx_fast.data, dx_ref.data) < 1e-12);
    CHECK(max_abs_diff(dw_fast, dw_ref) < 1e-11);
  }
}

TEST_CASE("transposed convolution matches the direct loop and doubles the size") {
  Rng rng(4);
  for (auto [n, cin, cout, h, w] : {std::array{1, 1, 1, 1, 1}, std::array{2, 6, 3, 4, 5}}) {
    const Tensor4 x = random_tensor(n, cin, h, w, rng);
    const auto wt = random_vec(static_cast<std::size_t>(cout) * cin * 9, rng);
    Tensor4 fast, ref;
    kernels::upconv3x3_forward(x, wt, cout, fast);
    kernels::reference::upconv3x3_forward(x, wt, cout, ref);
    CHECK(fast.h == 2 * h);
    CHECK(fast.w == 2 * w);
    CHECK(max_abs_diff(fast.data, ref.data) < 1e-12);

    const Tensor4 dy = random_tensor(n, cout, 2 * h, 2 * w, rng);
    Tensor4 dx_fast, dx_ref;
    std::vector<double> dw_fast(wt.size(), 0.0), dw_ref(wt.size(), 0.0);
    kernels::upconv3x3_backward(x, wt, dy, &dx_fast, dw_fast);
    kernels::reference::upconv3x3_backward(x, wt, dy, &dx_ref, dw_ref);
    CHECK(max_abs_diff(dx_fast.data, dx_ref.data) < 1e-12);
    CHECK(max_abs_diff(dw_fast, dw_ref) < 1e-11);
  }
}

TEST_CASE("single-pixel transposed convolution places the kernel at 2i+k-1") {
  // One input pixel of value 1 at (0,0) with a kernel holding 1..9.
  Tensor4 x(1, 1, 1, 1, 1.0);
  std::vector<double> wt{1, 2, 3, 4, 5, 6, 7, 8, 9};
  Tensor4 y;
  kernels::upconv3x3_forward(x, wt, 1, y);
  // Offsets -1 fall outside; ky,kx in {1,2} land on rows/cols 0,1.
  CHECK(y.at(0, 0, 0, 0) == 5);
  CHECK(y.at(0, 0, 0, 1) == 6);
  CHECK(y.at(0, 0, 1, 0) == 8);
  CHECK(y.at(0, 0, 1, 1) == 9);
}

TEST_CASE("output keeps the input resolution and stays inside (0,1)") {
  const SegmentationNet net = SegmentationNet::build(small_config(), 7);
  Rng rng(1);
  for (auto [h, w] : {std::pair{16, 16}, std::pair{32, 24}, std::pair{64, 64}}) {
    const NetworkInput in[] = {random_input(h, w, rng)};
    const Tensor4 out = net.predict(to_batch(in));
    CHECK(out.n == 1);
    CHECK(out.c == 1);
    CHECK(out.h == h);
    CHECK(out.w == w);
    for (double v : out.data) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
}

TEST_CASE("sizes that do not pool evenly are rejected until padded") {
  const SegmentationNet net = SegmentationNet::build(small_config(), 7);
  Rng rng(2);
  const NetworkInput raw = random_input(30, 18, rng);
  const NetworkInput in[] = {raw};
  CHECK_THROWS_AS(net.predict(to_batch(in)), Error);
  try {
    net.predict(to_batch(in));
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ShapeNotPoolable);
  }
  auto [padded, record] = pad_for_network(raw, small_config().pooling_steps());
  CHECK(padded.height() == 32);
  CHECK(padded.width() == 20);
  // Edge replication: the padded row equals the last real row.
  CHECK(padded.at(5, 31, 3) == raw.at(5, 29, 3));
  CHECK(padded.at(5, 4, 19) == raw.at(5, 4, 17));
  const NetworkInput pin[] = {padded};
  const ProbabilityMap full = output_map(net.predict(to_batch(pin)), 0);
  const ProbabilityMap cropped = crop_to_original(full, record);
  CHECK(cropped.height() == 30);
  CHECK(cropped.width() == 18);
  CHECK(cropped.at(29, 17) == full.at(29, 17));
}

TEST_CASE("evaluation mode is deterministic and safe to share across threads") {
  const SegmentationNet net = SegmentationNet::build(small_config(), 11);
  Rng rng(5);
  const NetworkInput in[] = {random_input(16, 16, rng), random_input(16, 16, rng)};
  const Tensor4 x = to_batch(in);
  const Tensor4 a = net.predict(x);
  Tensor4 b, c;
  std::thread t1([&] { b = net.predict(x); });
  std::thread t2([&] { c = net.predict(x); });
  t1.join();
  t2.join();
  CHECK(a.data == b.data);
  CHECK(a.data == c.data);
}

TEST_CASE("training mode draws dropout from the supplied generator") {
  SegmentationNet net = SegmentationNet::build(small_config(), 11);
  Rng data(5);
  const NetworkInput in[] = {random_input(16, 16, data)};
  const Tensor4 x = to_batch(in);
  Rng r1(9), r2(9), r3(10);
  ForwardTape t1, t2, t3;
  const Tensor4 a = net.forward_train(x, r1, t1, false);
  const Tensor4 b = net.forward_train(x, r2, t2, false);
  const Tensor4 c = net.forward_train(x, r3, t3, false);
  CHECK(a.data == b.data);
  CHECK(a.data != c.data);
}

TEST_CASE("running statistics move towards batch statistics only when asked") {
  SegmentationNet net = SegmentationNet::build(small_config(), 12);
  Rng data(6);
  const NetworkInput in[] = {random_input(8, 8, data), random_input(8, 8, data)};
  const Tensor4 x = to_batch(in);
  const auto before = net.parameters().at("enc0.conv0.bn.running_mean").value;
  Rng rng(1);
  ForwardTape tape;
  net.forward_train(x, rng, tape, false);
  CHECK(net.parameters().at("enc0.conv0.bn.running_mean").value == before);
  net.forward_train(x, rng, tape, true);
  CHECK(net.parameters().at("enc0.conv0.bn.running_mean").value != before);
}

TEST_CASE("parameter layout follows the stage widths") {
  NetworkConfig cfg;  // default widths
  const SegmentationNet net = SegmentationNet::empty(cfg);
  const auto& p = net.parameters();
  CHECK(p.at("enc0.conv0.weight").shape == std::vector<int>{64, 12, 3, 3});
  CHECK(p.at("enc3.conv1.weight").shape == std::vector<int>{512, 512, 3, 3});
  CHECK(p.at("dec2.up.weight").shape == std::vector<int>{512, 256, 3, 3});
  CHECK(p.at("dec2.conv0.weight").shape == std::vector<int>{256, 512, 3, 3});
  CHECK(p.at("dec0.conv1.weight").shape == std::vector<int>{64, 64, 3, 3});
  CHECK(p.at("head.weight").shape == std::vector<int>{1, 64, 3, 3});
  CHECK_FALSE(p.at("enc0.conv0.bn.running_var").trainable);
  CHECK(cfg.spatial_multiple() == 8);
}

TEST_CASE("initialization is seeded and fan-in scaled") {
  const SegmentationNet a = SegmentationNet::build(small_config(), 1);
  const SegmentationNet b = SegmentationNet::build(small_config(), 1);
  const SegmentationNet c = SegmentationNet::build(small_config(), 2);
  CHECK(a.parameters().at("enc1.conv0.weight").value == b.parameters().at("enc1.conv0.weight").value);
  CHECK(a.parameters().at("enc1.conv0.weight").value != c.parameters().at("enc1.conv0.weight").value);
  const double bound = std::sqrt(6.0 / (4 * 9));
  for (double v : a.parameters().at("enc1.conv0.weight").value) CHECK(std::abs(v) <= bound);
  for (double v : a.parameters().at("enc1.conv0.bn.gamma").value) CHECK(v == 1.0);
}

TEST_CASE("invalid network configurations are rejected") {
  NetworkConfig c;
  c.stage_widths = {};
  CHECK_THROWS_AS(c.validate(), Error);
  c.stage_widths = {4, 0};
  CHECK_THROWS_AS(c.validate(), Error);
  c.stage_widths = {4};
  c.dropout_rate = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.dropout_rate = 0.0;
  c.convs_per_stage = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("backpropagation agrees with central differences") {
  NetworkConfig cfg = small_config();
  const auto samples = bsuv::testing::network_gradient_check(cfg, 21, 2, 8, 8, 40, 1e-6);
  for (const auto& s : samples) {
    INFO(s.tensor << "[" << s.index << "] analytic " << s.analytic << " numeric " << s.numeric);
    CHECK(s.rel_error < 1e-4);
  }
}

TEST_CASE("single-stage network (no pooling) also backpropagates correctly") {
  NetworkConfig cfg;
  cfg.stage_widths = {3};
  cfg.convs_per_stage = 1;
  const auto samples = bsuv::testing::network_gradient_check(cfg, 5, 2, 4, 4, 15, 1e-6);
  for (const auto& s : samples) {
    INFO(s.tensor << "[" << s.index << "] analytic " << s.analytic << " numeric " << s.numeric);
    CHECK(s.rel_error < 1e-4);
  }
}

TEST_CASE("binarize thresholds strictly above theta") {
  const ProbabilityMap p(1, 3, std::vector<double>{0.49, 0.5, 0.51});
  const BinaryMask m = binarize(p);
  CHECK(m[0] == 0);
  CHECK(m[1] == 0);
  CHECK(m[2] == 1);
  CHECK_THROWS_AS(binarize(p, 1.0), Error);
}
