#include <doctest.h>

#include <cmath>
#include <functional>

#include "master/numerics/attention.hpp"
#include "master/numerics/flops.hpp"
#include "master/numerics/grad_check.hpp"
#include "master/numerics/ops.hpp"
#include "oracles.hpp"

using namespace master;
using nn::Tensor;

namespace {

std::vector<double> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

void check_abs(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

}  // namespace

TEST_CASE("affine: identity, substitution and naive oracle") {
  Tensor x({1, 2}, {1, 2});
  Tensor eye({2, 2}, {1, 0, 0, 1});
  check_abs(vals(nn::affine(x, eye, Tensor({2}, {0, 0}))), {1, 2}, 0);
  check_abs(vals(nn::affine(x, eye, Tensor({2}, {3, -3}))), {4, -1}, 0);

  Rng rng(11);
  auto a = oracle::random_vec(rng, 12), w = oracle::random_vec(rng, 8), b = oracle::random_vec(rng, 2);
  auto y = nn::affine(Tensor({3, 4}, a), Tensor({4, 2}, w), Tensor({2}, b));
  check_abs(vals(y), oracle::affine(a, w, b, 3, 4, 2), 1e-12);
}

TEST_CASE("affine: shape mismatch names both shapes") {
  Tensor x({2, 3});
  Tensor w({4, 2});
  try {
    nn::affine(x, w, Tensor());
    FAIL("expected ShapeError");
  } catch (const nn::ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2, 3]") != std::string::npos);
    CHECK(msg.find("[4, 2]") != std::string::npos);
  }
}

TEST_CASE("softmax_temp examples") {
  check_abs(vals(nn::softmax_temp(Tensor({3}, {0, 0, 0}), 0.7)), {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1e-15);
  check_abs(vals(nn::softmax_temp(Tensor({2}, {std::log(3.0), 0}), 1.0)), {0.75, 0.25}, 1e-15);
  const double s = std::exp(0.5) + std::exp(1.0) + std::exp(1.5);
  check_abs(vals(nn::softmax_temp(Tensor({3}, {1, 2, 3}), 2.0)),
            {std::exp(0.5) / s, std::exp(1.0) / s, std::exp(1.5) / s}, 1e-12);
  CHECK_THROWS_AS(nn::softmax_temp(Tensor({2}, {1, 2}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(nn::softmax_temp(Tensor({2}, {1, 2}), -1.0), std::invalid_argument);
}

TEST_CASE("softmax_temp over a middle axis") {
  Rng rng(3);
  auto z = oracle::random_vec(rng, 2 * 3 * 4);
  auto y = nn::softmax_temp(Tensor({2, 3, 4}, z), 1.5, 1);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 4; ++c) {
      oracle::Vec col;
      for (std::size_t b = 0; b < 3; ++b) col.push_back(z[(a * 3 + b) * 4 + c]);
      auto ref = oracle::softmax(col, 1.5);
      for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(y.at({a, b, c}) - ref[b]) < 1e-14);
    }
}

TEST_CASE("layer_norm examples") {
  Tensor g = Tensor::full({4}, 1.0), b({4});
  check_abs(vals(nn::layer_norm(Tensor({4}, {2, 2, 2, 2}), g, b)), {0, 0, 0, 0}, 0);
  Tensor g2 = Tensor::full({2}, 1.0), b2({2});
  check_abs(vals(nn::layer_norm(Tensor({2}, {1, -1}), g2, b2)), {1, -1}, 1e-5);

  Rng rng(5);
  auto x = oracle::random_vec(rng, 8), gain = oracle::random_vec(rng, 8), bias = oracle::random_vec(rng, 8);
  check_abs(vals(nn::layer_norm(Tensor({8}, x), Tensor({8}, gain), Tensor({8}, bias))),
            oracle::layer_norm_row(x, gain, bias), 1e-10);
}

TEST_CASE("sinusoidal_pe examples") {
  auto pe = nn::sinusoidal_pe(8, 4);
  CHECK(pe.shape() == nn::Shape{8, 4});
  check_abs({pe.values().begin(), pe.values().begin() + 4}, {0, 1, 0, 1}, 0);
  const double f = std::pow(10000.0, -0.5);
  CHECK(pe.at({1, 0}) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  CHECK(pe.at({1, 1}) == doctest::Approx(std::cos(1.0)).epsilon(1e-15));
  CHECK(std::abs(pe.at({1, 2}) - std::sin(f)) < 1e-15);
  CHECK(std::abs(pe.at({1, 3}) - std::cos(f)) < 1e-15);
  const auto wide = nn::sinusoidal_pe(16, 10);
  for (double v : wide.values()) CHECK(std::abs(v) <= 1.0);
  CHECK_THROWS(nn::sinusoidal_pe(4, 5));
}

TEST_CASE("multi_head_attention examples") {
  Rng rng(7);
  const std::size_t d = 4;
  nn::AttentionWeights w{Tensor({d, d}, oracle::random_vec(rng, 16)),
                         Tensor({d, d}, oracle::random_vec(rng, 16)),
                         Tensor({d, d}, oracle::random_vec(rng, 16))};

  SUBCASE("single token") {
    auto x = oracle::random_vec(rng, d);
    auto r = nn::multi_head_attention(Tensor({1, d}, x), Tensor({1, d}, x), Tensor({1, d}, x), w, 2);
    check_abs(vals(r.weights), {1, 1}, 0);
    check_abs(vals(r.output), oracle::matmul(x, vals(w.value), 1, d, d), 1e-14);
  }
  SUBCASE("identical tokens split evenly") {
    auto x = oracle::random_vec(rng, d);
    oracle::Vec xx = x;
    xx.insert(xx.end(), x.begin(), x.end());
    Tensor t({2, d}, xx);
    auto r = nn::multi_head_attention(t, t, t, w, 2);
    for (double v : r.weights.values()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("per-head loop oracle") {
    auto x = oracle::random_vec(rng, 3 * d);
    Tensor t({3, d}, x);
    auto r = nn::multi_head_attention(t, t, t, w, 2);
    auto ref = oracle::attention(x, vals(w.query), vals(w.key), vals(w.value), 3, d, 2);
    check_abs(vals(r.output), ref.out, 1e-10);
    check_abs(vals(r.weights), ref.weights, 1e-10);
  }
  SUBCASE("indivisible width rejected") {
    Tensor t({3, d});
    CHECK_THROWS_AS(nn::multi_head_attention(t, t, t, w, 3), std::invalid_argument);
  }
}

TEST_CASE("ffn_relu_residual examples") {
  const std::size_t d = 3, h = 2;
  Rng rng(9);
  auto x = oracle::random_vec(rng, 2 * d);
  nn::FeedForwardWeights zero{Tensor({d, h}), Tensor({h}), Tensor({h, d}), Tensor({d})};
  check_abs(vals(nn::ffn_relu_residual(Tensor({2, d}, x), zero)), x, 0);

  nn::FeedForwardWeights clamp{Tensor({d, h}), Tensor({h}, {-1, -1}), Tensor({h, d}, oracle::random_vec(rng, h * d)),
                               Tensor({d}, {0.5, -0.25, 2})};
  check_abs(vals(nn::ffn_relu_residual(Tensor({1, d}), clamp)), {0.5, -0.25, 2}, 0);

  auto w1 = oracle::random_vec(rng, d * h), b1 = oracle::random_vec(rng, h);
  auto w2 = oracle::random_vec(rng, h * d), b2 = oracle::random_vec(rng, d);
  nn::FeedForwardWeights rw{Tensor({d, h}, w1), Tensor({h}, b1), Tensor({h, d}, w2), Tensor({d}, b2)};
  check_abs(vals(nn::ffn_relu_residual(Tensor({2, d}, x), rw)), oracle::ffn(x, w1, b1, w2, b2, 2, d, h), 1e-12);
}

TEST_CASE("backward examples") {
  Tensor x({2}, {1, -2}, true);
  nn::backward(nn::sum(nn::square(x)));
  check_abs({x.grad().begin(), x.grad().end()}, {2, -4}, 0);

  SUBCASE("accumulates until reset") {
    nn::backward(nn::sum(nn::square(x)));
    check_abs({x.grad().begin(), x.grad().end()}, {4, -8}, 0);
    x.zero_grad();
    check_abs({x.grad().begin(), x.grad().end()}, {0, 0}, 0);
  }
  SUBCASE("constant loss gives zero gradient") {
    Tensor p({2}, {1, 2}, true);
    Tensor c = nn::sum(p.detach());
    nn::backward(c);
    CHECK((!p.has_grad() || (p.grad()[0] == 0 && p.grad()[1] == 0)));
  }
  SUBCASE("non-scalar loss rejected") { CHECK_THROWS(nn::backward(nn::square(x))); }
}

TEST_CASE("tape records ops in topological order and visits each once") {
  Tensor a({2}, {1, 2}, true);
  Tensor b = nn::square(a);
  Tensor c = nn::add(b, b);  // fan-out of b
  nn::Tape tape(nn::sum(c));
  const auto ops = tape.ops();
  CHECK(ops.size() == 4);
  CHECK(ops.front() == "leaf");
  CHECK(ops.back() == "sum");
  tape.backward();
  // d/da sum(2 a^2) = 4a
  check_abs({a.grad().begin(), a.grad().end()}, {4, 8}, 0);
}

TEST_CASE("grad_check examples") {
  Rng rng(13);
  Tensor p({3}, oracle::random_vec(rng, 3), true);
  auto quad = nn::grad_check([&] { return nn::sum(nn::square(p)); }, {{"p", p}}, 1e-5, 1e-9);
  CHECK(quad.max_relative_error() < 1e-9);

  Tensor x({5, 4}, oracle::random_vec(rng, 20));
  Tensor y({5, 2}, oracle::random_vec(rng, 10));
  Tensor w({4, 2}, oracle::random_vec(rng, 8), true);
  Tensor b({2}, oracle::random_vec(rng, 2), true);
  auto mse = nn::grad_check([&] { return nn::sum(nn::square(nn::sub(nn::affine(x, w, b), y))); },
                            {{"w", w}, {"b", b}});
  CHECK(mse.max_relative_error() < 1e-6);

  Tensor z({3, 4}, oracle::random_vec(rng, 12), true);
  Tensor target({3, 2}, {1, -2, 3, 0.5, -1, 2});
  auto chain = nn::grad_check(
      [&] { return nn::sum(nn::mul(nn::softmax_temp(nn::affine(z, w, b), 0.7), target)); },
      {{"z", z}, {"w", w}, {"b", b}});
  for (const auto& blk : chain.blocks) {
    CAPTURE(blk.name);
    CAPTURE(blk.analytic);
    CAPTURE(blk.numeric);
    CHECK(blk.max_relative_error < chain.tolerance);
  }
}

TEST_CASE("every primitive matches finite differences") {
  Rng rng(21);
  auto rnd = [&](nn::Shape s) {
    const auto n = nn::numel(s);
    return Tensor(std::move(s), oracle::random_vec(rng, n), true);
  };
  Tensor a = rnd({2, 3, 4}), b = rnd({2, 3, 4}), bias = rnd({4}), w = rnd({4, 3});
  Tensor g = rnd({4}), lb = rnd({4}), k = rnd({2, 5, 4}), v = rnd({2, 4, 5});
  // Fixed linear functional so the check sees every output coordinate.
  auto weighted = [](const Tensor& t) {
    std::vector<double> r(t.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sin(1.3 * static_cast<double>(i) + 0.5);
    return nn::sum(nn::mul(t, Tensor(t.shape(), r)));
  };
  struct Case {
    const char* name;
    std::function<Tensor()> fn;
    std::vector<nn::NamedTensor> params;
  };
  std::vector<Case> cases{
      {"add", [&] { return weighted(nn::add(a, b)); }, {{"a", a}, {"b", b}}},
      {"add_bias", [&] { return weighted(nn::add(a, bias)); }, {{"a", a}, {"bias", bias}}},
      {"sub", [&] { return weighted(nn::sub(a, b)); }, {{"a", a}, {"b", b}}},
      {"mul", [&] { return weighted(nn::mul(a, b)); }, {{"a", a}, {"b", b}}},
      {"mul_bcast", [&] { return weighted(nn::mul(a, bias)); }, {{"a", a}, {"bias", bias}}},
      {"scale", [&] { return weighted(nn::scale(a, -1.7)); }, {{"a", a}}},
      {"relu", [&] { return weighted(nn::relu(a)); }, {{"a", a}}},
      {"affine", [&] { return nn::sum(nn::square(nn::affine(a, w, Tensor({3}, {0.1, 0.2, 0.3}, true)))); }, {{"a", a}, {"w", w}}},
      {"bmm", [&] { return nn::sum(nn::square(nn::batched_matmul(a, v))); }, {{"a", a}, {"v", v}}},
      {"bmm_t", [&] { return nn::sum(nn::square(nn::batched_matmul(a, k, true))); }, {{"a", a}, {"k", k}}},
      {"bmm_inv", [&] { return nn::sum(nn::square(nn::batched_matmul(a, v, false, true))); }, {{"a", a}, {"v", v}}},
      {"softmax", [&] { return weighted(nn::softmax_temp(a, 1.3)); }, {{"a", a}}},
      {"softmax_axis", [&] { return weighted(nn::softmax_temp(a, 0.8, 1, true)); }, {{"a", a}}},
      {"layer_norm", [&] { return weighted(nn::layer_norm(a, g, lb)); }, {{"a", a}, {"g", g}, {"lb", lb}}},
      {"permute", [&] { return weighted(nn::mul(nn::permute(a, {2, 0, 1}), nn::permute(b, {2, 0, 1}))); }, {{"a", a}, {"b", b}}},
      {"select", [&] { return nn::sum(nn::square(nn::select(a, 1, 2))); }, {{"a", a}}},
  };
  for (auto& c : cases) {
    CAPTURE(c.name);
    auto report = nn::grad_check(c.fn, c.params, 1e-5, 1e-6);
    CHECK(report.max_relative_error() < 1e-6);
  }
}

TEST_CASE("non-finite values raise when checks are on") {
  const bool before = nn::finite_checks_enabled();
  nn::set_finite_checks(true);
  CHECK_THROWS_AS(Tensor({2}, {1.0, std::nan("")}), nn::NonFiniteError);
  CHECK_THROWS_AS(nn::scale(Tensor::full({1}, 1e308), 10.0), nn::NonFiniteError);
  CHECK_THROWS_AS(nn::mul(Tensor::full({1}, 1e200), Tensor::full({1}, 1e200)), nn::NonFiniteError);
  nn::set_finite_checks(before);
}

TEST_CASE("no-grad guard builds no graph") {
  Tensor a({2}, {1, 2}, true);
  {
    nn::NoGradGuard guard;
    Tensor b = nn::square(a);
    CHECK_FALSE(b.requires_grad());
  }
  CHECK(nn::square(a).requires_grad());
}

TEST_CASE("flop counter attributes work to scopes") {
  nn::FlopCounter counter;
  Tensor x({3, 4});
  Tensor w({4, 5});
  {
    nn::FlopScope outer("outer");
    nn::matmul(x, w);
    {
      nn::FlopScope inner("inner");
      nn::softmax_temp(Tensor({2, 5}), 1.0);
    }
  }
  CHECK(counter.under("outer/inner") == nn::cost::softmax(2, 5));
  CHECK(counter.under("outer") == nn::cost::matmul(1, 3, 4, 5) + nn::cost::softmax(2, 5));
  CHECK(counter.under("out") == 0.0);
  CHECK(counter.total() == counter.under("outer"));
}
