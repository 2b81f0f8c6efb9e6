#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "../support/gradcheck.hpp"
#include "auvhunt/binary_io.hpp"
#include "auvhunt/nn/checkpoint.hpp"
#include "auvhunt/nn/params.hpp"

using namespace auvhunt;
using namespace auvhunt::nn;
using auvhunt::testing::DTape;
using auvhunt::testing::DTensor;
using auvhunt::testing::DVar;

TEST_CASE("softmax of equal logits is uniform") {
  Tape tape;
  const auto y = softmax(tape.constant(Tensor({1, 3}, std::vector<float>{0, 0, 0})));
  for (int i = 0; i < 3; ++i) CHECK(y.value()[i] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax is shift invariant and stable for large logits") {
  Tape tape;
  const Tensor a({2, 3}, std::vector<float>{1e4f, 0.0f, -1e4f, 1.0f, 2.0f, 3.0f});
  Tensor shifted = a;
  for (std::size_t c = 0; c < 3; ++c) shifted.at(1, c) += 50.0f;
  const auto y1 = softmax(tape.constant(a));
  const auto y2 = softmax(tape.constant(shifted));
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(std::isfinite(y1.value().at(r, c)));
      s += y1.value().at(r, c);
    }
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(y1.value().at(1, c) == doctest::Approx(y2.value().at(1, c)).epsilon(1e-6));
  }
  CHECK(y1.value().at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("relu") {
  Tape tape;
  const auto y = relu(tape.constant(Tensor({1, 3}, std::vector<float>{-2.0f, 0.5f, 3.0f})));
  CHECK(y.value()[0] == 0.0f);
  CHECK(y.value()[1] == 0.5f);
  CHECK(y.value()[2] == 3.0f);
}

TEST_CASE("shape mismatch names both shapes") {
  Tape tape;
  const auto a = tape.constant(Tensor({2, 3}));
  const auto b = tape.constant(Tensor({2, 3}));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("(2, 3)") != std::string::npos);
    CHECK(msg.find("matmul") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, tape.constant(Tensor({3, 2}))), ShapeError);
  CHECK_THROWS_AS(reshape(a, 4, 2), ShapeError);
}

TEST_CASE("gradient of sum is all ones") {
  Tape tape;
  const auto x = tape.variable(Tensor({2, 2}, std::vector<float>{1, -2, 3, 4}));
  tape.backward(sum(x));
  const auto g = tape.grad(x);
  for (float v : g.data()) CHECK(v == 1.0f);
}

TEST_CASE("backward rejects non-scalar loss and non-recording tapes") {
  Tape tape;
  const auto x = tape.variable(Tensor({2, 2}));
  CHECK_THROWS_AS(tape.backward(x), ShapeError);
  Tape frozen(false);
  const auto y = frozen.variable(Tensor({1, 1}));
  CHECK_THROWS_AS(frozen.backward(y), ValidationError);
  CHECK_FALSE(frozen.requires_grad(y));
}

TEST_CASE("matmul 2x3 by 3x2 matches finite differences") {
  std::mt19937_64 rng(7);
  const auto graph = [](DTape&, const std::vector<DVar>& x) { return matmul(x[0], x[1]); };
  const auto r = testing::gradient_check(
      graph, {testing::random_tensor(rng, 2, 3), testing::random_tensor(rng, 3, 2)}, rng);
  CHECK_MESSAGE(r.ok, r.detail);
}

TEST_CASE("every op passes randomized gradient checks") {
  std::mt19937_64 rng(20240611);
  for (const auto& op : testing::op_cases()) {
    for (int trial = 0; trial < 5; ++trial) {
      auto [graph, inputs] = op.make(rng);
      const auto r = testing::gradient_check(graph, inputs, rng);
      CHECK_MESSAGE(r.ok, op.name << " trial " << trial << ": " << r.detail);
    }
  }
}

TEST_CASE("gradients accumulate when a node feeds several consumers") {
  DTape tape;
  const auto x = tape.variable(DTensor({1, 2}, std::vector<double>{3.0, -1.0}));
  tape.backward(sum(mul(x, x)));
  CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
  CHECK(tape.grad(x)[1] == doctest::Approx(-2.0));
}

TEST_CASE("single key attention returns the value row") {
  Tape tape;
  const auto q = tape.constant(Tensor({3, 2}, std::vector<float>{1, 2, -3, 4, 0, 0}));
  const auto k = tape.constant(Tensor({1, 2}, std::vector<float>{0.5f, -0.5f}));
  const auto v = tape.constant(Tensor({1, 3}, std::vector<float>{7, 8, 9}));
  const auto out = adaptive_attention<float>({q}, k, v);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(out.value().at(r, 0) == 7.0f);
    CHECK(out.value().at(r, 2) == 9.0f);
  }
}

TEST_CASE("single agent attention matches a direct implementation") {
  std::mt19937_64 rng(3);
  const auto q = testing::random_tensor(rng, 4, 3);
  const auto k = testing::random_tensor(rng, 5, 3);
  const auto v = testing::random_tensor(rng, 5, 2);
  DTape tape;
  const auto out = adaptive_attention<double>({tape.constant(q)}, tape.constant(k), tape.constant(v));
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> w(5);
    double z = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t d = 0; d < 3; ++d) s += q.at(i, d) * k.at(j, d);
      w[j] = std::exp(s / std::sqrt(3.0));
      z += w[j];
    }
    for (std::size_t c = 0; c < 2; ++c) {
      double expect = 0.0;
      for (std::size_t j = 0; j < 5; ++j) expect += w[j] / z * v.at(j, c);
      CHECK(out.value().at(i, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("multi-agent attention concatenates per-agent heads") {
  std::mt19937_64 rng(5);
  DTape tape;
  const auto k = tape.constant(testing::random_tensor(rng, 4, 2));
  const auto v = tape.constant(testing::random_tensor(rng, 4, 3));
  const auto q1 = tape.constant(testing::random_tensor(rng, 2, 2));
  const auto q2 = tape.constant(testing::random_tensor(rng, 2, 2));
  const auto joint = adaptive_attention<double>({q1, q2}, k, v);
  const auto a1 = adaptive_attention<double>({q1}, k, v);
  const auto a2 = adaptive_attention<double>({q2}, k, v);
  REQUIRE(joint.value().cols() == 6);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(joint.value().at(r, c) == a1.value().at(r, c));
      CHECK(joint.value().at(r, 3 + c) == a2.value().at(r, c));
    }
  }
  const auto w = attention_weights(q1, k);
  for (std::size_t r = 0; r < 2; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) s += w.value().at(r, c);
    CHECK(std::abs(s - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(adaptive_attention<double>({tape.constant(DTensor({2, 5}))}, k, v), ShapeError);
}

TEST_CASE("forward and backward are deterministic") {
  auto run = [] {
    Rng rng(11);
    ParameterSet params;
    const auto d1 = Dense::create(params, "a", 4, 8, rng);
    const auto d2 = Dense::create(params, "b", 8, 2, rng);
    Tape tape;
    Binding bind(tape, params);
    Tensor x({3, 4});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<float>(i));
    const auto y = d2(bind, relu(d1(bind, tape.constant(x))));
    tape.backward(mean(mul(y, y)));
    return bind.gradients();
  };
  CHECK(run() == run());
}

TEST_CASE("adam converges on a quadratic bowl") {
  ParameterSet params;
  params.add("x", Tensor({1, 3}, std::vector<float>{1.0f, -0.7f, 0.6f}));
  const std::vector<float> target{0.3f, -0.2f, 0.1f};
  AdamConfig cfg;
  cfg.lr = 1e-2;
  Adam adam(cfg, params);
  for (int step = 0; step < 200; ++step) {
    Tape tape;
    Binding bind(tape, params);
    const auto diff = sub(bind(0), tape.constant(Tensor({1, 3}, target)));
    tape.backward(sum(mul(diff, diff)));
    adam.step(params, bind.gradients());
  }
  // Oracle: the minimizer of sum((x - target)^2) is target itself.
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(params[0].value[i] - target[i]) < 1e-3);
  CHECK(adam.step_count() == 200);
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  ParameterSet params;
  params.add("w", Tensor({2, 2}, std::vector<float>{1, 2, 3, 4}));
  const auto before = params;
  Adam adam(AdamConfig{}, params);
  adam.step(params, {Tensor({2, 2})});
  CHECK(params == before);
  CHECK(adam.step_count() == 1);
}

namespace {

Checkpoint sample_checkpoint() {
  Rng rng(1);
  Checkpoint ckpt;
  ckpt.metadata = R"({"step": 3})";
  Dense::create(ckpt.params, "layer", 3, 2, rng);
  Adam adam(AdamConfig{}, ckpt.params);
  adam.step(ckpt.params, {Tensor({3, 2}, 0.5f), Tensor({1, 2}, -0.25f)});
  ckpt.optimizer = OptimizerSnapshot{adam.step_count(), adam.first_moments(), adam.second_moments()};
  return ckpt;
}

}  // namespace

TEST_CASE("checkpoint encode/decode/encode is bit exact") {
  const auto ckpt = sample_checkpoint();
  const auto bytes = encode_checkpoint(ckpt);
  const auto back = decode_checkpoint(bytes);
  CHECK(back.metadata == ckpt.metadata);
  CHECK(back.params == ckpt.params);
  REQUIRE(back.optimizer.has_value());
  CHECK(back.optimizer->step == 1);
  CHECK(encode_checkpoint(back) == bytes);
  std::uint32_t magic = 0;
  std::memcpy(&magic, bytes.data(), 4);
  CHECK(magic == 0x414D5750u);
}

TEST_CASE("corrupted checkpoints raise integrity errors") {
  const auto bytes = encode_checkpoint(sample_checkpoint());
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(decode_checkpoint(flipped), ChecksumError);
  auto bad_magic = bytes;
  bad_magic[0] ^= 0xFF;
  CHECK_THROWS_AS(decode_checkpoint(bad_magic), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_AS(decode_checkpoint(bad_version), VersionError);
  const std::vector<std::uint8_t> short_file(bytes.begin(), bytes.begin() + 6);
  CHECK_THROWS_AS(decode_checkpoint(short_file), TruncatedError);
  CHECK_NOTHROW(decode_checkpoint(bytes));
}
