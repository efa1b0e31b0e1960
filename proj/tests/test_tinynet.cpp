#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "freemesh/tinynet.hpp"

using namespace freemesh::nn;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Non-comment lines of a whitespace separated numeric table.
std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double v = 0.0;
    while (ss >> v) row.push_back(v);
    rows.push_back(row);
  }
  return rows;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

double weighted_sum(const Mlp& net, const Matrix& x, const Matrix& g) {
  return (net.predict(x).array() * g.array()).sum();
}

}  // namespace

TEST_CASE("hand-computed forward pass") {
  Mlp net = Mlp::zeros({2, 2, 1});
  net.weight(0) << 1.0, -1.0, 2.0, 0.5;
  net.bias(0) << 0.0, -1.0;
  net.weight(1) << 3.0, -2.0;
  net.bias(1) << 0.25;
  Matrix x(2, 2);
  x << 1.0, -1.0,
       2.0, 4.0;
  // Column 0: hidden (-1, 2) -> relu (0, 2) -> 0 - 4 + 0.25.
  // Column 1: hidden (-5, -1) -> relu (0, 0) -> 0.25.
  const Matrix y = net.forward(x);
  REQUIRE(y.rows() == 1);
  REQUIRE(y.cols() == 2);
  CHECK(y(0, 0) == -3.75);
  CHECK(y(0, 1) == 0.25);
  CHECK(net.predict(x) == y);

  Matrix g(1, 2);
  g << 1.0, 1.0;
  const Gradients grads = net.backward(g);
  // Only hidden unit 1 of column 0 is active.
  CHECK(grads.params[2](0, 0) == 0.0);
  CHECK(grads.params[2](0, 1) == 2.0);
  CHECK(grads.params[3](0, 0) == 2.0);
  CHECK(grads.params[0](1, 0) == -2.0);
  CHECK(grads.params[0](1, 1) == -4.0);
  CHECK(grads.input(0, 0) == -4.0);
  CHECK(grads.input(1, 0) == -1.0);
  CHECK(grads.input(0, 1) == 0.0);
}

TEST_CASE("forward pass matches the numpy golden file") {
  const std::string dir = FREEMESH_TEST_DATA;
  const Mlp net = load_weights(read_bytes(dir + "/golden_mlp.bin"));
  CHECK(net.sizes() == std::vector<std::size_t>{3, 5, 4, 2});
  const auto rows = read_rows(dir + "/golden_mlp.txt");
  REQUIRE(rows.size() >= 5);
  Matrix x(3, 6), expected(2, 6);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 6; ++c) x(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 6; ++c) expected(r, c) = rows[static_cast<std::size_t>(3 + r)][static_cast<std::size_t>(c)];
  const Matrix y = net.predict(x);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 6; ++c) CHECK(std::abs(y(r, c) - expected(r, c)) <= 1e-12);
}

TEST_CASE("Adam matches the numpy golden trajectory") {
  const auto rows = read_rows(std::string(FREEMESH_TEST_DATA) + "/golden_mlp.txt");
  REQUIRE(rows.size() == 9);
  std::vector<Matrix> params{Matrix(2, 2)};
  params[0] << 0.5, -1.0, 2.0, 0.25;
  AdamConfig cfg;
  cfg.learning_rate = 1e-2;
  Adam opt(params, cfg);
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<Matrix> g{Matrix(2, 2)};
    g[0] << rows[5 + s][0], rows[5 + s][1], rows[5 + s][2], rows[5 + s][3];
    opt.step(params, g);
  }
  CHECK(opt.steps() == 3);
  CHECK(std::abs(params[0](0, 0) - rows[8][0]) <= 1e-14);
  CHECK(std::abs(params[0](0, 1) - rows[8][1]) <= 1e-14);
  CHECK(std::abs(params[0](1, 0) - rows[8][2]) <= 1e-14);
  CHECK(std::abs(params[0](1, 1) - rows[8][3]) <= 1e-14);
}

TEST_CASE("first Adam step moves each entry by the learning rate") {
  std::vector<Matrix> params{Matrix::Zero(1, 3)};
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epsilon = 0.0;
  Adam opt(params, cfg);
  std::vector<Matrix> g{Matrix(1, 3)};
  g[0] << 5.0, -0.01, 1e6;
  opt.step(params, g);
  CHECK(params[0](0, 0) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(params[0](0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(params[0](0, 2) == doctest::Approx(-0.1).epsilon(1e-12));
  std::vector<Matrix> wrong{Matrix::Zero(2, 2)};
  CHECK_THROWS_AS(opt.step(params, wrong), ShapeError);
}

TEST_CASE("backward agrees with central differences") {
  std::mt19937_64 rng(99);
  const std::vector<std::vector<std::size_t>> shapes = {
      {3, 5, 4, 2}, {15, 128, 128, 128, 3}, {18, 128, 128, 128, 1}, {4, 1}};
  for (const auto& shape : shapes) {
    CAPTURE(shape.front());
    CAPTURE(shape.back());
    Mlp net(shape, rng);
    const Matrix x = random_matrix(static_cast<Eigen::Index>(shape.front()), 7, rng, -2.0, 2.0);
    const Matrix g = random_matrix(static_cast<Eigen::Index>(shape.back()), 7, rng);
    net.forward(x);
    const Gradients grads = net.backward(g);
    const double h = 1e-6;
    double worst = 0.0;
    std::uniform_int_distribution<std::size_t> pick_block(0, net.parameters().size() - 1);
    for (int probe = 0; probe < 100; ++probe) {
      const std::size_t blk = pick_block(rng);
      Matrix& p = net.parameters()[blk];
      std::uniform_int_distribution<Eigen::Index> pr(0, p.rows() - 1), pc(0, p.cols() - 1);
      const Eigen::Index r = pr(rng), c = pc(rng);
      const double saved = p(r, c);
      p(r, c) = saved + h;
      const double up = weighted_sum(net, x, g);
      p(r, c) = saved - h;
      const double down = weighted_sum(net, x, g);
      p(r, c) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = grads.params[blk](r, c);
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-6));
    }
    for (int probe = 0; probe < 20; ++probe) {
      std::uniform_int_distribution<Eigen::Index> pr(0, x.rows() - 1), pc(0, x.cols() - 1);
      const Eigen::Index r = pr(rng), c = pc(rng);
      Matrix xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      const double fd = (weighted_sum(net, xp, g) - weighted_sum(net, xm, g)) / (2.0 * h);
      const double an = grads.input(r, c);
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(fd) + std::abs(an), 1e-6));
    }
    CHECK(worst <= 1e-4);
  }
}

TEST_CASE("input-only backward skips parameter gradients") {
  std::mt19937_64 rng(5);
  Mlp net({4, 8, 2}, rng);
  const Matrix x = random_matrix(4, 3, rng);
  net.forward(x);
  const Matrix g = random_matrix(2, 3, rng);
  const Gradients full = net.backward(g);
  const Gradients in_only = net.backward(g, false);
  CHECK(in_only.params.empty());
  CHECK(in_only.input == full.input);
}

TEST_CASE("initialisation respects the fan-in bound") {
  std::mt19937_64 rng(17);
  const Mlp net({16, 64, 3}, rng);
  CHECK(net.parameter_count() == 16 * 64 + 64 + 64 * 3 + 3);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() <= 0.25);
  CHECK(net.bias(1).cwiseAbs().maxCoeff() <= 1.0 / 8.0);
  CHECK(net.weight(0).cwiseAbs().maxCoeff() > 0.2);
  std::mt19937_64 same(17);
  CHECK(Mlp({16, 64, 3}, same).parameters()[0] == net.parameters()[0]);
}

TEST_CASE("shape errors are reported") {
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(Mlp({3}, rng), ShapeError);
  CHECK_THROWS_AS(Mlp({3, 0, 1}, rng), ShapeError);
  Mlp net({3, 4, 1}, rng);
  CHECK_THROWS_AS(net.forward(Matrix::Zero(2, 5)), ShapeError);
  CHECK_THROWS_AS(net.predict(Matrix::Zero(4, 1)), ShapeError);
  CHECK_THROWS_AS(net.backward(Matrix::Zero(1, 1)), std::logic_error);
  net.forward(Matrix::Zero(3, 2));
  CHECK_THROWS_AS(net.backward(Matrix::Zero(1, 3)), ShapeError);
}

TEST_CASE("weights round-trip bit for bit") {
  std::mt19937_64 rng(23);
  const Mlp net({15, 32, 32, 3}, rng);
  const auto bytes = save_weights(net);
  CHECK(bytes.size() == 4 + 4 + 4 + 4 * 8 + 8 * net.parameter_count());
  const Mlp back = load_weights(bytes);
  CHECK(back.sizes() == net.sizes());
  for (std::size_t i = 0; i < net.parameters().size(); ++i) CHECK(back.parameters()[i] == net.parameters()[i]);
  CHECK(save_weights(back) == bytes);
}

TEST_CASE("corrupt weight streams are rejected") {
  std::mt19937_64 rng(29);
  const auto good = save_weights(Mlp({3, 4, 2}, rng));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(load_weights(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[4] = 9;
  CHECK_THROWS_AS(load_weights(bad_version), FormatError);

  auto truncated = good;
  truncated.resize(good.size() - 3);
  CHECK_THROWS_AS(load_weights(truncated), FormatError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(load_weights(trailing), FormatError);

  auto zero_layer = good;
  for (int k = 0; k < 8; ++k) zero_layer[12 + 8 + static_cast<std::size_t>(k)] = 0;
  CHECK_THROWS_AS(load_weights(zero_layer), FormatError);

  CHECK_THROWS_AS(load_weights(std::vector<std::uint8_t>{}), FormatError);
}

TEST_CASE("little-endian primitives") {
  std::vector<std::uint8_t> out;
  put_u32(out, 0x01020304u);
  put_u64(out, 0x1122334455667788ull);
  put_f64(out, -2.5);
  CHECK(out[0] == 0x04);
  CHECK(out[3] == 0x01);
  CHECK(out[4] == 0x88);
  ByteReader in(out);
  CHECK(in.u32() == 0x01020304u);
  CHECK(in.u64() == 0x1122334455667788ull);
  CHECK(in.f64() == -2.5);
  CHECK(in.remaining() == 0);
  CHECK_THROWS_AS(in.u32(), FormatError);
}
