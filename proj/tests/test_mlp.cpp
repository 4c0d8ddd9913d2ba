#include <doctest.h>

#include "odn/error.hpp"
#include "odn/mlp.hpp"
#include "support.hpp"

using namespace odn;

namespace {

MLPConfig small_config(Activation a = Activation::tanh, bool last = false) {
  MLPConfig c;
  c.input_dim = 3;
  c.hidden_widths = {5, 4};
  c.output_dim = 2;
  c.activation = a;
  c.activate_last_layer = last;
  return c;
}

}  // namespace

TEST_CASE("Glorot bound and zero biases") {
  MLPConfig c;
  c.input_dim = 10;
  c.hidden_widths = {20, 7};
  c.output_dim = 3;
  const MLP net = init_mlp(c, 42);
  for (const auto& layer : net.layers()) {
    const double fi = static_cast<double>(layer.weight.rows());
    const double fo = static_cast<double>(layer.weight.cols());
    const double bound = std::sqrt(6.0 / (fi + fo));
    double widest = 0.0;
    for (double w : layer.weight.data()) {
      CHECK(std::abs(w) <= bound);
      widest = std::max(widest, std::abs(w));
    }
    CHECK(widest > 0.5 * bound);  // actually spread over the interval
    for (double b : layer.bias.data()) CHECK(b == 0.0);
  }
}

TEST_CASE("initialization is deterministic per seed") {
  const auto c = small_config();
  const MLP a = init_mlp(c, 7), b = init_mlp(c, 7), d = init_mlp(c, 8);
  for (std::size_t l = 0; l < a.layers().size(); ++l) {
    const auto wa = a.layers()[l].weight.data(), wb = b.layers()[l].weight.data();
    CHECK(std::equal(wa.begin(), wa.end(), wb.begin()));
  }
  CHECK(a.layers()[0].weight.data()[0] != d.layers()[0].weight.data()[0]);
}

TEST_CASE("parameter count") {
  const auto c = small_config();
  CHECK(c.parameter_count() == (3 + 1) * 5 + (5 + 1) * 4 + (4 + 1) * 2);
  std::vector<Parameter> params;
  MLP(c).collect_parameters("net", params);
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  CHECK(n == c.parameter_count());
  REQUIRE(params.size() == 6);
  CHECK(params[0].name == "net.layer0.weight");
  CHECK(params[0].decay);
  CHECK(params[1].name == "net.layer0.bias");
  CHECK_FALSE(params[1].decay);
}

TEST_CASE("hand-computed forward pass") {
  MLPConfig c;
  c.input_dim = 2;
  c.hidden_widths = {2};
  c.output_dim = 1;
  c.activation = Activation::relu;
  MLP net(c);
  auto& l0 = net.layers()[0];
  auto& l1 = net.layers()[1];
  std::vector<double> w0{1, -1, 2, 1}, b0{0.5, -3}, w1{2, 5}, b1{0.25};
  std::copy(w0.begin(), w0.end(), l0.weight.mutable_data().begin());
  std::copy(b0.begin(), b0.end(), l0.bias.mutable_data().begin());
  std::copy(w1.begin(), w1.end(), l1.weight.mutable_data().begin());
  std::copy(b1.begin(), b1.end(), l1.bias.mutable_data().begin());
  // x = (1, 2): h = relu((1 + 4 + 0.5, -1 + 2 - 3)) = (5.5, 0); y = 11 + 0.25
  const Tensor y = net.forward(Tensor::from({1, 2}, {1, 2}));
  CHECK(y.item() == 11.25);
  c.activate_last_layer = true;
  MLP neg(c);
  for (std::size_t l = 0; l < 2; ++l) {
    neg.layers()[l].weight = net.layers()[l].weight.clone(true);
    neg.layers()[l].bias = net.layers()[l].bias.clone(true);
  }
  neg.layers()[1].bias.mutable_data()[0] = -20.0;
  CHECK(neg.forward(Tensor::from({1, 2}, {1, 2})).item() == 0.0);
}

TEST_CASE("a batch equals stacked single-row calls") {
  Rng rng(3);
  for (auto a : {Activation::relu, Activation::leaky_relu, Activation::tanh}) {
    const MLP net = init_mlp(small_config(a, true), 11);
    const Matrix x = odn::test::random_matrix(6, 3, rng);
    const Tensor batch = net.forward(Tensor::from_matrix(x));
    for (std::size_t i = 0; i < 6; ++i) {
      const Tensor one = net.forward(Tensor::from({1, 3}, {x(i, 0), x(i, 1), x(i, 2)}));
      for (std::size_t j = 0; j < 2; ++j) CHECK(one.at(0, j) == batch.at(i, j));
    }
  }
}

TEST_CASE("last-layer activation switch") {
  Rng rng(4);
  const Matrix x = odn::test::random_matrix(50, 3, rng, -3, 3);
  const MLP trunk = init_mlp(small_config(Activation::relu, true), 1);
  const Tensor out = trunk.forward(Tensor::from_matrix(x));
  for (double v : out.data()) CHECK(v >= 0.0);
  const MLP branch = init_mlp(small_config(Activation::relu, false), 1);
  bool negative = false;
  const Tensor bout = branch.forward(Tensor::from_matrix(x));
  for (double v : bout.data()) negative = negative || v < 0.0;
  CHECK(negative);
}

TEST_CASE("parameter gradients match finite differences") {
  Rng rng(9);
  for (auto a : {Activation::relu, Activation::leaky_relu, Activation::tanh}) {
    const MLP net = init_mlp(small_config(a, false), 5);
    const Tensor x = Tensor::from_matrix(odn::test::random_matrix(4, 3, rng));
    std::vector<Parameter> params;
    net.collect_parameters("n", params);
    std::vector<Tensor> leaves;
    for (auto& p : params) leaves.push_back(p.tensor);
    const double err = odn::test::gradient_check([&] { return mean(net.forward(x)); }, leaves);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("clone is independent") {
  const MLP a = init_mlp(small_config(), 1);
  MLP b = a.clone();
  b.layers()[0].weight.mutable_data()[0] += 1.0;
  CHECK(a.layers()[0].weight.data()[0] != b.layers()[0].weight.data()[0]);
}

TEST_CASE("errors") {
  const MLP net = init_mlp(small_config(), 1);
  CHECK_THROWS_AS(net.forward(Tensor::zeros({2, 4})), DimensionError);
  MLPConfig bad = small_config();
  bad.hidden_widths.clear();
  CHECK_THROWS_AS(MLP{bad}, ConfigError);
  CHECK_THROWS_AS(parse_activation("sigmoid"), ConfigError);
  CHECK(parse_activation("leaky_relu") == Activation::leaky_relu);
  CHECK(to_string(Activation::tanh) == "tanh");
}
