#include <cmath>

#include "doctest.h"

#include "hanalab/checkpoint.hpp"
#include "hanalab/json_io.hpp"
#include "hanalab/nn.hpp"

using namespace hanalab;

namespace {

// Reference FNV-1a vectors from the published algorithm definition.
struct FnvVector {
  const char* input;
  uint64_t hash;
};
constexpr FnvVector kFnvVectors[] = {
    {"", 0xcbf29ce484222325ULL},
    {"a", 0xaf63dc4c8601ec8cULL},
    {"foobar", 0x85944171f73967e8ULL},
};

FeatureVector random_feature(int dim, int tokens, SplitMix64& rng) {
  std::string text;
  for (int t = 0; t < tokens; ++t) text += "tok" + std::to_string(rng.next_below(50)) + " ";
  return featurize(text, dim);
}

}  // namespace

TEST_SUITE_BEGIN("nn");

TEST_CASE("fnv1a64 matches the published test vectors") {
  for (const auto& v : kFnvVectors) CHECK(fnv1a64(v.input) == v.hash);
}

TEST_CASE("featurize lowercases, splits on whitespace, counts tokens") {
  CHECK(featurize("", 64).entries.empty());
  CHECK(featurize("   \n\t ", 64).entries.empty());
  FeatureVector fv = featurize("Red RED red\nblue", 4096);
  double red_count = 0;
  for (const auto& [idx, count] : fv.entries)
    if (idx == int(fnv1a64("red") % 4096)) red_count = count;
  CHECK(red_count == 3.0);
  CHECK(fv.l1_norm() == 4.0);
  CHECK(featurize("a b a", 64) == featurize("A  B\na", 64));  // deterministic + case-folded
  for (const auto& [idx, count] : fv.entries) {
    CHECK(count > 0.0);
    CHECK(idx >= 0);
    CHECK(idx < 4096);
  }
}

TEST_CASE("zero nets emit zero logits and identity-ish behavior holds") {
  Mlp zero = Mlp::zeros({8, 4});
  FeatureVector x = featurize("some words here", 8);
  CHECK(forward_one(zero, x).isZero());

  // single linear layer with identity weights reproduces the input
  Mlp ident = Mlp::zeros({4, 4});
  ident.weights[0].setIdentity();
  Eigen::MatrixXd input = Eigen::VectorXd::LinSpaced(4, 1.0, 4.0);
  CHECK(forward(ident, input).isApprox(input));
}

TEST_CASE("forward is deterministic for fixed params") {
  Mlp net = Mlp::init({32, 16, 8}, 7);
  SplitMix64 rng(3);
  FeatureVector x = random_feature(32, 12, rng);
  CHECK(forward_one(net, x) == forward_one(net, x));
  CHECK(Mlp::init({32, 16, 8}, 7).weights[0] == net.weights[0]);
}

TEST_CASE("uniform logits give ln C loss") {
  const int classes = 20;
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(classes);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(classes);
  target[3] = 1.0;
  CeResult r = softmax_ce(logits, target, 1.0);
  CHECK(r.loss == doctest::Approx(std::log(20.0)).epsilon(1e-9));
}

TEST_CASE("zero weight kills loss and gradient") {
  Eigen::VectorXd logits = Eigen::VectorXd::Random(10);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(10);
  target[2] = 1.0;
  CeResult r = softmax_ce(logits, target, 0.0);
  CHECK(r.loss == 0.0);
  CHECK(r.dlogits.isZero());
}

TEST_CASE("matched target means zero gradient") {
  Eigen::VectorXd logits(4);
  logits << 0.3, -1.2, 2.0, 0.0;
  CeResult r = softmax_ce(logits, softmax(logits), 1.0);
  CHECK(r.dlogits.norm() < 1e-12);
}

TEST_CASE("weighted CE scales linearly in the weight, negatives included") {
  Eigen::VectorXd logits(6);
  logits << 1.0, -0.5, 0.25, 2.0, 0.0, -1.0;
  Eigen::VectorXd target = Eigen::VectorXd::Zero(6);
  target[1] = 1.0;
  CeResult base = softmax_ce(logits, target, 1.0);
  for (double w : {-1.0, 0.0, 0.5, 2.0}) {
    CeResult r = softmax_ce(logits, target, w);
    CHECK(r.loss == doctest::Approx(w * base.loss).epsilon(1e-12));
    CHECK((r.dlogits - w * base.dlogits).norm() < 1e-12);
  }
}

TEST_CASE("targets must sum to one") {
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd bad = Eigen::VectorXd::Constant(3, 0.5);
  CHECK_THROWS_AS(softmax_ce(logits, bad, 1.0), ConfigError);
}

TEST_CASE("sgd step arithmetic") {
  Mlp net = Mlp::zeros({1, 1});
  net.weights[0](0, 0) = 1.0;
  TrainConfig cfg;
  cfg.optimizer = "sgd";
  cfg.learning_rate = 0.1;
  cfg.clip_norm = 0.0;
  ParamPack pack({&net});
  Optimizer opt(cfg, pack.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(pack.size());
  grad[0] = 0.5;
  opt.step(pack, grad);
  CHECK(net.weights[0](0, 0) == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  for (const char* optimizer : {"sgd", "adam"}) {
    Mlp net = Mlp::init({8, 4}, 3);
    const Eigen::MatrixXd before = net.weights[0];
    TrainConfig cfg;
    cfg.optimizer = optimizer;
    ParamPack pack({&net});
    Optimizer opt(cfg, pack.size());
    opt.step(pack, Eigen::VectorXd::Zero(pack.size()));
    CHECK(net.weights[0] == before);
  }
}

TEST_CASE("gradients are clipped to the configured norm") {
  Mlp net = Mlp::zeros({1, 1});
  TrainConfig cfg;
  cfg.optimizer = "sgd";
  cfg.learning_rate = 1.0;
  cfg.clip_norm = 1.0;
  ParamPack pack({&net});
  Optimizer opt(cfg, pack.size());
  Eigen::VectorXd grad(pack.size());
  grad << 10.0, 0.0;  // norm 10, clipped to 1
  opt.step(pack, grad);
  CHECK(std::abs(net.weights[0](0, 0) + 1.0) < 1e-9);
}

TEST_CASE("nan gradients raise a training error") {
  Mlp net = Mlp::zeros({2, 2});
  TrainConfig cfg;
  ParamPack pack({&net});
  Optimizer opt(cfg, pack.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(pack.size());
  grad[0] = std::nan("");
  CHECK_THROWS_AS(opt.step(pack, grad), TrainingError);
}

TEST_CASE("parameter count and flat round-trip") {
  Mlp net = Mlp::init({10, 7, 3}, 1);
  CHECK(net.param_count() == (10 + 1) * 7 + (7 + 1) * 3);
  ParamPack pack({&net});
  Eigen::VectorXd flat = pack.flatten();
  Mlp copy = Mlp::zeros({10, 7, 3});
  ParamPack pack2({&copy});
  pack2.unflatten(flat);
  CHECK(copy.weights[0] == net.weights[0]);
  CHECK(copy.biases[1] == net.biases[1]);
}

TEST_CASE("analytic CE gradient passes the finite-difference oracle") {
  SplitMix64 rng(11);
  Mlp net = Mlp::init({64, 24, 10}, 5);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 4; ++i) xs.push_back(random_feature(64, 20, rng));
  Eigen::VectorXd target = Eigen::VectorXd::Zero(10);
  target[7] = 1.0;

  auto loss_and_grad = [&](MlpGrad* grad) {
    double loss = 0.0;
    std::vector<const FeatureVector*> views;
    for (const auto& x : xs) views.push_back(&x);
    ForwardCache cache;
    Eigen::MatrixXd logits = forward(net, views, &cache);
    Eigen::MatrixXd dlogits(10, logits.cols());
    for (long j = 0; j < logits.cols(); ++j) {
      CeResult ce = softmax_ce(logits.col(j), target, j % 2 == 0 ? 1.5 : -0.75);
      loss += ce.loss;
      dlogits.col(j) = ce.dlogits;
    }
    if (grad) backward(net, cache, dlogits, *grad);
    return loss;
  };

  MlpGrad grad(net);
  loss_and_grad(&grad);
  ParamPack pack({&net});
  const double err = finite_diff_check(
      pack, [&] { return loss_and_grad(nullptr); }, ParamPack::flatten_grads({&grad}), 1e-5,
      0.05, 99, 200);
  CHECK(err < 1e-4);

  // test of the test: a corrupted gradient must be caught
  Eigen::VectorXd corrupted = ParamPack::flatten_grads({&grad});
  corrupted *= 2.0;
  const double bad_err = finite_diff_check(
      pack, [&] { return loss_and_grad(nullptr); }, corrupted, 1e-5, 0.05, 99, 200);
  CHECK(bad_err > 1e-2);
}

TEST_CASE("dense-input backward matches finite differences and returns dinput") {
  Mlp net = Mlp::init({6, 5, 4}, 21);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(4);
  target[1] = 1.0;

  auto loss_fn = [&]() {
    Eigen::MatrixXd logits = forward(net, x);
    double loss = 0.0;
    for (long j = 0; j < logits.cols(); ++j) loss += softmax_ce(logits.col(j), target, 1.0).loss;
    return loss;
  };
  ForwardCache cache;
  Eigen::MatrixXd logits = forward(net, x, &cache);
  Eigen::MatrixXd dlogits(4, 3);
  for (long j = 0; j < 3; ++j) dlogits.col(j) = softmax_ce(logits.col(j), target, 1.0).dlogits;
  MlpGrad grad(net);
  Eigen::MatrixXd dinput = backward(net, cache, dlogits, grad, /*want_dinput=*/true);
  CHECK(dinput.rows() == 6);
  CHECK(dinput.cols() == 3);

  ParamPack pack({&net});
  CHECK(finite_diff_check(pack, loss_fn, ParamPack::flatten_grads({&grad}), 1e-5, 1.0, 7) <
        1e-4);

  // finite-difference the input sensitivity too
  Eigen::MatrixXd x_fd = x;
  const double eps = 1e-6;
  x_fd(2, 1) += eps;
  Eigen::MatrixXd up = forward(net, x_fd);
  x_fd(2, 1) -= 2 * eps;
  Eigen::MatrixXd down = forward(net, x_fd);
  double up_loss = 0.0, down_loss = 0.0;
  for (long j = 0; j < 3; ++j) {
    up_loss += softmax_ce(up.col(j), target, 1.0).loss;
    down_loss += softmax_ce(down.col(j), target, 1.0).loss;
  }
  CHECK(dinput(2, 1) == doctest::Approx((up_loss - down_loss) / (2 * eps)).epsilon(1e-3));
}

TEST_CASE("initialization is bounded by the fan-in/fan-out rule") {
  Mlp net = Mlp::init({100, 50}, 77);
  const double bound = std::sqrt(6.0 / 150.0);
  CHECK(net.weights[0].maxCoeff() <= bound);
  CHECK(net.weights[0].minCoeff() >= -bound);
  CHECK(net.biases[0].isZero());
  CHECK(std::abs(net.weights[0].mean()) < 0.01);
}

TEST_CASE("reals serialize with 17 significant digits and round-trip") {
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(0.1) == "0.10000000000000001");
  const double tricky = 0.1 + 0.2;
  CHECK(std::stod(format_real(tricky)) == tricky);
  CHECK(format_real(-2.5e-300).find("e-300") != std::string::npos);
}

TEST_CASE("checkpoints round-trip byte-for-byte") {
  Mlp net = Mlp::init({12, 6, 4}, 3);
  Checkpoint ck;
  ck.template_version = "hanabi-text/1";
  ck.hash_dim = 12;
  ck.rng_seed = 99;
  ck.head = "teacher";
  ck.nets.emplace("net", net);
  ck.optimizer_type = "adam";
  ck.optimizer_step = 5;
  ck.optimizer_m = Eigen::VectorXd::Random(net.param_count());
  ck.optimizer_v = Eigen::VectorXd::Random(net.param_count()).cwiseAbs();

  const std::string text = ck.to_json_text();
  Checkpoint back = Checkpoint::from_json_text(text);
  CHECK(back.to_json_text() == text);
  CHECK(back.nets.at("net").weights[0] == net.weights[0]);
  CHECK(back.nets.at("net").biases[1] == net.biases[1]);
  CHECK(back.optimizer_m == ck.optimizer_m);
  CHECK(back.hash_dim == 12);

  Checkpoint bad = ck;
  bad.template_version = "hanabi-text/9";
  const auto path = std::filesystem::temp_directory_path() / "hanalab_ck_test.json";
  bad.save(path);
  CHECK_THROWS_AS(Checkpoint::load(path, "hanabi-text/1"), VersionError);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
