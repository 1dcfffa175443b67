#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sentlab/adam.hpp"
#include "sentlab/gradcheck.hpp"
#include "sentlab/gru.hpp"
#include "sentlab/mlp.hpp"
#include "sentlab/nn.hpp"
#include "sentlab/rng.hpp"

using namespace sentlab;

namespace {

template <class S>
std::vector<S> vec(std::initializer_list<S> v) {
  return std::vector<S>(v);
}

// flatten/unflatten over every tensor of a GruParams, for local FD checks
std::vector<double*> gru_param_slots(GruParams<double>& g, size_t& total) {
  std::vector<double*> slots;
  total = 0;
  auto add = [&](std::vector<double>& v) {
    for (auto& x : v) slots.push_back(&x);
    total += v.size();
  };
  for (Matrix<double>* m : {&g.w_z, &g.w_r, &g.w_h, &g.u_z, &g.u_r, &g.u_h})
    add(m->data);
  for (std::vector<double>* v :
       {&g.g_wz, &g.g_wr, &g.g_wh, &g.g_uz, &g.g_ur, &g.g_uh, &g.b_z, &g.b_r,
        &g.b_h})
    add(*v);
  return slots;
}

}  // namespace

TEST_CASE("softmax basics") {
  auto p = softmax(std::span<const double>(vec<double>({0, 0})));
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  auto q = softmax(std::span<const double>(vec<double>({1000, 1000})));
  CHECK(q[0] == doctest::Approx(0.5));

  auto r = softmax(std::span<const double>(vec<double>({std::log(2.0), 0})));
  CHECK(r[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(r[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("softmax rejects empty and non-finite input") {
  std::vector<double> empty;
  CHECK_THROWS_AS(softmax(std::span<const double>(empty)),
                  std::invalid_argument);
  auto bad = vec<double>({1.0, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(softmax(std::span<const double>(bad)),
                  std::invalid_argument);
}

TEST_CASE("softmax sums to one and is shift invariant") {
  SeededRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 1 + rng.next_bounded(12);
    std::vector<float> x(n);
    for (auto& v : x) v = float(rng.next_uniform(-1e4, 1e4));
    auto p = softmax(std::span<const float>(x));
    double sum = 0;
    for (float v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

    float c = float(rng.next_uniform(-100, 100));
    std::vector<float> shifted(x);
    for (auto& v : shifted) v += c;
    auto ps = softmax(std::span<const float>(shifted));
    for (size_t i = 0; i < n; ++i)
      CHECK(double(ps[i]) == doctest::Approx(double(p[i])).epsilon(1e-6));

    // order preservation
    for (size_t i = 0; i + 1 < n; ++i)
      if (x[i] < x[i + 1]) CHECK(p[i] <= p[i + 1]);
  }
}

TEST_CASE("log_sum_exp examples and identities") {
  CHECK(log_sum_exp(std::span<const double>(vec<double>({0, 0}))) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(log_sum_exp(std::span<const double>(vec<double>({1000, 1000}))) ==
        doctest::Approx(1000 + std::log(2.0)).epsilon(1e-12));

  SeededRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto x = oracles::random_vector(rng, 7, -3, 3);
    double got = log_sum_exp(std::span<const double>(x));
    CHECK(got == doctest::Approx(oracles::naive_log_sum_exp(x)).epsilon(1e-12));
    double mx = *std::max_element(x.begin(), x.end());
    CHECK(got >= mx);
    CHECK(got <= mx + std::log(double(x.size())) + 1e-12);
  }
  std::vector<double> empty;
  CHECK_THROWS_AS(log_sum_exp(std::span<const double>(empty)),
                  std::invalid_argument);
}

TEST_CASE("layer_norm closed forms") {
  auto gain = vec<double>({1, 1, 1});
  auto out = layer_norm(std::span<const double>(vec<double>({3, 3, 3})),
                        std::span<const double>(gain), 1e-5);
  for (double v : out) CHECK(v == doctest::Approx(0.0));

  auto two = vec<double>({1, 1});
  auto o2 = layer_norm(std::span<const double>(vec<double>({1, -1})),
                       std::span<const double>(two), 1e-5);
  CHECK(o2[0] == doctest::Approx(0.99999500).epsilon(1e-8));
  CHECK(o2[1] == doctest::Approx(-0.99999500).epsilon(1e-8));

  // linear in the gain
  auto dbl = vec<double>({2, 2});
  auto o3 = layer_norm(std::span<const double>(vec<double>({1, -1})),
                       std::span<const double>(dbl), 1e-5);
  CHECK(o3[0] == doctest::Approx(2 * o2[0]));

  CHECK_THROWS_AS(layer_norm(std::span<const double>(vec<double>({1})),
                             std::span<const double>(vec<double>({1})), 1e-5),
                  std::invalid_argument);
  CHECK_THROWS_AS(layer_norm(std::span<const double>(vec<double>({1, 2})),
                             std::span<const double>(two), 0.0),
                  std::invalid_argument);
}

TEST_CASE("layer_norm output is centred under unit gain") {
  SeededRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 2 + rng.next_bounded(20);
    auto x = oracles::random_vector(rng, n, -5, 5);
    std::vector<double> gain(n, 1.0);
    auto out = layer_norm(std::span<const double>(x),
                          std::span<const double>(gain), 1e-5);
    double mean = 0;
    for (double v : out) mean += v;
    CHECK(std::abs(mean / double(n)) <= 1e-6);
  }
}

TEST_CASE("gru_step with zero weights halves the previous state") {
  GruParams<double> p(3, 4);
  auto h_prev = vec<double>({0.4, -0.8, 0.2, 1.0});
  auto x = vec<double>({0.3, 0.1, -0.2});
  auto h = gru_step(p, std::span<const double>(x),
                    std::span<const double>(h_prev));
  for (size_t i = 0; i < 4; ++i)
    CHECK(h[i] == doctest::Approx(0.5 * h_prev[i]).epsilon(1e-12));

  auto zero = vec<double>({0, 0, 0, 0});
  auto h0 = gru_step(p, std::span<const double>(x),
                     std::span<const double>(zero));
  for (double v : h0) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("gru_step dimension mismatch throws") {
  GruParams<double> p(3, 4);
  auto x = vec<double>({1, 2});
  auto h = vec<double>({0, 0, 0, 0});
  CHECK_THROWS_AS(
      gru_step(p, std::span<const double>(x), std::span<const double>(h)),
      std::invalid_argument);
}

TEST_CASE("gru_step matches an independent plain implementation") {
  SeededRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const uint32_t in = 3, hid = 5;
    GruParams<double> p(in, hid);
    p.init_weights(rng, -0.8, 0.8);
    for (auto* v : {&p.g_wz, &p.g_wr, &p.g_wh, &p.g_uz, &p.g_ur, &p.g_uh})
      for (auto& g : *v) g = rng.next_uniform(0.5, 1.5);
    for (auto* v : {&p.b_z, &p.b_r, &p.b_h})
      for (auto& b : *v) b = rng.next_uniform(-0.3, 0.3);

    oracles::PlainGru plain;
    plain.in = in;
    plain.hid = hid;
    plain.wz = p.w_z.data; plain.wr = p.w_r.data; plain.wh = p.w_h.data;
    plain.uz = p.u_z.data; plain.ur = p.u_r.data; plain.uh = p.u_h.data;
    plain.gwz = p.g_wz; plain.gwr = p.g_wr; plain.gwh = p.g_wh;
    plain.guz = p.g_uz; plain.gur = p.g_ur; plain.guh = p.g_uh;
    plain.bz = p.b_z; plain.br = p.b_r; plain.bh = p.b_h;

    auto x = oracles::random_vector(rng, in);
    auto h = oracles::random_vector(rng, hid);
    auto got = gru_step(p, std::span<const double>(x),
                        std::span<const double>(h));
    auto want = plain.step(x, h);
    for (uint32_t i = 0; i < hid; ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-6));
  }
}

TEST_CASE("gru_step output stays inside the state/candidate envelope") {
  SeededRng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    GruParams<float> p(4, 6);
    p.init_weights(rng, -2, 2);
    std::vector<float> x(4), h(6);
    for (auto& v : x) v = float(rng.next_uniform(-3, 3));
    for (auto& v : h) v = float(rng.next_uniform(-3, 3));
    auto out = gru_step(p, std::span<const float>(x), std::span<const float>(h));
    for (size_t i = 0; i < out.size(); ++i)
      CHECK(std::abs(out[i]) <=
            std::max(std::abs(double(h[i])), 1.0) + 1e-6);
  }
}

TEST_CASE("gru_step backward agrees with finite differences") {
  SeededRng rng(29);
  GruParams<double> p(3, 4);
  p.init_weights(rng, -0.7, 0.7);
  auto x = oracles::random_vector(rng, 3);
  auto h = oracles::random_vector(rng, 4);
  auto weight = oracles::random_vector(rng, 4);  // fixed projection

  size_t total = 0;
  auto slots = gru_param_slots(p, total);
  auto get = [&]() {
    std::vector<double> theta(total);
    for (size_t i = 0; i < total; ++i) theta[i] = *slots[i];
    return theta;
  };
  auto set = [&](const std::vector<double>& theta) {
    for (size_t i = 0; i < total; ++i) *slots[i] = theta[i];
  };

  auto loss_fn = [&](const std::vector<double>& theta) {
    set(theta);
    auto out = gru_step(p, std::span<const double>(x),
                        std::span<const double>(h));
    return dot(std::span<const double>(out), std::span<const double>(weight));
  };
  auto grad_fn = [&](const std::vector<double>& theta) {
    set(theta);
    GruStepCache<double> cache;
    gru_step(p, std::span<const double>(x), std::span<const double>(h), &cache);
    GruParams<double> g(3, 4);
    for (auto& v : g.g_wz) v = 0;  // gains default to 1; grads must start at 0
    for (auto& v : g.g_wr) v = 0;
    for (auto& v : g.g_wh) v = 0;
    for (auto& v : g.g_uz) v = 0;
    for (auto& v : g.g_ur) v = 0;
    for (auto& v : g.g_uh) v = 0;
    std::vector<double> dx(3, 0.0), dh(4, 0.0);
    gru_step_backward(p, cache, std::span<const double>(weight), g,
                      std::span<double>(dx), std::span<double>(dh));
    size_t gt = 0;
    auto gslots = gru_param_slots(g, gt);
    std::vector<double> grad(gt);
    for (size_t i = 0; i < gt; ++i) grad[i] = *gslots[i];
    return grad;
  };
  CHECK(grad_check(loss_fn, grad_fn, get(), 1e-6) <= 1e-7);
}

TEST_CASE("mlp_forward_split is split-point invariant") {
  SeededRng rng(31);
  MlpClassifier<float> m({6, 8, 7, 5}, 4, rng);
  std::vector<float> x(6);
  for (auto& v : x) v = float(rng.next_uniform(-1, 1));

  auto full = mlp_forward_split(m, std::span<const float>(x), 0);
  CHECK(full.intermediate.size() == 6);
  for (size_t i = 0; i < 6; ++i) CHECK(full.intermediate[i] == x[i]);

  for (uint32_t k = 1; k <= 3; ++k) {
    auto split = mlp_forward_split(m, std::span<const float>(x), k);
    REQUIRE(split.logits.size() == full.logits.size());
    for (size_t i = 0; i < split.logits.size(); ++i)
      CHECK(double(split.logits[i]) ==
            doctest::Approx(double(full.logits[i])).epsilon(1e-5));
  }

  // k = n: the intermediate is the final pre-softmax activation
  auto last = mlp_forward_split(m, std::span<const float>(x), 3);
  std::vector<float> logits(m.u_cls.rows);
  matvec(m.u_cls, std::span<const float>(last.intermediate),
         std::span<float>(logits));
  for (size_t i = 0; i < logits.size(); ++i)
    CHECK(logits[i] == doctest::Approx(last.logits[i]));

  CHECK_THROWS_AS(mlp_forward_split(m, std::span<const float>(x), 4),
                  std::invalid_argument);
}

TEST_CASE("adam_step hand-computed first step") {
  AdamState<double> st(1, 0.1);
  std::vector<double> theta = {1.0};
  std::vector<double> g = {2.0};
  adam_step(st, std::span<double>(theta), std::span<const double>(g));
  // mhat = 2, vhat = 4 -> theta = 1 - 0.1 * 2 / (2 + eps)
  CHECK(theta[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(st.t == 1);
}

TEST_CASE("adam_step zero gradient leaves parameters unchanged") {
  AdamState<float> st(3, 0.05);
  std::vector<float> theta = {1.0f, -2.0f, 0.5f};
  std::vector<float> g = {0, 0, 0};
  adam_step(st, std::span<float>(theta), std::span<const float>(g));
  CHECK(theta[0] == 1.0f);
  CHECK(theta[1] == -2.0f);
  CHECK(theta[2] == 0.5f);
}

TEST_CASE("adam_step is deterministic and validates input") {
  std::vector<float> a = {1, 2, 3}, b = {1, 2, 3};
  std::vector<float> g = {0.1f, -0.2f, 0.3f};
  AdamState<float> s1(3, 0.01), s2(3, 0.01);
  for (int i = 0; i < 5; ++i) {
    adam_step(s1, std::span<float>(a), std::span<const float>(g));
    adam_step(s2, std::span<float>(b), std::span<const float>(g));
  }
  CHECK(a == b);

  AdamState<float> s3(2, 0.01);
  CHECK_THROWS_AS(adam_step(s3, std::span<float>(a), std::span<const float>(g)),
                  std::invalid_argument);
  AdamState<float> s4(3, 0.01);
  std::vector<float> bad = {0.1f, std::numeric_limits<float>::quiet_NaN(), 0};
  try {
    adam_step(s4, std::span<float>(a), std::span<const float>(bad));
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("index 1") != std::string::npos);
  }
}

TEST_CASE("seeded_uniform_init reproducibility and bounds") {
  SeededRng a(42), b(42);
  auto m1 = seeded_uniform_init<float>(a, 13, 7, -0.1, 0.1);
  auto m2 = seeded_uniform_init<float>(b, 13, 7, -0.1, 0.1);
  CHECK(m1.data == m2.data);
  for (float v : m1.data) {
    CHECK(v >= -0.1f);
    CHECK(v < 0.1f);
  }
  SeededRng c(43);
  CHECK_THROWS_AS(seeded_uniform_init<float>(c, 2, 2, 0.1, 0.1),
                  std::invalid_argument);
}

TEST_CASE("seeded_uniform_init sample mean is near the midpoint") {
  SeededRng rng(7);
  const double lo = -0.1, hi = 0.1;
  auto m = seeded_uniform_init<double>(rng, 1000, 100, lo, hi);
  double mean = 0;
  for (double v : m.data) mean += v;
  mean /= double(m.data.size());
  const double sigma_mean =
      (hi - lo) / std::sqrt(12.0) / std::sqrt(double(m.data.size()));
  CHECK(std::abs(mean - 0.0) <= 3 * sigma_mean);
}

TEST_CASE("identical seeds give identical draw sequences") {
  SeededRng a(123456789), b(123456789);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("grad_check validates a correct and flags a wrong gradient") {
  auto loss = [](const std::vector<double>& t) {
    double s = 0;
    for (double v : t) s += v * v;
    return s;
  };
  auto grad = [](const std::vector<double>& t) {
    std::vector<double> g(t.size());
    for (size_t i = 0; i < t.size(); ++i) g[i] = 2 * t[i];
    return g;
  };
  std::vector<double> theta = {0.3, -1.2, 2.5, 0.01};
  CHECK(grad_check(loss, grad, theta) < 1e-9);

  auto wrong = [](const std::vector<double>& t) {
    std::vector<double> g(t.size());
    for (size_t i = 0; i < t.size(); ++i) g[i] = 2 * t[i] + 1;
    return g;
  };
  CHECK(grad_check(loss, wrong, theta) > 1e-2);
}
