#include <doctest.h>

#include <cmath>

#include "softprog/errors.hpp"
#include "softprog/indexing.hpp"
#include "test_util.hpp"

using namespace softprog;
using testutil::random_tensor;

TEST_CASE("logistic_kernel") {
    const double beta = 1.8;
    CHECK(logistic_kernel(Tensor(0.0), beta).item() == doctest::Approx(beta / 4).epsilon(1e-12));

    auto g = testutil::rng(31);
    for (int i = 0; i < 50; ++i) {
        Tensor t = random_tensor(g, {}, -8, 8);
        CHECK(logistic_kernel(t, beta).item() ==
              doctest::Approx(logistic_kernel(neg(t), beta).item()).epsilon(1e-12));
    }
    CHECK(logistic_kernel(Tensor(1.0), 1.0).item() > logistic_kernel(Tensor(2.0), 1.0).item());
    CHECK_THROWS_AS(logistic_kernel(Tensor(0.0), -1.0), parameter_error);
}

TEST_CASE("read_real basics") {
    Tensor constant = Tensor::vector({3.3, 3.3, 3.3, 3.3});
    for (double c : {-0.7, 0.0, 1.9, 5.2})
        CHECK(read_real(constant, {Tensor(c)}, 2.0).item() == doctest::Approx(3.3).epsilon(1e-12));

    // kernel symmetric about 1.5 and array linear
    Tensor lin = Tensor::vector({0, 1, 2, 3});
    CHECK(read_real(lin, {Tensor(1.5)}, 1.0).item() == doctest::Approx(1.5).epsilon(1e-12));

    // hard limit at integer coordinates
    Tensor a = Tensor::vector({4, 7, -2, 9});
    for (int64_t j = 0; j < 4; ++j)
        CHECK(read_real(a, {Tensor(double(j))}, 1e4).item() ==
              doctest::Approx(a[j]).epsilon(1e-6));

    CHECK_THROWS_AS(read_real(Tensor::vector({}), {Tensor(0.0)}, 1.0), structural_error);
}

TEST_CASE("read_real weights and range invariants") {
    auto g = testutil::rng(32);
    for (int i = 0; i < 100; ++i) {
        Tensor a = random_tensor(g, {6}, -5, 5);
        Tensor coord = random_tensor(g, {}, -2, 7); // includes out-of-range coordinates
        Tensor w = read_real_weights(a, {coord}, 1.3);
        double sum = 0;
        for (int64_t t = 0; t < w.size(); ++t) {
            CHECK(w[t] >= 0.0);
            sum += w[t];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);

        double out = read_real(a, {coord}, 1.3).item();
        CHECK(out >= hard_min(a) - 1e-12);
        CHECK(out <= hard_max(a) + 1e-12);
    }
}

TEST_CASE("read_real 2-D") {
    Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
    // centered coordinates average everything by symmetry
    CHECK(read_real(a, {Tensor(0.5), Tensor(0.5)}, 1.0).item() ==
          doctest::Approx(2.5).epsilon(1e-12));
    CHECK(read_real(a, {Tensor(1.0), Tensor(0.0)}, 1e4).item() ==
          doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("read_real backward follows the unnormalized-kernel rule") {
    const double beta = 1.3;
    Tensor a = Tensor::vector({1.0, 5.0, 2.0});
    const double i0 = 0.8;

    Tape tape;
    Tensor coord = tape.leaf(Tensor(i0));
    Tensor out = read_real(a, {coord}, beta);
    auto gm = tape.backward(out);
    const double implemented = gm.grad(coord).item();

    // hand-derived: with the normalizer W detached,
    //   d out / d i = sum_j (beta^2/4) sech^2(beta(j-i)/2) tanh(beta(j-i)/2) a_j / W
    double numer = 0, w_total = 0;
    for (int j = 0; j < 3; ++j) {
        const double t = (static_cast<double>(j) - i0) * beta / 2.0;
        const double sech2 = 1.0 / (std::cosh(t) * std::cosh(t));
        numer += (beta * beta / 4.0) * sech2 * std::tanh(t) * a[j];
        w_total += (beta / 4.0) * sech2;
    }
    const double hand_derived = numer / w_total;
    CHECK(implemented == doctest::Approx(hand_derived).epsilon(1e-9));

    // ... and deliberately differs from finite differences of the normalized
    // forward value.
    Tensor fd = finite_difference_grad(
        [&](const Tensor& c) { return read_real(a, {c}, beta).item(); }, Tensor(i0));
    CHECK(std::abs(fd.item() - implemented) > 1e-3);

    // gradient wrt the indexed tensor is untouched by the detach and matches
    // finite differences
    double err = testutil::gradcheck_max_err(
        [&](const Tensor& v) { return read_real(v, {Tensor(i0)}, beta); }, a);
    CHECK(err <= 1e-6);
}

TEST_CASE("read_categorical") {
    Tensor a = Tensor::vector({2, 4});
    CategoricalDistribution onehot{Tensor::vector({0, 1})};
    CHECK(read_categorical(a, {onehot}).item() == 4.0);

    CategoricalDistribution uniform{Tensor::vector({0.5, 0.5})};
    CHECK(read_categorical(a, {uniform}).item() == doctest::Approx(3.0).epsilon(1e-12));

    Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
    CategoricalDistribution rows{Tensor::vector({0.5, 0.5})};
    CategoricalDistribution cols{Tensor::vector({0, 1})};
    CHECK(read_categorical(m, {rows, cols}).item() == doctest::Approx(3.0).epsilon(1e-12));
    CategoricalDistribution cols2{Tensor::vector({1, 0})};
    CHECK(read_categorical(m, {rows, cols2}).item() == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(read_categorical(a, {CategoricalDistribution{Tensor::vector({1, 0, 0})}}),
                    structural_error);
}

TEST_CASE("write_categorical") {
    Tensor a = Tensor::vector({1, 2, 3});
    CategoricalDistribution onehot{Tensor::vector({0, 0, 1})};
    Tensor w = write_categorical(a, {onehot}, Tensor(9.0));
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 2.0);
    CHECK(w[2] == 9.0);

    Tensor zeros = Tensor::vector({0, 0});
    CategoricalDistribution uniform{Tensor::vector({0.5, 0.5})};
    Tensor blend = write_categorical(zeros, {uniform}, Tensor(1.0));
    CHECK(blend[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(blend[1] == doctest::Approx(0.5).epsilon(1e-12));

    // writing the just-read value with one-hot weights is a fixed point
    Tensor b = Tensor::vector({4, 5, 6});
    CategoricalDistribution pick{Tensor::vector({0, 1, 0})};
    Tensor v = read_categorical(b, {pick});
    Tensor same = write_categorical(b, {pick}, v);
    for (int64_t t = 0; t < 3; ++t) CHECK(same[t] == b[t]);
}

TEST_CASE("categorical indexing gradients") {
    auto g = testutil::rng(33);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        Tensor a = random_tensor(g, {2, 3});
        Tensor wr = softmax(random_tensor(g, {2}), 1.0);
        Tensor wc = softmax(random_tensor(g, {3}), 1.0);
        worst = std::max(worst, testutil::gradcheck_max_err([&](const Tensor& v) {
            return read_categorical(v, {CategoricalDistribution{wr}, CategoricalDistribution{wc}});
        }, a));
        worst = std::max(worst, testutil::gradcheck_max_err([&](const Tensor& v) {
            Tensor out = write_categorical(a, {CategoricalDistribution{softmax(v, 1.0)},
                                               CategoricalDistribution{wc}},
                                           Tensor(2.5));
            return reduce_sum(out * out);
        }, random_tensor(g, {2})));
    }
    CHECK(worst <= 1e-4);
}
