#include <doctest.h>

#include <stdexcept>

#include <random>

#include "ftrl/tensor.hpp"

using namespace ftrl;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : t.flat()) v = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("elementwise basics") {
    const Tensor a({2}, {1.0, 2.0});
    const Tensor b({2}, {3.0, 4.0});
    const Tensor sum = add(a, b);
    CHECK(sum[0] == 4.0);
    CHECK(sum[1] == 6.0);

    std::mt19937_64 rng(1);
    const Tensor x = random_tensor({3, 4}, rng);
    const Tensor zero = sub(x, x);
    for (std::size_t i = 0; i < zero.numel(); ++i) CHECK(zero[i] == 0.0);

    const Tensor y = random_tensor({3, 4}, rng);
    const Tensor prod = mul(x, y);
    for (std::size_t i = 0; i < prod.numel(); ++i) CHECK(prod[i] == x[i] * y[i]);

    CHECK_THROWS_AS(add(x, Tensor({4, 3})), std::invalid_argument);
}

TEST_CASE("addition commutes exactly") {
    std::mt19937_64 rng(2);
    const Tensor a = random_tensor({5, 7}, rng);
    const Tensor b = random_tensor({5, 7}, rng);
    const Tensor ab = add(a, b);
    const Tensor ba = add(b, a);
    for (std::size_t i = 0; i < ab.numel(); ++i) CHECK(ab[i] == ba[i]);
}

TEST_CASE("matmul") {
    std::mt19937_64 rng(3);
    const Tensor b = random_tensor({3, 4}, rng);
    const Tensor id = Tensor::identity(3);
    const Tensor idb = matmul(id, b);
    for (std::size_t i = 0; i < b.numel(); ++i) CHECK(idb[i] == doctest::Approx(b[i]).epsilon(1e-15));

    const Tensor m({2, 2}, {1.0, 2.0, 3.0, 4.0});
    const Tensor v({2, 1}, {1.0, 1.0});
    const Tensor mv = matmul(m, v);
    CHECK(mv[0] == doctest::Approx(3.0));
    CHECK(mv[1] == doctest::Approx(7.0));

    // triple-loop oracle
    const Tensor p = random_tensor({5, 7}, rng);
    const Tensor q = random_tensor({7, 3}, rng);
    const Tensor fast = matmul(p, q);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 7; ++k) acc += p[i * 7 + k] * q[k * 3 + j];
            CHECK(std::abs(fast[i * 3 + j] - acc) < 1e-12);
        }

    CHECK_THROWS_AS(matmul(p, p), std::invalid_argument);
}

TEST_CASE("matmul associativity within 1e-9 relative") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const Tensor a = random_tensor({4, 6}, rng);
        const Tensor b = random_tensor({6, 5}, rng);
        const Tensor c = random_tensor({5, 3}, rng);
        const Tensor lhs = matmul(matmul(a, b), c);
        const Tensor rhs = matmul(a, matmul(b, c));
        for (std::size_t i = 0; i < lhs.numel(); ++i)
            CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-9 * std::max(1.0, std::abs(lhs[i])));
    }
}

TEST_CASE("reshape round trip and errors") {
    Tensor t({6});
    for (std::size_t i = 0; i < 6; ++i) t[i] = static_cast<double>(i + 1);
    const Tensor m = reshape(t, {2, 3});
    const Tensor back = reshape(m, {6});
    for (std::size_t i = 0; i < 6; ++i) CHECK(back[i] == t[i]);
    CHECK_THROWS_AS(reshape(t, {4, 2}), std::invalid_argument);
}

TEST_CASE("transpose is an involution, bitwise") {
    std::mt19937_64 rng(5);
    const Tensor t = random_tensor({3, 4, 5}, rng);
    const Tensor tt = transpose(transpose(t, {2, 0, 1}), {1, 2, 0});
    REQUIRE(tt.shape() == t.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) CHECK(tt[i] == t[i]);
    CHECK_THROWS_AS(transpose(t, {0, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(transpose(t, {0, 1}), std::invalid_argument);
}

TEST_CASE("slice matches index-loop oracle") {
    std::mt19937_64 rng(6);
    const Tensor t = random_tensor({4, 4}, rng);
    const Tensor rows = slice(t, {{0, 2}, {0, 4}});
    REQUIRE(rows.shape() == std::vector<std::size_t>{2, 4});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(rows[i * 4 + j] == t[i * 4 + j]);

    const Tensor inner = slice(t, {{1, 3}, {2, 4}});
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(inner[i * 2 + j] == t[(i + 1) * 4 + (j + 2)]);

    CHECK_THROWS_AS(slice(t, {{0, 5}, {0, 4}}), std::invalid_argument);
    CHECK_THROWS_AS(slice(t, {{2, 2}, {0, 4}}), std::invalid_argument);
}

TEST_CASE("complex tensor shape invariant") {
    CHECK_THROWS_AS(ComplexTensor(Tensor({2, 2}), Tensor({2, 3})), std::invalid_argument);
    const ComplexTensor c(Tensor({2, 2}), Tensor({2, 2}));
    CHECK(c.numel() == 4);
}
