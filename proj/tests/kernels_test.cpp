#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cgvd/kernels.hpp"
#include "support.hpp"

#include <omp.h>

using namespace cgvd;
namespace k = cgvd::kernels;

namespace {

std::vector<std::uint8_t> random_bits(std::mt19937_64& rng, std::size_t n, double density) {
    std::bernoulli_distribution on(density);
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) b = on(rng) ? 1 : 0;
    return v;
}

Extent random_extent(std::mt19937_64& rng) { return {1 + int(rng() % 70), 1 + int(rng() % 70)}; }

struct Threads {
    explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
    ~Threads() { omp_set_num_threads(saved); }
    int saved;
};

} // namespace

TEST_CASE("gaussian taps are normalized and symmetric") {
    const auto t = k::gaussian_taps(2.0);
    CHECK(t.size() == 13);
    double sum = 0;
    for (double v : t) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == t[t.size() - 1 - i]);
}

TEST_CASE("serial and omp kernels agree bit-exactly") {
    Threads threads(4);
    std::mt19937_64 rng(21);
    for (int it = 0; it < 60; ++it) {
        const Extent e = random_extent(rng);
        const auto n = std::size_t(e.area());

        const auto bits = random_bits(rng, n, 0.1);
        const int r = int(rng() % 8);
        std::vector<std::uint8_t> d1(n), d2(n);
        k::serial::dilate_square(bits, d1, e, r);
        k::omp::dilate_square(bits, d2, e, r);
        REQUIRE(d1 == d2);

        std::vector<double> soft(n);
        for (std::size_t i = 0; i < n; ++i) soft[i] = bits[i];
        const double sigma = 0.5 + double(rng() % 6) * 0.5;
        std::vector<double> b1(n), b2(n);
        k::serial::gaussian_blur(soft, b1, e, sigma);
        k::omp::gaussian_blur(soft, b2, e, sigma);
        REQUIRE(b1 == b2);

        std::vector<std::uint8_t> clean(n * 3), live(n * 3);
        for (auto& c : clean) c = std::uint8_t(rng());
        for (auto& c : live) c = std::uint8_t(rng());
        std::vector<std::uint8_t> o1(n * 3), o2(n * 3);
        k::serial::blend(clean, live, b1, o1, e);
        k::omp::blend(clean, live, b1, o2, e);
        REQUIRE(o1 == o2);
        k::serial::overwrite(live, bits, o1, e);
        k::omp::overwrite(live, bits, o2, e);
        REQUIRE(o1 == o2);

        std::vector<double> f1(n);
        for (auto& v : f1) v = double(rng() % 256) / 255.0;
        auto f2 = f1;
        const auto unknown = random_bits(rng, n, 0.3);
        const auto r1 = k::serial::relax_harmonic(f1, unknown, e, 1.8, 200, 1e-5);
        const auto r2 = k::omp::relax_harmonic(f2, unknown, e, 1.8, 200, 1e-5);
        REQUIRE(f1 == f2);
        CHECK(r1.iterations == r2.iterations);
        CHECK(r1.residual == r2.residual);
    }
}

TEST_CASE("blend rounds half up and stays between inputs") {
    const Extent e{2, 1};
    std::vector<std::uint8_t> clean{10, 20, 30, 0, 0, 0}, live{11, 20, 31, 255, 255, 255}, out(6);
    std::vector<double> alpha{0.5, 0.25};
    k::serial::blend(clean, live, alpha, out, e);
    CHECK(out[0] == 11);  // 10.5 rounds up
    CHECK(out[1] == 20);
    CHECK(out[2] == 31);
    CHECK(out[3] == 191);  // 191.25
}

TEST_CASE("relax leaves known pixels alone and fills a linear ramp") {
    const Extent e{16, 8};
    std::vector<double> f(std::size_t(e.area()));
    std::vector<std::uint8_t> unknown(f.size(), 0);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x) {
            f[std::size_t(y) * 16 + x] = x / 15.0;
            if (x > 3 && x < 12 && y > 1 && y < 6) {
                unknown[std::size_t(y) * 16 + x] = 1;
                f[std::size_t(y) * 16 + x] = 0.0;
            }
        }
    k::serial::relax_harmonic(f, unknown, e, 1.8, 2000, 1e-12);
    for (int y = 0; y < e.height; ++y)
        for (int x = 0; x < e.width; ++x) CHECK(f[std::size_t(y) * 16 + x] == doctest::Approx(x / 15.0).epsilon(1e-6));
}
