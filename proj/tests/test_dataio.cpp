#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nasreg/dataset.hpp"

using namespace nasreg;

namespace {

std::filesystem::path write_temp_csv(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

// n-choose-k by direct multiplication, independent of the implementation
std::size_t binomial(std::size_t n, std::size_t k) {
    std::size_t num = 1, den = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        num *= n - k + i;
        den *= i;
    }
    return num / den;
}

// brute-force monomial list: all exponent vectors with total degree <= p,
// sorted by (degree, lexicographically descending exponents)
std::vector<std::vector<int>> brute_force_exponents(std::size_t n, int p) {
    std::vector<std::vector<int>> all;
    std::vector<int> e(n, 0);
    while (true) {
        int total = 0;
        for (int v : e) total += v;
        if (total <= p) all.push_back(e);
        // odometer over exponents 0..p
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (e[i] < p) {
                ++e[i];
                for (std::size_t j = 0; j < i; ++j) e[j] = 0;
                break;
            }
        }
        if (i == n) break;
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        int da = 0, db = 0;
        for (int v : a) da += v;
        for (int v : b) db += v;
        if (da != db) return da < db;
        return a > b;  // x1-major within a degree
    });
    return all;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
    const auto path = write_temp_csv("nasreg_t1.csv", "f,P,Ra\n10,4,120\n15,5,95\n20,6,80\n");
    const Dataset d = load_csv(path);
    CHECK(d.n_rows() == 3);
    CHECK(d.n_features() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"f", "P"});
    CHECK(d.targets == std::vector<double>{120.0, 95.0, 80.0});
    CHECK(d.synthetic_flags == std::vector<bool>{false, false, false});
    std::filesystem::remove(path);
}

TEST_CASE("load_csv selects a named target column") {
    const auto path = write_temp_csv("nasreg_t2.csv", "f,P,Ra\n10,4,120\n15,5,95\n20,6,80\n");
    const Dataset d = load_csv(path, "P");
    CHECK(d.feature_names == std::vector<std::string>{"f", "Ra"});
    CHECK(d.targets == std::vector<double>{4.0, 5.0, 6.0});
    CHECK(d.features(1, 0) == 15.0);
    CHECK(d.features(1, 1) == 95.0);
    std::filesystem::remove(path);
}

TEST_CASE("load_csv reports the offending row for bad cells") {
    const auto path = write_temp_csv("nasreg_t3.csv", "a,b\n1,2\nabc,4\n");
    try {
        load_csv(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_csv rejects missing files, bad targets and duplicate headers") {
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
    const auto dup = write_temp_csv("nasreg_t4.csv", "a,a\n1,2\n3,4\n");
    CHECK_THROWS_AS(load_csv(dup), DataError);
    std::filesystem::remove(dup);
    const auto ok = write_temp_csv("nasreg_t5.csv", "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(load_csv(ok, "zzz"), DataError);
    std::filesystem::remove(ok);
}

TEST_CASE("fit_normalizer computes population statistics") {
    Dataset d;
    d.feature_names = {"x"};
    d.features = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
    d.targets = {10.0, 10.0, 10.0};
    d.synthetic_flags = {false, false, false};
    const NormStats s = fit_normalizer(d);
    CHECK(s.means[0] == doctest::Approx(2.0));
    CHECK(s.stds[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));  // 0.8165
    CHECK(s.target_mean() == doctest::Approx(10.0));
    CHECK(s.target_std() == 0.0);
}

TEST_CASE("fit_normalizer on a single row gives zero stds") {
    Dataset d;
    d.feature_names = {"x", "y"};
    d.features = Matrix::from_rows({{5.0, -1.0}});
    d.targets = {3.0};
    d.synthetic_flags = {false};
    const NormStats s = fit_normalizer(d);
    for (double v : s.stds) CHECK(v == 0.0);
}

TEST_CASE("apply_normalizer matches the closed form and round-trips") {
    Dataset d;
    d.feature_names = {"x"};
    d.features = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
    d.targets = {4.0, 5.0, 6.0};
    d.synthetic_flags = {false, false, false};
    const NormStats s = fit_normalizer(d);
    const Dataset nd = apply_normalizer(d, s);
    CHECK(nd.features(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-8));
    CHECK(nd.features(1, 0) == doctest::Approx(0.0));
    CHECK(nd.features(2, 0) == doctest::Approx(1.224744871).epsilon(1e-8));

    const Dataset back = apply_normalizer(nd, s, /*invert=*/true);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(back.features(r, 0) == doctest::Approx(d.features(r, 0)).epsilon(1e-12));
        CHECK(back.targets[r] == doctest::Approx(d.targets[r]).epsilon(1e-12));
    }
}

TEST_CASE("constant columns normalize to zero") {
    Dataset d;
    d.feature_names = {"c"};
    d.features = Matrix::from_rows({{5.0}, {5.0}, {5.0}});
    d.targets = {1.0, 2.0, 3.0};
    d.synthetic_flags = {false, false, false};
    const Dataset nd = apply_normalizer(d, fit_normalizer(d));
    for (std::size_t r = 0; r < 3; ++r) CHECK(nd.features(r, 0) == 0.0);
}

TEST_CASE("normalized training data has zero mean and unit variance") {
    Rng rng(3);
    Dataset d;
    d.feature_names = {"a", "b", "c"};
    d.features = Matrix(50, 3);
    for (double& v : d.features.storage()) v = 3.0 * rng.next_gaussian() + 1.0;
    d.targets.resize(50);
    for (double& v : d.targets) v = 10.0 * rng.next_gaussian() - 4.0;
    d.synthetic_flags.assign(50, false);

    const Dataset nd = apply_normalizer(d, fit_normalizer(d));
    const NormStats check = fit_normalizer(nd);
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(std::abs(check.means[c]) < 1e-10);
        CHECK(std::abs(check.stds[c] - 1.0) < 1e-10);
    }
}

TEST_CASE("split produces the documented sizes") {
    Dataset d;
    d.feature_names = {"x"};
    d.features = Matrix(100, 1);
    d.targets.resize(100);
    for (std::size_t i = 0; i < 100; ++i) {
        d.features(i, 0) = static_cast<double>(i);
        d.targets[i] = static_cast<double>(i);
    }
    d.synthetic_flags.assign(100, false);
    Rng rng(17);
    const SplitResult parts = split(d, 0.8, 0.1, rng);
    CHECK(parts.train.n_rows() == 80);
    CHECK(parts.val.n_rows() == 10);
    CHECK(parts.test.n_rows() == 10);
}

TEST_CASE("split of 10 rows gives 8/1/1 and errors when a part is empty") {
    Dataset d;
    d.feature_names = {"x"};
    d.features = Matrix(10, 1);
    d.targets.assign(10, 1.0);
    d.synthetic_flags.assign(10, false);
    Rng rng(17);
    const SplitResult parts = split(d, 0.8, 0.1, rng);
    CHECK(parts.train.n_rows() == 8);
    CHECK(parts.val.n_rows() == 1);
    CHECK(parts.test.n_rows() == 1);

    Dataset tiny = d;
    tiny.features = Matrix(5, 1);
    tiny.targets.assign(5, 1.0);
    tiny.synthetic_flags.assign(5, false);
    Rng rng2(17);
    CHECK_THROWS_AS(split(tiny, 0.8, 0.1, rng2), DataError);
}

TEST_CASE("split is deterministic, disjoint and exhaustive") {
    Dataset d;
    d.feature_names = {"x"};
    const std::size_t n = 53;
    d.features = Matrix(n, 1);
    d.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.features(i, 0) = static_cast<double>(i);
        d.targets[i] = static_cast<double>(i);
    }
    d.synthetic_flags.assign(n, false);

    Rng r1(9), r2(9);
    const SplitResult a = split(d, 0.6, 0.2, r1);
    const SplitResult b = split(d, 0.6, 0.2, r2);
    CHECK(a.train.targets == b.train.targets);
    CHECK(a.val.targets == b.val.targets);
    CHECK(a.test.targets == b.test.targets);

    std::vector<double> all;
    for (const Dataset* part : {&a.train, &a.val, &a.test})
        all.insert(all.end(), part->targets.begin(), part->targets.end());
    CHECK(all.size() == n);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == static_cast<double>(i));
}

TEST_CASE("poly_augment matches the worked example") {
    const std::vector<double> x{2.0, 3.0};
    const auto out = poly_augment(x, 2);
    CHECK(out == std::vector<double>{1.0, 2.0, 3.0, 4.0, 6.0, 9.0});
}

TEST_CASE("poly_augment order 1 is the affine feature map") {
    const std::vector<double> x{4.0, -1.0, 0.5};
    const auto out = poly_augment(x, 1);
    CHECK(out == std::vector<double>{1.0, 4.0, -1.0, 0.5});
}

TEST_CASE("poly_augment length is C(n+p, p)") {
    std::vector<double> x(6, 1.0);
    CHECK(poly_augment(x, 2).size() == 28);
    CHECK(poly_augment_size(6, 2) == binomial(8, 2));
}

TEST_CASE("poly_augment rejects order < 1") {
    const std::vector<double> x{1.0};
    CHECK_THROWS_AS(poly_augment(x, 0), std::invalid_argument);
    CHECK_THROWS_AS(poly_augment(x, -2), std::invalid_argument);
}

TEST_CASE("poly_augment agrees with brute-force enumeration for n<=8, p<=4") {
    Rng rng(21);
    for (std::size_t n = 1; n <= 8; ++n) {
        for (int p = 1; p <= 4; ++p) {
            std::vector<double> x(n);
            for (double& v : x) v = rng.next_gaussian();
            const auto got = poly_augment(x, p);
            const auto exps = brute_force_exponents(n, p);
            REQUIRE(got.size() == exps.size());
            REQUIRE(got.size() == poly_augment_size(n, p));
            for (std::size_t i = 0; i < exps.size(); ++i) {
                double expected = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    for (int k = 0; k < exps[i][j]; ++k) expected *= x[j];
                CHECK(got[i] == doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("poly feature names follow the monomial order") {
    const auto names = poly_feature_names({"a", "b"}, 2);
    CHECK(names == std::vector<std::string>{"1", "a", "b", "a*a", "a*b", "b*b"});
}

TEST_CASE("compute_metrics matches hand-evaluated values") {
    const std::vector<double> y{2.0, 4.0}, yhat{1.0, 5.0};
    const MetricsReport m = compute_metrics(y, yhat);
    REQUIRE(m.mape.has_value());
    CHECK(*m.mape == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(m.rmse == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.std_dev == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.n == 2);
}

TEST_CASE("perfect predictions give all-zero metrics") {
    const std::vector<double> y{3.0, -1.0, 7.0};
    const MetricsReport m = compute_metrics(y, y);
    CHECK(*m.mape == 0.0);
    CHECK(m.rmse == 0.0);
    CHECK(m.std_dev == 0.0);
}

TEST_CASE("constant residuals have zero spread") {
    const std::vector<double> y{1.0, 1.0}, yhat{0.0, 0.0};
    const MetricsReport m = compute_metrics(y, yhat);
    CHECK(*m.mape == doctest::Approx(1.0));
    CHECK(m.rmse == doctest::Approx(1.0));
    CHECK(m.std_dev == doctest::Approx(0.0));
}

TEST_CASE("zero targets drop mape but keep rmse and std") {
    const std::vector<double> y{0.0, 2.0}, yhat{1.0, 2.0};
    const MetricsReport m = compute_metrics(y, yhat);
    CHECK(!m.mape.has_value());
    CHECK(m.rmse > 0.0);
    CHECK(std::isfinite(m.std_dev));
}

TEST_CASE("compute_metrics rejects mismatched lengths") {
    const std::vector<double> y{1.0, 2.0}, yhat{1.0};
    CHECK_THROWS_AS(compute_metrics(y, yhat), std::invalid_argument);
}

TEST_CASE("rmse^2 = std^2 + mean_error^2 for random inputs") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.next_below(40));
        std::vector<double> y(n), yhat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 5.0 * rng.next_gaussian() + 1.0;
            yhat[i] = y[i] + rng.next_gaussian();
        }
        const MetricsReport m = compute_metrics(y, yhat);
        double mean_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean_err += y[i] - yhat[i];
        mean_err /= static_cast<double>(n);
        CHECK(m.rmse * m.rmse ==
              doctest::Approx(m.std_dev * m.std_dev + mean_err * mean_err).epsilon(1e-10));
    }
}
