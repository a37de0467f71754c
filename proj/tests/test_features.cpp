#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>
#include <cmath>

#include "cot/features.hpp"
#include "cot/rng.hpp"

namespace {

cot::Dataset two_sample_dataset() {
    cot::Dataset d;
    for (double v : {1.0, 3.0}) {
        cot::LabeledSample s;
        s.bands.assign(12, 0.2);
        s.bands[0] = v / 10.0;  // keep within reflectance range
        s.cot = v;
        d.samples.push_back(s);
    }
    return d;
}

}  // namespace

TEST_CASE("normalizer statistics are population mean and std with noise scale") {
    // Feature values {1, 3}: mean 2, population std 1, noise sigma 0.03*2.
    Eigen::MatrixXd x(2, 1);
    x << 1.0, 3.0;
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.03);
    REQUIRE(nz.mean(0) == Catch::Approx(2.0));
    REQUIRE(nz.std(0) == Catch::Approx(1.0));
    REQUIRE(nz.noise_sigma(0) == Catch::Approx(0.06));
}

TEST_CASE("constant features get the epsilon std guard") {
    Eigen::MatrixXd x(3, 2);
    x << 5.0, 1.0, 5.0, 2.0, 5.0, 3.0;
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.03);
    REQUIRE(nz.std(0) == 1e-8);
    const Eigen::MatrixXd z = cot::normalize(x, nz);
    REQUIRE(std::isfinite(z(0, 0)));
}

TEST_CASE("zero noise level produces zero noise sigma") {
    Eigen::MatrixXd x(2, 3);
    x.setRandom();
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.0);
    REQUIRE(nz.noise_sigma.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise sigma uses mean absolute value, not the mean") {
    Eigen::MatrixXd x(2, 1);
    x << -4.0, 4.0;  // mean 0, mean|x| = 4
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.1);
    REQUIRE(nz.noise_sigma(0) == Catch::Approx(0.4));
}

TEST_CASE("normalizing the fitting set gives zero mean and unit std") {
    cot::Rng rng(21);
    Eigen::MatrixXd x(500, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(-3.0, 7.0);
    }
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.03);
    const Eigen::MatrixXd z = cot::normalize(x, nz);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        REQUIRE(std::abs(z.col(j).mean()) < 1e-9);
        const double sd = std::sqrt(z.col(j).array().square().mean() - std::pow(z.col(j).mean(), 2));
        REQUIRE(sd > 1.0 - 1e-6);
        REQUIRE(sd < 1.0 + 1e-6);
    }
}

TEST_CASE("normalize of the mean vector is zero") {
    const cot::Dataset d = two_sample_dataset();
    const cot::Normalizer nz = cot::fit_normalizer(d, 0.03);
    const Eigen::MatrixXd z = cot::normalize(nz.mean.transpose(), nz);
    REQUIRE(z.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("denormalize inverts normalize") {
    cot::Rng rng(22);
    Eigen::MatrixXd x(50, 12);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(0.0, 1.2);
    }
    const cot::Normalizer nz = cot::fit_normalizer(x, 0.03);
    const Eigen::MatrixXd back = cot::denormalize(cot::normalize(x, nz), nz);
    REQUIRE(((back - x).cwiseAbs().array() / x.cwiseAbs().array().max(1.0)).maxCoeff() < 1e-12);
}

TEST_CASE("dimension mismatches are rejected") {
    const cot::Dataset d = two_sample_dataset();
    const cot::Normalizer nz = cot::fit_normalizer(d, 0.03);
    Eigen::MatrixXd x(1, 11);
    x.setZero();
    try {
        cot::normalize(x, nz);
        FAIL("expected DimensionMismatch");
    } catch (const cot::Error& e) {
        REQUIRE(e.code() == cot::Errc::dimension_mismatch);
    }
}

TEST_CASE("augmentation with zero sigma equals plain normalization") {
    const cot::Dataset d = two_sample_dataset();
    const cot::Normalizer nz = cot::fit_normalizer(d, 0.0);
    cot::Rng rng(1);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.5);
    const Eigen::VectorXd a = cot::augment_and_normalize(x, nz, rng);
    const Eigen::VectorXd b = cot::normalize(x.transpose(), nz).transpose();
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("augmentation is reproducible under a fixed seed") {
    const cot::Dataset d = two_sample_dataset();
    const cot::Normalizer nz = cot::fit_normalizer(d, 0.05);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(12, 0.5);
    cot::Rng r1(77);
    cot::Rng r2(77);
    const Eigen::VectorXd a = cot::augment_and_normalize(x, nz, r1);
    const Eigen::VectorXd b = cot::augment_and_normalize(x, nz, r2);
    REQUIRE((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("augmentation noise has the prescribed scale in normalized space") {
    Eigen::MatrixXd train(2, 2);
    train << 1.0, 10.0, 3.0, 30.0;  // stds {1, 10}, mean|x| {2, 20}
    const cot::Normalizer nz = cot::fit_normalizer(train, 0.03);
    const Eigen::VectorXd x = nz.mean;
    cot::Rng rng(8);
    const int n = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd z = cot::augment_and_normalize(x, nz, rng);
        sum += z;
        sq += z.cwiseProduct(z);
    }
    for (Eigen::Index j = 0; j < 2; ++j) {
        const double mean = sum(j) / n;
        const double sd = std::sqrt(sq(j) / n - mean * mean);
        const double expected = nz.noise_sigma(j) / nz.std(j);
        REQUIRE(std::abs(mean) < 4.0 * expected / std::sqrt(static_cast<double>(n)) + 1e-12);
        REQUIRE(sd == Catch::Approx(expected).epsilon(0.03));
    }
}

TEST_CASE("fitting requires at least two samples and a sane noise level") {
    Eigen::MatrixXd one(1, 3);
    one.setZero();
    try {
        cot::fit_normalizer(one, 0.03);
        FAIL("expected EmptyDataset");
    } catch (const cot::Error& e) {
        REQUIRE(e.code() == cot::Errc::empty_dataset);
    }
    Eigen::MatrixXd two(2, 3);
    two.setRandom();
    REQUIRE_THROWS_AS(cot::fit_normalizer(two, 0.25), cot::Error);
    REQUIRE_THROWS_AS(cot::fit_normalizer(two, -0.01), cot::Error);
}
