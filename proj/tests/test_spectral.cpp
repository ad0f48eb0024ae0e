#include "doctest.h"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "tpplab/rng.hpp"
#include "tpplab/spectral.hpp"

using namespace tpplab;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    CounterRng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    }
    return m;
}

} // namespace

TEST_CASE("spectral: hand cases") {
    CHECK(spectral_norm(Eigen::MatrixXd::Zero(3, 5)) == 0.0);
    CHECK(spectral_norm(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d.diagonal() << -7.0, 2.0, 0.5;
    CHECK(spectral_norm(d) == doctest::Approx(7.0).epsilon(1e-10));

    // rank-one u v^T has norm |u| |v|
    Eigen::VectorXd u(2), v(3);
    u << 3.0, 4.0;
    v << 1.0, 2.0, 2.0;
    CHECK(spectral_norm(u * v.transpose()) == doctest::Approx(15.0).epsilon(1e-10));
}

TEST_CASE("spectral: matches full SVD on random matrices") {
    const int shapes[][2] = {{1, 1}, {2, 5}, {5, 2}, {8, 8}, {16, 3}, {20, 20}};
    for (std::uint64_t s = 0; s < 6; ++s) {
        const auto& sh = shapes[s];
        const Eigen::MatrixXd m = random_matrix(sh[0], sh[1], 1000 + s);
        const double want = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
        CHECK(spectral_norm(m) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("spectral: converges when the top singular values are nearly tied") {
    // power iteration slows down when sigma_1 ~ sigma_2; the tolerance on the
    // Rayleigh estimate must still land on sigma_1
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    d.diagonal() << 1.0, 1.0 - 1e-7, 0.5, 0.1;
    Eigen::MatrixXd q = random_matrix(4, 4, 7);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
    const Eigen::MatrixXd u = qr.householderQ();
    const Eigen::MatrixXd m = u * d * u.transpose();
    const double want = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
    CHECK(spectral_norm(m) == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("spectral: deterministic across calls") {
    const Eigen::MatrixXd m = random_matrix(6, 6, 42);
    CHECK(spectral_norm(m) == spectral_norm(m)); // bitwise, fixed start vector
}
