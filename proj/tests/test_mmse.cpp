// SPDX-License-Identifier: Apache-2.0
//
// cransim - link-level simulator for C-RAN uplink multiuser detection
// Copyright (C) 2026 the cransim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cransim/centralized.hpp>
#include <cransim/mmse.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace cransim;

namespace {

CMatrix random_channel(Eigen::Index n, Eigen::Index k, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix h(n, k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            h(i, j) = scale * Complex(gauss(rng), gauss(rng)) / std::sqrt(2.0);
    return h;
}

CVector random_vector(Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = Complex(gauss(rng), gauss(rng)) / std::sqrt(2.0);
    return v;
}

} // namespace

TEST_CASE("scalar channel: W = sqrt(P) h / (P h^2 + N0)")
{
    CMatrix h(1, 1);
    h(0, 0) = 1.0;
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    REQUIRE(receiver.filter.rows() == 1);
    REQUIRE(receiver.filter.cols() == 1);
    CHECK(std::abs(receiver.filter(0, 0) - Complex(0.5, 0.0)) < 1e-14);
}

TEST_CASE("identity channel decouples into scalar filters")
{
    CMatrix h = CMatrix::Identity(2, 2);
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    CHECK((receiver.filter - 0.5 * CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("defining identity W (P H H^H + N0 I) = sqrt(P) H^H")
{
    CMatrix h = random_channel(4, 4, 11);
    const double p = 1.0, n0 = 0.5;
    auto receiver = mmse_filter(h, p, NoiseModel::scalar(n0));
    CMatrix gram = p * h * h.adjoint() + n0 * CMatrix::Identity(4, 4);
    CMatrix residual = receiver.filter * gram - std::sqrt(p) * h.adjoint();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimate applies the filter")
{
    CMatrix h = CMatrix::Identity(2, 2);
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    CVector y(2);
    y << Complex(2.0, 0.0), Complex(0.0, 0.0);
    CVector x = estimate(receiver, y);
    CHECK(std::abs(x(0) - Complex(1.0, 0.0)) < 1e-14);
    CHECK(std::abs(x(1)) < 1e-14);

    CHECK(estimate(receiver, CVector::Zero(2)).norm() == 0.0);

    CVector bad(3);
    bad.setZero();
    CHECK_THROWS_AS(estimate(receiver, bad), UsageError);
}

TEST_CASE("near-noiseless estimate recovers the transmitted vector")
{
    CMatrix h = random_channel(4, 4, 21);
    CVector x = random_vector(4, 22);
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1e-9));
    CVector xhat = estimate(receiver, h * x);
    CHECK((xhat - x).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("oracle identity: solve-based filter equals the explicit inverse")
{
    CMatrix h = random_channel(6, 3, 31);
    const double p = 1.7, n0 = 0.4;
    auto receiver = mmse_filter(h, p, NoiseModel::scalar(n0));
    CVector y = random_vector(6, 32);

    CMatrix gram = p * h * h.adjoint() + n0 * CMatrix::Identity(6, 6);
    CVector direct = std::sqrt(p) * h.adjoint() * gram.inverse() * y;
    CVector solved = estimate(receiver, y);
    CHECK((solved - direct).norm() / direct.norm() < 1e-10);
}

TEST_CASE("per-branch noise enters as a diagonal")
{
    CMatrix h = random_channel(3, 2, 41);
    RVector noise(3);
    noise << 0.5, 1.0, 2.0;
    auto receiver = mmse_filter(h, 1.0, NoiseModel::per_branch(noise));
    CMatrix gram = h * h.adjoint();
    gram += noise.cast<Complex>().asDiagonal();
    CMatrix residual = receiver.filter * gram - h.adjoint();
    CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noise must be positive")
{
    CMatrix h = CMatrix::Identity(2, 2);
    CHECK_THROWS_AS(mmse_filter(h, 1.0, NoiseModel::scalar(0.0)), UsageError);
    RVector noise(2);
    noise << 1.0, -0.5;
    CHECK_THROWS_AS(mmse_filter(h, 1.0, NoiseModel::per_branch(noise)), UsageError);
}

TEST_CASE("single matched user: SINR 1, ASR 1 bit/s/Hz")
{
    CMatrix h(1, 1);
    h(0, 0) = 1.0;
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    auto perf = evaluate_asr(receiver, h, 1.0, 1.0);
    CHECK(perf.per_user_sinr(0) == Catch::Approx(1.0));
    CHECK(perf.sum_rate == Catch::Approx(1.0));
}

TEST_CASE("orthogonal two-user channel: SINR (1,1), ASR 2")
{
    CMatrix h = CMatrix::Identity(2, 2);
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    auto perf = evaluate_asr(receiver, h, 1.0, 1.0);
    CHECK(perf.per_user_sinr(0) == Catch::Approx(1.0));
    CHECK(perf.per_user_sinr(1) == Catch::Approx(1.0));
    CHECK(perf.sum_rate == Catch::Approx(2.0));
}

TEST_CASE("matched filter SINR equals 1/MSE - 1")
{
    // independent route: MSE_k = [(I + (P/N0) H^H H)^(-1)]_kk
    CMatrix h = random_channel(12, 5, 51);
    const double p = 1.3, n0 = 0.7;
    auto receiver = mmse_filter(h, p, NoiseModel::scalar(n0));
    auto perf = evaluate_asr(receiver, h, p, n0);

    CMatrix inner =
        (CMatrix::Identity(5, 5) + (p / n0) * h.adjoint() * h).inverse();
    for (int k = 0; k < 5; ++k) {
        double mse = std::real(inner(k, k));
        CHECK(perf.per_user_sinr(k) == Catch::Approx(1.0 / mse - 1.0).epsilon(1e-10));
    }
}

TEST_CASE("scalar-noise and covariance evaluations agree for white noise")
{
    CMatrix h = random_channel(6, 4, 61);
    const double p = 1.0, n0 = 0.8;
    auto receiver = mmse_filter(h, p, NoiseModel::scalar(n0));
    auto white = evaluate_asr(receiver, h, p, n0);
    auto full = evaluate_asr(receiver, h, p, CMatrix(n0 * CMatrix::Identity(6, 6)));
    CHECK(white.sum_rate == Catch::Approx(full.sum_rate).epsilon(1e-12));
}

TEST_CASE("ASR is invariant to a common unitary rotation")
{
    CMatrix h = random_channel(5, 3, 71);
    const double p = 1.0, n0 = 0.6;
    auto receiver = mmse_filter(h, p, NoiseModel::scalar(n0));
    CMatrix cov = n0 * CMatrix::Identity(5, 5);
    auto base = evaluate_asr(receiver, h, p, cov);

    // unitary Q from the QR of a random matrix
    Eigen::HouseholderQR<CMatrix> qr(random_channel(5, 5, 72));
    CMatrix q = qr.householderQ();

    LinearReceiver rotated = receiver;
    rotated.filter = receiver.filter * q.adjoint();
    auto after = evaluate_asr(rotated, q * h, p, CMatrix(q * cov * q.adjoint()));
    CHECK(after.sum_rate == Catch::Approx(base.sum_rate).epsilon(1e-10));
    for (int k = 0; k < 3; ++k)
        CHECK(after.per_user_sinr(k) == Catch::Approx(base.per_user_sinr(k)).epsilon(1e-10));
}

TEST_CASE("exact MMSE beats mismatched filters in aggregate")
{
    const double p = 1.0, n0 = 1.0;
    double matched_total = 0.0;
    double mismatched_total = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        CMatrix h = random_channel(8, 4, 100 + static_cast<std::uint64_t>(trial));
        auto exact = mmse_filter(h, p, NoiseModel::scalar(n0));
        matched_total += evaluate_asr(exact, h, p, n0).sum_rate;

        auto pruned = crps(h, n0, 0.2);
        auto rough = mmse_filter(pruned.channel, p, pruned.effective_noise);
        mismatched_total += evaluate_asr(rough, h, p, n0).sum_rate;
    }
    CHECK(matched_total >= mismatched_total);
}

TEST_CASE("dimension mismatches are usage errors")
{
    CMatrix h = random_channel(4, 2, 81);
    auto receiver = mmse_filter(h, 1.0, NoiseModel::scalar(1.0));
    CMatrix wrong_rows = random_channel(5, 2, 82);
    CHECK_THROWS_AS(evaluate_asr(receiver, wrong_rows, 1.0, 1.0), UsageError);
    CMatrix wrong_cols = random_channel(4, 3, 83);
    CHECK_THROWS_AS(evaluate_asr(receiver, wrong_cols, 1.0, 1.0), UsageError);
    CHECK_THROWS_AS(mmse_filter(CMatrix(), 1.0, NoiseModel::scalar(1.0)), UsageError);
}
