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

#pragma once

#include "types.hpp"

#include <cmath>

namespace cransim {

/// Linear receiver W = sqrt(P) H^H (P H H^H + Sigma_w)^(-1) together with the
/// model it was derived from. The model channel may be a sparsified or
/// precoded stand-in for the physical one; rate evaluation accepts the true
/// channel separately.
struct LinearReceiver {
    CMatrix filter; // K x N
    CMatrix model_channel;
    NoiseModel model_noise;
    double tx_power = 1.0;
};

struct RatePerformance {
    RVector per_user_sinr;
    double sum_rate = 0.0; // bits/s/Hz
};

inline LinearReceiver mmse_filter(const CMatrix& channel, double tx_power, const NoiseModel& noise)
{
    if (channel.size() == 0)
        throw UsageError("mmse_filter: empty channel");
    if (!noise.all_positive())
        throw UsageError("mmse_filter: noise must be positive");

    const Eigen::Index n = channel.rows();
    RVector noise_vec = noise.as_vector(n);
    CMatrix gram = tx_power * (channel * channel.adjoint());
    gram += noise_vec.cast<Complex>().asDiagonal();

    Eigen::LLT<CMatrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw InternalError("mmse_filter: regularized Gram matrix is not positive definite");

    LinearReceiver receiver;
    receiver.filter = std::sqrt(tx_power) * llt.solve(channel).adjoint();
    receiver.model_channel = channel;
    receiver.model_noise = noise;
    receiver.tx_power = tx_power;
    return receiver;
}

inline CVector estimate(const LinearReceiver& receiver, const CVector& observation)
{
    if (observation.size() != receiver.filter.cols())
        throw UsageError("estimate: observation length does not match the filter");
    return receiver.filter * observation;
}

namespace detail {

/// Shared SINR/rate evaluation. noise_power(k) must return w_k Sigma_w w_k^H.
template <typename NoiseTermFn>
RatePerformance evaluate_asr_impl(const LinearReceiver& receiver, const CMatrix& true_channel,
                                  double tx_power, NoiseTermFn&& noise_power)
{
    const CMatrix& filter = receiver.filter;
    if (filter.cols() != true_channel.rows())
        throw UsageError("evaluate_asr: filter and true channel have incompatible row spaces");
    if (filter.rows() != true_channel.cols())
        throw UsageError("evaluate_asr: filter rows must match the true user count");

    const Eigen::Index k_users = filter.rows();
    CMatrix coupling = filter * true_channel; // K x K

    RatePerformance perf;
    perf.per_user_sinr.resize(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
        double signal = tx_power * std::norm(coupling(k, k));
        double interference = tx_power * (coupling.row(k).squaredNorm() - std::norm(coupling(k, k)));
        double noise = noise_power(k);
        perf.per_user_sinr(k) = signal / (interference + noise);
        perf.sum_rate += std::log2(1.0 + perf.per_user_sinr(k));
    }
    return perf;
}

} // namespace detail

/// Rate of `receiver` against the true channel under white noise N_0 I. The
/// receiver may be mismatched (built from a pruned model); the SINR always
/// accounts for the full true channel.
inline RatePerformance evaluate_asr(const LinearReceiver& receiver, const CMatrix& true_channel,
                                    double tx_power, double true_noise_power)
{
    return detail::evaluate_asr_impl(receiver, true_channel, tx_power, [&](Eigen::Index k) {
        return true_noise_power * receiver.filter.row(k).squaredNorm();
    });
}

/// Rate against the true channel under a full (possibly correlated) noise
/// covariance, as left behind by per-cell precoding.
inline RatePerformance evaluate_asr(const LinearReceiver& receiver, const CMatrix& true_channel,
                                    double tx_power, const CMatrix& true_noise_covariance)
{
    if (true_noise_covariance.rows() != receiver.filter.cols() ||
        true_noise_covariance.cols() != receiver.filter.cols())
        throw UsageError("evaluate_asr: noise covariance dimensions do not match the filter");
    CMatrix cross = receiver.filter * true_noise_covariance; // rows = w_k Sigma_w
    return detail::evaluate_asr_impl(receiver, true_channel, tx_power, [&](Eigen::Index k) {
        return std::real((cross.row(k) * receiver.filter.row(k).adjoint())(0, 0));
    });
}

} // namespace cransim
