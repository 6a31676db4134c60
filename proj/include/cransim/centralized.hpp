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

#include "network.hpp"
#include "rgmp.hpp"
#include "types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cransim {

/// Pruned channel handed to the detector: entries of the original H are kept
/// or zeroed, the pruned energy is folded into the effective noise.
struct SparsifiedModel {
    CMatrix channel; // N x K, zeros where pruned
    NoiseModel effective_noise;
    std::int64_t nonzero_count = 0;
    std::string method_tag;
    double parameter = 0.0;
};

inline std::int64_t count_nonzeros(const CMatrix& m)
{
    std::int64_t s = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != Complex(0.0, 0.0))
                ++s;
    return s;
}

/// The no-op "pure" model: the full channel with the original noise.
inline SparsifiedModel dense_model(const CMatrix& channel, double noise_power)
{
    SparsifiedModel model;
    model.channel = channel;
    model.effective_noise = NoiseModel::scalar(noise_power);
    model.nonzero_count = count_nonzeros(model.channel);
    model.method_tag = "pure";
    return model;
}

inline FactorGraph build_graph(const SparsifiedModel& model, double tx_power)
{
    return build_graph(model.channel, model.effective_noise, tx_power);
}

/// Received-power pruning: zero every entry with |H(i,j)|^2 below p_min and
/// absorb the discarded power into the noise level,
/// N0_hat = N0 + (1/N) sum |pruned|^2.
inline SparsifiedModel crps(const CMatrix& channel, double noise_power, double p_min)
{
    if (p_min < 0.0)
        throw ParameterError("crps: p_min must be nonnegative");

    SparsifiedModel model;
    model.channel = channel;
    model.method_tag = "crps";
    model.parameter = p_min;

    double pruned_power = 0.0;
    for (Eigen::Index j = 0; j < channel.cols(); ++j) {
        for (Eigen::Index i = 0; i < channel.rows(); ++i) {
            if (std::norm(channel(i, j)) < p_min) {
                pruned_power += std::norm(channel(i, j));
                model.channel(i, j) = Complex(0.0, 0.0);
            }
        }
    }
    model.effective_noise =
        NoiseModel::scalar(noise_power + pruned_power / static_cast<double>(channel.rows()));
    model.nonzero_count = count_nonzeros(model.channel);
    return model;
}

/// Semi-orthogonality pruning: for each cell, drop an external user's entries
/// on that cell's antennas when its channel is semi-orthogonal
/// (|h_k1 h_k2^H|^2 < t_prod) to every user homed there. Pruned energy is
/// folded into the noise the same way as crps.
inline SparsifiedModel mcos(const CMatrix& channel, const NetworkLayout& layout,
                            double noise_power, double t_prod)
{
    if (t_prod < 0.0)
        throw ParameterError("mcos: t_prod must be nonnegative");
    if (channel.rows() != layout.n_antennas() || channel.cols() != layout.n_users())
        throw UsageError("mcos: channel dimensions do not match the layout");

    SparsifiedModel model;
    model.channel = channel;
    model.method_tag = "mcos";
    model.parameter = t_prod;

    const int n_cells = static_cast<int>(layout.cell_antennas.size());
    double pruned_power = 0.0;
    for (int c = 0; c < n_cells; ++c) {
        const auto& antennas = layout.cell_antennas[c];
        CVector external(antennas.size());
        CVector internal(antennas.size());
        for (int k1 = 0; k1 < layout.n_users(); ++k1) {
            if (layout.user_positions[k1].cell == c)
                continue;
            for (std::size_t r = 0; r < antennas.size(); ++r)
                external(r) = channel(antennas[r], k1);
            bool semi_orthogonal = true;
            for (int k2 : layout.cell_users[c]) {
                for (std::size_t r = 0; r < antennas.size(); ++r)
                    internal(r) = channel(antennas[r], k2);
                // h_k1 h_k2^H over the cell's antennas
                Complex inner = (external.array() * internal.array().conjugate()).sum();
                if (std::norm(inner) >= t_prod) {
                    semi_orthogonal = false;
                    break;
                }
            }
            if (semi_orthogonal) {
                for (int a : antennas) {
                    pruned_power += std::norm(model.channel(a, k1));
                    model.channel(a, k1) = Complex(0.0, 0.0);
                }
            }
        }
    }
    model.effective_noise =
        NoiseModel::scalar(noise_power + pruned_power / static_cast<double>(channel.rows()));
    model.nonzero_count = count_nonzeros(model.channel);
    return model;
}

namespace detail {

/// Greedy per-cell antenna-row deletion shared by cbs and mibs. score(n1, n2)
/// rates a pair of surviving rows; each round deletes the weaker row (lower
/// total power) of the best-scoring pair. Ties prefer the lexicographically
/// first pair and delete the higher-indexed row.
template <typename ScoreFn>
SparsifiedModel prune_antenna_rows(const CMatrix& channel, const NetworkLayout& layout,
                                   double noise_power, int n_keep, const char* tag,
                                   ScoreFn&& score)
{
    const int n_a = layout.config.n_antennas_per_cell;
    if (n_keep < 1 || n_keep > n_a)
        throw ParameterError(std::string(tag) + ": n_keep must lie in [1, N_a]");
    if (channel.rows() != layout.n_antennas() || channel.cols() != layout.n_users())
        throw UsageError(std::string(tag) + ": channel dimensions do not match the layout");

    SparsifiedModel model;
    model.channel = channel;
    model.method_tag = tag;
    model.parameter = static_cast<double>(n_a - n_keep);

    for (const auto& antennas : layout.cell_antennas) {
        std::vector<int> alive(antennas.begin(), antennas.end());
        for (int round = 0; round < n_a - n_keep; ++round) {
            double best = -1.0;
            std::size_t best_i = 0, best_j = 1;
            for (std::size_t i = 0; i + 1 < alive.size(); ++i) {
                for (std::size_t j = i + 1; j < alive.size(); ++j) {
                    double s = score(model.channel, alive[i], alive[j]);
                    if (s > best) {
                        best = s;
                        best_i = i;
                        best_j = j;
                    }
                }
            }
            int n1 = alive[best_i];
            int n2 = alive[best_j];
            double p1 = model.channel.row(n1).squaredNorm();
            double p2 = model.channel.row(n2).squaredNorm();
            std::size_t drop = (p2 <= p1) ? best_j : best_i;
            model.channel.row(alive[drop]).setZero();
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(drop));
        }
    }

    // deleting a row assumes its information lives in the kept rows, so the
    // noise level is left untouched
    model.effective_noise = NoiseModel::scalar(noise_power);
    model.nonzero_count = count_nonzeros(model.channel);
    return model;
}

inline Complex row_inner(const CMatrix& channel, int n1, int n2)
{
    return (channel.row(n1).array() * channel.row(n2).array().conjugate()).sum();
}

} // namespace detail

/// Correlation-based antenna selection: per cell, repeatedly find the most
/// correlated pair of surviving rows (|g1 g2^H|^2) and zero the weaker one
/// until n_keep rows remain. Noise is not modified.
inline SparsifiedModel cbs(const CMatrix& channel, const NetworkLayout& layout,
                           double noise_power, int n_keep)
{
    return detail::prune_antenna_rows(channel, layout, noise_power, n_keep, "cbs",
                                      [](const CMatrix& h, int n1, int n2) {
                                          return std::norm(detail::row_inner(h, n1, n2));
                                      });
}

/// Mutual-information-based antenna selection: same deletion loop as cbs but
/// pairs are ranked by |I0(n1,n2)| with
///   I(n1,n2)  = log2(a / (a + |g1 g2^H|^2)),  a = |g1|^2 |g2|^2,
///   I0(n1,n2) = I / min(|log2 |g1|^2|, |log2 |g2|^2|).
/// The normalizer is floored at 1e-9; zero-power rows score 0.
inline SparsifiedModel mibs(const CMatrix& channel, const NetworkLayout& layout,
                            double noise_power, int n_keep)
{
    return detail::prune_antenna_rows(
        channel, layout, noise_power, n_keep, "mibs", [](const CMatrix& h, int n1, int n2) {
            double g1 = h.row(n1).squaredNorm();
            double g2 = h.row(n2).squaredNorm();
            if (g1 <= 0.0 || g2 <= 0.0)
                return 0.0;
            double cross = std::norm(detail::row_inner(h, n1, n2));
            double info = std::log2(g1 * g2 / (g1 * g2 + cross));
            double normalizer = std::min(std::abs(std::log2(g1)), std::abs(std::log2(g2)));
            return std::abs(info) / std::max(normalizer, 1e-9);
        });
}

} // namespace cransim
