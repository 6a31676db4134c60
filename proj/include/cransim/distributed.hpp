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

#include "centralized.hpp"
#include "network.hpp"
#include "rgmp.hpp"
#include "types.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace cransim {

enum class SelectionStrategy { PSS, DRPS, MSS };

/// Users a cell's precoder is matched to, in ascending index order.
struct SelectionSet {
    int cell = 0;
    std::vector<int> users;
    SelectionStrategy strategy = SelectionStrategy::PSS;
    int n_p = 0; // DRPS: selected users; MSS: selected external users
};

enum class PrecoderKind { Matched, ZeroForcing };

/// Per-cell precoding matrix B applied to that cell's received vector.
struct CellPrecoder {
    int cell = 0;
    CMatrix matrix;            // |M| x N_a
    PrecoderKind kind = PrecoderKind::Matched;
    CMatrix source_submatrix;  // G, N_a x |M|
    std::vector<int> antenna_indices; // rows of H this precoder acts on
};

/// Stacked reduced model the BBU detects on: effective channel B H, diagonal
/// per-branch noise of Eq-(10) type for the detector, and the true correlated
/// covariance N_0 B B^H kept for honest rate evaluation.
struct EffectiveModel {
    CMatrix effective_channel; // (sum_c |M_c|) x K
    CVector effective_observation;
    RVector branch_noise;
    CMatrix true_noise_covariance;
    std::int64_t nonzero_count = 0;
};

inline FactorGraph build_graph(const EffectiveModel& model, double tx_power)
{
    return build_graph(model.effective_channel, NoiseModel::per_branch(model.branch_noise),
                       tx_power);
}

namespace detail {

inline void check_cell(const NetworkLayout& layout, int cell, const char* where)
{
    if (cell < 0 || cell >= static_cast<int>(layout.cell_antennas.size()))
        throw UsageError(std::string(where) + ": cell index out of range");
}

/// Received power of user k at cell c's antennas, Sum_{n in A(c)} |H(n,k)|^2.
inline RVector received_powers(const CMatrix& channel, const NetworkLayout& layout, int cell)
{
    RVector p = RVector::Zero(channel.cols());
    for (int a : layout.cell_antennas[cell])
        for (Eigen::Index k = 0; k < channel.cols(); ++k)
            p(k) += std::norm(channel(a, k));
    return p;
}

/// Indices of the n strongest users among `candidates` (ties to lower index).
inline std::vector<int> strongest(const RVector& power, std::vector<int> candidates, int n)
{
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        if (power(a) != power(b))
            return power(a) > power(b);
        return a < b;
    });
    candidates.resize(std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(n)));
    return candidates;
}

} // namespace detail

/// Position-based selection: exactly the users homed in the cell.
inline SelectionSet select_pss(const NetworkLayout& layout, int cell)
{
    detail::check_cell(layout, cell, "select_pss");
    SelectionSet set;
    set.cell = cell;
    set.strategy = SelectionStrategy::PSS;
    set.users = layout.cell_users[cell];
    std::sort(set.users.begin(), set.users.end());
    return set;
}

/// Received-power selection: the n_p users with the highest power at the
/// cell's antennas, anywhere in the network.
inline SelectionSet select_drps(const CMatrix& channel, const NetworkLayout& layout, int cell,
                                int n_p)
{
    detail::check_cell(layout, cell, "select_drps");
    if (n_p < 1 || n_p > layout.n_users())
        throw ParameterError("select_drps: n_p must lie in [1, K]");

    RVector p = detail::received_powers(channel, layout, cell);
    std::vector<int> all(static_cast<std::size_t>(layout.n_users()));
    std::iota(all.begin(), all.end(), 0);

    SelectionSet set;
    set.cell = cell;
    set.strategy = SelectionStrategy::DRPS;
    set.n_p = n_p;
    set.users = detail::strongest(p, std::move(all), n_p);
    std::sort(set.users.begin(), set.users.end());
    return set;
}

/// Mixed selection: the cell's own users plus the n_p_external strongest
/// users homed elsewhere.
inline SelectionSet select_mss(const CMatrix& channel, const NetworkLayout& layout, int cell,
                               int n_p_external)
{
    detail::check_cell(layout, cell, "select_mss");
    if (n_p_external < 0)
        throw ParameterError("select_mss: n_p_external must be nonnegative");

    RVector p = detail::received_powers(channel, layout, cell);
    std::vector<int> externals;
    for (int k = 0; k < layout.n_users(); ++k)
        if (layout.user_positions[k].cell != cell)
            externals.push_back(k);

    SelectionSet set;
    set.cell = cell;
    set.strategy = SelectionStrategy::MSS;
    set.n_p = n_p_external;
    set.users = layout.cell_users[cell];
    auto picked = detail::strongest(p, std::move(externals), n_p_external);
    set.users.insert(set.users.end(), picked.begin(), picked.end());
    std::sort(set.users.begin(), set.users.end());
    return set;
}

/// Builds the cell's precoder from G = H(A(cell), M): B = G^H (matched) or
/// the left pseudo-inverse (G^H G)^(-1) G^H (zero-forcing, B G = I).
inline CellPrecoder build_precoder(const CMatrix& channel, const NetworkLayout& layout,
                                   const SelectionSet& selection, PrecoderKind kind)
{
    detail::check_cell(layout, selection.cell, "build_precoder");
    if (selection.users.empty())
        throw UsageError("build_precoder: empty selection set");
    for (int k : selection.users)
        if (k < 0 || k >= layout.n_users())
            throw UsageError("build_precoder: user index out of range");

    const auto& antennas = layout.cell_antennas[selection.cell];
    const auto n_a = static_cast<Eigen::Index>(antennas.size());
    const auto m = static_cast<Eigen::Index>(selection.users.size());

    CellPrecoder precoder;
    precoder.cell = selection.cell;
    precoder.kind = kind;
    precoder.antenna_indices = antennas;
    precoder.source_submatrix.resize(n_a, m);
    for (Eigen::Index r = 0; r < n_a; ++r)
        for (Eigen::Index j = 0; j < m; ++j)
            precoder.source_submatrix(r, j) =
                channel(antennas[static_cast<std::size_t>(r)],
                        selection.users[static_cast<std::size_t>(j)]);

    if (kind == PrecoderKind::Matched) {
        precoder.matrix = precoder.source_submatrix.adjoint();
        return precoder;
    }

    if (m > n_a)
        throw PrecoderError("build_precoder: cell " + std::to_string(selection.cell) +
                            " selects more users than antennas for zero-forcing");
    Eigen::ColPivHouseholderQR<CMatrix> qr(precoder.source_submatrix);
    if (qr.rank() < m)
        throw PrecoderError("build_precoder: rank-deficient submatrix in cell " +
                            std::to_string(selection.cell));
    precoder.matrix = qr.solve(CMatrix::Identity(n_a, n_a));
    double residual =
        (precoder.matrix * precoder.source_submatrix - CMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (residual >= 1e-8)
        throw PrecoderError("build_precoder: zero-forcing residual " + std::to_string(residual) +
                            " in cell " + std::to_string(selection.cell));
    return precoder;
}

/// Applies each cell's precoder to its own antenna rows and observation slice
/// and stacks the results in ascending cell order. Branch n noise is
/// N_0 ||row n of B||^2; the full covariance keeps the correlation.
inline EffectiveModel build_effective_model(const CMatrix& channel, const CVector& observation,
                                            double noise_power,
                                            const std::vector<CellPrecoder>& precoders)
{
    const int n_cells = static_cast<int>(precoders.size());
    if (channel.rows() != observation.size())
        throw UsageError("build_effective_model: channel and observation disagree on antennas");

    Eigen::Index total_rows = 0;
    for (const auto& p : precoders)
        total_rows += p.matrix.rows();

    EffectiveModel model;
    model.effective_channel.resize(total_rows, channel.cols());
    model.effective_observation.resize(total_rows);
    model.branch_noise.resize(total_rows);
    model.true_noise_covariance = CMatrix::Zero(total_rows, total_rows);

    Eigen::Index row = 0;
    for (int c = 0; c < n_cells; ++c) {
        const auto& precoder = precoders[static_cast<std::size_t>(c)];
        if (precoder.cell != c)
            throw UsageError("build_effective_model: precoders must be listed per cell in order");
        const Eigen::Index n_a = precoder.matrix.cols();
        const Eigen::Index block = precoder.matrix.rows();
        if (static_cast<Eigen::Index>(precoder.antenna_indices.size()) != n_a)
            throw UsageError("build_effective_model: precoder antenna list does not match B");

        CMatrix cell_rows(n_a, channel.cols());
        CVector cell_obs(n_a);
        for (Eigen::Index r = 0; r < n_a; ++r) {
            int antenna = precoder.antenna_indices[static_cast<std::size_t>(r)];
            if (antenna < 0 || antenna >= channel.rows())
                throw UsageError("build_effective_model: antenna index out of range");
            cell_rows.row(r) = channel.row(antenna);
            cell_obs(r) = observation(antenna);
        }

        model.effective_channel.middleRows(row, block) = precoder.matrix * cell_rows;
        model.effective_observation.segment(row, block) = precoder.matrix * cell_obs;
        model.true_noise_covariance.block(row, row, block, block) =
            noise_power * (precoder.matrix * precoder.matrix.adjoint());
        for (Eigen::Index r = 0; r < block; ++r)
            model.branch_noise(row + r) = noise_power * precoder.matrix.row(r).squaredNorm();
        row += block;
    }
    model.nonzero_count = count_nonzeros(model.effective_channel);
    return model;
}

} // namespace cransim
