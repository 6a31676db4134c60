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
#include <random>
#include <vector>

namespace cransim {

enum class AntennaPlacement { CoLocated, UniformRandom };

/// Fading variance as a function of antenna-user distance d: either d^(-alpha)
/// with the configured path-loss exponent, or literally 1/d.
enum class VarianceLaw { PathLossExponent, InverseDistance };

/// Reference point of the border-SNR noise calibration: middle of a cell edge
/// (distance D/2 from the center) or cell corner (sqrt(2)*D/2).
enum class BorderReference { EdgeMidpoint, Corner };

/// Multi-cell scenario parameters. Cells form a square grid of square cells.
struct NetworkConfig {
    int n_cells = 16;
    int n_antennas_per_cell = 8;
    int n_users_per_cell = 4;
    double tx_power = 1.0;
    double path_loss_exponent = 2.0;
    double cell_side = 2.0;
    double border_snr_db = 0.0;
    AntennaPlacement antenna_placement = AntennaPlacement::CoLocated;
    double min_distance = 0.0; // <= 0 selects the default 0.01 * cell_side
    std::uint64_t rng_seed = 1;
    VarianceLaw variance_law = VarianceLaw::PathLossExponent;
    BorderReference border_reference = BorderReference::EdgeMidpoint;

    int n_antennas() const { return n_cells * n_antennas_per_cell; }
    int n_users() const { return n_cells * n_users_per_cell; }

    double effective_min_distance() const
    {
        return min_distance > 0.0 ? min_distance : 0.01 * cell_side;
    }

    /// Side length of the cell grid; throws if n_cells is not a perfect square.
    int grid_size() const
    {
        int g = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_cells))));
        if (g < 1 || g * g != n_cells)
            throw ConfigError("n_cells must be a perfect square, got " + std::to_string(n_cells));
        return g;
    }

    void validate() const
    {
        grid_size();
        if (n_antennas_per_cell < 1 || n_users_per_cell < 1)
            throw ConfigError("antenna and user counts must be >= 1");
        if (tx_power <= 0.0)
            throw ConfigError("tx_power must be positive");
        if (cell_side <= 0.0)
            throw ConfigError("cell_side must be positive");
        if (effective_min_distance() <= 0.0)
            throw ConfigError("min_distance must be positive");
    }
};

struct Position {
    double x = 0.0;
    double y = 0.0;
    int cell = 0; // owning cell (antennas) or home cell (users)
};

/// Fading variance at distance d under the configured law.
inline double distance_variance(const NetworkConfig& config, double d)
{
    double clamped = std::max(d, config.effective_min_distance());
    switch (config.variance_law) {
    case VarianceLaw::InverseDistance:
        return 1.0 / clamped;
    case VarianceLaw::PathLossExponent:
    default:
        return std::pow(clamped, -config.path_loss_exponent);
    }
}

/// Noise power giving a user at the border reference distance the requested
/// average SNR: N_0 = P * var(d_edge) * 10^(-snr_db/10).
inline double noise_power_for(const NetworkConfig& config, double border_snr_db)
{
    double d_edge = config.cell_side / 2.0;
    if (config.border_reference == BorderReference::Corner)
        d_edge *= std::sqrt(2.0);
    // reference distance is not subject to the proximity clamp
    double var_edge = config.variance_law == VarianceLaw::InverseDistance
                          ? 1.0 / d_edge
                          : std::pow(d_edge, -config.path_loss_exponent);
    return config.tx_power * var_edge * std::pow(10.0, -border_snr_db / 10.0);
}

/// Generated geometry: positions, per-cell membership and calibrated noise.
struct NetworkLayout {
    NetworkConfig config;
    std::vector<Position> antenna_positions; // length N
    std::vector<Position> user_positions;    // length K
    double noise_power = 0.0;
    std::vector<std::vector<int>> cell_antennas; // A(c)
    std::vector<std::vector<int>> cell_users;

    int n_antennas() const { return static_cast<int>(antenna_positions.size()); }
    int n_users() const { return static_cast<int>(user_positions.size()); }
};

/// Channel realization with its per-entry variance profile.
struct ChannelMatrix {
    CMatrix entries;      // N x K
    RMatrix variance_map; // N x K, entry (i,j) = variance of entries(i,j)
};

inline NetworkLayout build_layout(const NetworkConfig& config)
{
    config.validate();
    int g = config.grid_size();
    double half = config.cell_side / 2.0;

    NetworkLayout layout;
    layout.config = config;
    layout.noise_power = noise_power_for(config, config.border_snr_db);
    layout.cell_antennas.resize(config.n_cells);
    layout.cell_users.resize(config.n_cells);
    layout.antenna_positions.reserve(config.n_antennas());
    layout.user_positions.reserve(config.n_users());

    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> offset(-half, half);

    for (int c = 0; c < config.n_cells; ++c) {
        double cx = (c % g + 0.5) * config.cell_side;
        double cy = (c / g + 0.5) * config.cell_side;
        for (int a = 0; a < config.n_antennas_per_cell; ++a) {
            Position p{cx, cy, c};
            if (config.antenna_placement == AntennaPlacement::UniformRandom) {
                p.x += offset(rng);
                p.y += offset(rng);
            }
            layout.cell_antennas[c].push_back(layout.n_antennas());
            layout.antenna_positions.push_back(p);
        }
        for (int u = 0; u < config.n_users_per_cell; ++u) {
            Position p{cx + offset(rng), cy + offset(rng), c};
            layout.cell_users[c].push_back(layout.n_users());
            layout.user_positions.push_back(p);
        }
    }
    return layout;
}

inline ChannelMatrix draw_channel(const NetworkLayout& layout, std::uint64_t rng_seed)
{
    const int n = layout.n_antennas();
    const int k = layout.n_users();
    ChannelMatrix channel;
    channel.variance_map.resize(n, k);
    channel.entries.resize(n, k);

    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            double dx = layout.antenna_positions[i].x - layout.user_positions[j].x;
            double dy = layout.antenna_positions[i].y - layout.user_positions[j].y;
            channel.variance_map(i, j) = distance_variance(layout.config, std::hypot(dx, dy));
        }
    }

    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            double sigma = std::sqrt(channel.variance_map(i, j) / 2.0);
            double re = gauss(rng) * sigma;
            double im = gauss(rng) * sigma;
            channel.entries(i, j) = Complex(re, im);
        }
    }
    return channel;
}

} // namespace cransim
