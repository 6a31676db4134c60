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

#include <cransim/network.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace cransim;

namespace {

NetworkConfig paper_config()
{
    NetworkConfig c;
    c.n_cells = 16;
    c.n_antennas_per_cell = 8;
    c.n_users_per_cell = 4;
    c.tx_power = 1.0;
    c.path_loss_exponent = 2.0;
    c.cell_side = 2.0;
    c.border_snr_db = 0.0;
    c.rng_seed = 7;
    return c;
}

} // namespace

TEST_CASE("build_layout produces the 16-cell scenario dimensions")
{
    auto layout = build_layout(paper_config());
    CHECK(layout.n_antennas() == 128);
    CHECK(layout.n_users() == 64);
    for (const auto& antennas : layout.cell_antennas)
        CHECK(antennas.size() == 8);
    for (const auto& users : layout.cell_users)
        CHECK(users.size() == 4);
}

TEST_CASE("degenerate single-cell layout")
{
    NetworkConfig c;
    c.n_cells = 1;
    c.n_antennas_per_cell = 1;
    c.n_users_per_cell = 1;
    auto layout = build_layout(c);
    REQUIRE(layout.n_antennas() == 1);
    REQUIRE(layout.n_users() == 1);
    // co-located mode puts the single antenna at the cell center
    CHECK(layout.antenna_positions[0].x == Catch::Approx(c.cell_side / 2.0));
    CHECK(layout.antenna_positions[0].y == Catch::Approx(c.cell_side / 2.0));
}

TEST_CASE("border-SNR calibration: P=1, alpha=2, D=2, 0 dB gives N_0 = 1")
{
    auto layout = build_layout(paper_config());
    CHECK(layout.noise_power == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("corner border reference uses sqrt(2) * D/2")
{
    auto c = paper_config();
    c.border_reference = BorderReference::Corner;
    // var(sqrt(2))^ = 1/2 at alpha = 2
    CHECK(noise_power_for(c, 0.0) == Catch::Approx(0.5));
}

TEST_CASE("non-square cell count is a configuration error")
{
    auto c = paper_config();
    c.n_cells = 12;
    CHECK_THROWS_AS(build_layout(c), ConfigError);
}

TEST_CASE("antenna index sets partition the antennas and users stay home")
{
    auto c = paper_config();
    c.antenna_placement = AntennaPlacement::UniformRandom;
    auto layout = build_layout(c);

    std::vector<int> seen(static_cast<std::size_t>(layout.n_antennas()), 0);
    for (int cell = 0; cell < c.n_cells; ++cell)
        for (int a : layout.cell_antennas[cell]) {
            ++seen[static_cast<std::size_t>(a)];
            CHECK(layout.antenna_positions[static_cast<std::size_t>(a)].cell == cell);
        }
    for (int count : seen)
        CHECK(count == 1);

    int g = c.grid_size();
    for (const auto& user : layout.user_positions) {
        double cx = (user.cell % g + 0.5) * c.cell_side;
        double cy = (user.cell / g + 0.5) * c.cell_side;
        CHECK(std::abs(user.x - cx) <= c.cell_side / 2.0 + 1e-12);
        CHECK(std::abs(user.y - cy) <= c.cell_side / 2.0 + 1e-12);
    }
}

TEST_CASE("equal seeds reproduce layouts and channels exactly")
{
    auto c = paper_config();
    c.antenna_placement = AntennaPlacement::UniformRandom;
    auto a = build_layout(c);
    auto b = build_layout(c);
    REQUIRE(a.n_antennas() == b.n_antennas());
    for (int i = 0; i < a.n_antennas(); ++i) {
        CHECK(a.antenna_positions[static_cast<std::size_t>(i)].x ==
              b.antenna_positions[static_cast<std::size_t>(i)].x);
        CHECK(a.antenna_positions[static_cast<std::size_t>(i)].y ==
              b.antenna_positions[static_cast<std::size_t>(i)].y);
    }
    auto ha = draw_channel(a, 99);
    auto hb = draw_channel(b, 99);
    CHECK(ha.entries == hb.entries);

    auto hc = draw_channel(a, 100);
    CHECK(ha.entries != hc.entries);
}

TEST_CASE("channel dimensions and clamped variance map")
{
    auto layout = build_layout(paper_config());
    auto channel = draw_channel(layout, 3);
    CHECK(channel.entries.rows() == 128);
    CHECK(channel.entries.cols() == 64);

    double min_d = layout.config.effective_min_distance();
    double max_var = std::pow(min_d, -layout.config.path_loss_exponent);
    for (int i = 0; i < channel.variance_map.rows(); ++i)
        for (int j = 0; j < channel.variance_map.cols(); ++j) {
            CHECK(channel.variance_map(i, j) > 0.0);
            CHECK(channel.variance_map(i, j) <= max_var + 1e-12);
        }
}

TEST_CASE("unit distance gives unit entry variance")
{
    // antenna and user exactly at the clamp distance 1.0
    NetworkConfig c;
    c.n_cells = 1;
    c.n_antennas_per_cell = 1;
    c.n_users_per_cell = 1;
    c.min_distance = 1.0;
    NetworkLayout layout;
    layout.config = c;
    layout.noise_power = 1.0;
    layout.antenna_positions = {{0.0, 0.0, 0}};
    layout.user_positions = {{0.0, 0.0, 0}};
    layout.cell_antennas = {{0}};
    layout.cell_users = {{0}};

    auto channel = draw_channel(layout, 1);
    CHECK(channel.variance_map(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("Monte-Carlo entry variance matches the map at distance 2")
{
    // variance = 2^(-2) = 0.25; sample variance over 1e5 draws in [0.24, 0.26]
    NetworkConfig c;
    c.n_cells = 1;
    c.n_antennas_per_cell = 1;
    c.n_users_per_cell = 1;
    NetworkLayout layout;
    layout.config = c;
    layout.noise_power = 1.0;
    layout.antenna_positions = {{0.0, 0.0, 0}};
    layout.user_positions = {{2.0, 0.0, 0}};
    layout.cell_antennas = {{0}};
    layout.cell_users = {{0}};

    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        auto channel = draw_channel(layout, 1000 + static_cast<std::uint64_t>(i));
        acc += std::norm(channel.entries(0, 0));
    }
    double sample_var = acc / n;
    CHECK(sample_var > 0.24);
    CHECK(sample_var < 0.26);
}

TEST_CASE("empirical per-entry variance passes a chi-square check")
{
    // |h|^2 * 2/sigma^2 ~ chi^2_2 per draw; the sum over n draws is chi^2_{2n}.
    // Normal approximation of the 1% two-sided band for n = 10^4.
    NetworkConfig c;
    c.n_cells = 1;
    c.n_antennas_per_cell = 1;
    c.n_users_per_cell = 1;
    NetworkLayout layout;
    layout.config = c;
    layout.noise_power = 1.0;
    layout.antenna_positions = {{0.0, 0.0, 0}};
    layout.user_positions = {{0.3, 1.4, 0}};
    layout.cell_antennas = {{0}};
    layout.cell_users = {{0}};

    const int n = 10000;
    double sigma2 = draw_channel(layout, 0).variance_map(0, 0);
    double t = 0.0;
    for (int d = 0; d < n; ++d) {
        auto redraw = draw_channel(layout, 20000 + static_cast<std::uint64_t>(d));
        t += 2.0 * std::norm(redraw.entries(0, 0)) / sigma2;
    }
    double dof = 2.0 * n;
    double z = (t - dof) / std::sqrt(2.0 * dof);
    CHECK(std::abs(z) < 2.576);
}

TEST_CASE("variance law options")
{
    auto c = paper_config();
    CHECK(distance_variance(c, 2.0) == Catch::Approx(0.25));
    c.variance_law = VarianceLaw::InverseDistance;
    CHECK(distance_variance(c, 2.0) == Catch::Approx(0.5));
    CHECK(distance_variance(c, 1e-9) == Catch::Approx(1.0 / c.effective_min_distance()));
}
