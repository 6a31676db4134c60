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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace cransim {

/// Factor graph of the linear model y = sqrt(P) H x + w restricted to the
/// nonzero entries of H. Factors are receive branches, variables are users;
/// one edge per nonzero coefficient.
struct FactorGraph {
    int n_factors = 0;
    int n_variables = 0;
    double tx_power = 1.0;
    RVector factor_noise; // per-branch noise power, length n_factors

    // edges in factor-major order (CSR over factors)
    std::vector<int> factor_ptr;      // length n_factors + 1
    std::vector<int> edge_variable;   // variable per edge
    std::vector<Complex> edge_coeff;  // channel entry per edge
    std::vector<std::vector<int>> variable_edges; // edge ids per variable

    std::int64_t nonzero_count() const { return static_cast<std::int64_t>(edge_coeff.size()); }
};

struct SolverSettings {
    double stop_threshold = 0.01; // relative per-user mean change
    int max_iterations = 1000;
    double damping = 0.0; // 0 = plain updates, <1 blends with previous messages
    std::uint64_t schedule_seed = 0;

    void validate() const
    {
        if (stop_threshold <= 0.0)
            throw UsageError("SolverSettings: stop_threshold must be positive");
        if (max_iterations < 1)
            throw UsageError("SolverSettings: max_iterations must be >= 1");
        if (damping < 0.0 || damping >= 1.0)
            throw UsageError("SolverSettings: damping must lie in [0, 1)");
    }
};

inline std::uint64_t count_ops(std::int64_t n_users, std::int64_t nonzeros,
                               std::int64_t iterations);

/// Outcome of a message-passing run. op_count is always the closed form
/// 2*K*s*I; the constructor enforces it.
struct DetectionReport {
    CVector posterior_means;
    RVector posterior_variances;
    int iterations = 0;
    std::uint64_t op_count = 0;
    bool converged = false;

    DetectionReport(CVector means, RVector variances, int iters, std::int64_t nonzeros,
                    bool did_converge)
        : posterior_means(std::move(means)),
          posterior_variances(std::move(variances)),
          iterations(iters),
          op_count(count_ops(posterior_means.size(), nonzeros, iters)),
          converged(did_converge)
    {
    }
};

/// Decoding operation count N_op = 2 K s I.
inline std::uint64_t count_ops(std::int64_t n_users, std::int64_t nonzeros, std::int64_t iterations)
{
    if (n_users < 0 || nonzeros < 0 || iterations < 0)
        throw UsageError("count_ops: arguments must be nonnegative");
    return 2ULL * static_cast<std::uint64_t>(n_users) * static_cast<std::uint64_t>(nonzeros) *
           static_cast<std::uint64_t>(iterations);
}

/// Builds the factor graph of a (sparsified) channel with the given noise
/// model. Zero rows or columns simply produce isolated nodes.
inline FactorGraph build_graph(const CMatrix& channel, const NoiseModel& noise, double tx_power)
{
    if (!noise.all_positive())
        throw UsageError("build_graph: noise model must be positive");
    if (tx_power <= 0.0)
        throw UsageError("build_graph: tx_power must be positive");

    FactorGraph graph;
    graph.n_factors = static_cast<int>(channel.rows());
    graph.n_variables = static_cast<int>(channel.cols());
    graph.tx_power = tx_power;
    graph.factor_noise = noise.as_vector(channel.rows());
    graph.variable_edges.resize(graph.n_variables);
    graph.factor_ptr.reserve(graph.n_factors + 1);
    graph.factor_ptr.push_back(0);

    for (int n = 0; n < graph.n_factors; ++n) {
        for (int k = 0; k < graph.n_variables; ++k) {
            if (channel(n, k) != Complex(0.0, 0.0)) {
                graph.variable_edges[k].push_back(static_cast<int>(graph.edge_coeff.size()));
                graph.edge_variable.push_back(k);
                graph.edge_coeff.push_back(channel(n, k));
            }
        }
        graph.factor_ptr.push_back(static_cast<int>(graph.edge_coeff.size()));
    }
    return graph;
}

/// Message state of a Gaussian message-passing run, exposed so tests can
/// drive individual sweeps (fixed-point and scheduling properties). Regular
/// callers use detect().
class RgmpSolver {
  public:
    RgmpSolver(const FactorGraph& graph, const CVector& observation)
        : graph_(graph), observation_(observation)
    {
        if (observation.size() != graph.n_factors)
            throw UsageError("detect: observation length does not match the antenna count");

        const auto n_edges = graph.edge_coeff.size();
        const double sqrt_p = std::sqrt(graph.tx_power);
        coeff_.resize(n_edges);
        coeff_sq_.resize(n_edges);
        for (std::size_t e = 0; e < n_edges; ++e) {
            coeff_[e] = sqrt_p * graph.edge_coeff[e];
            coeff_sq_[e] = std::norm(coeff_[e]);
        }
        edge_factor_.resize(n_edges);
        for (int n = 0; n < graph.n_factors; ++n)
            for (int e = graph.factor_ptr[n]; e < graph.factor_ptr[n + 1]; ++e)
                edge_factor_[e] = n;

        // variable-to-factor messages start at the prior CN(0, 1)
        msg_mean_.assign(n_edges, Complex(0.0, 0.0));
        msg_var_.assign(n_edges, 1.0);
        means_ = CVector::Zero(graph.n_variables);
        variances_ = RVector::Ones(graph.n_variables);
        rebuild_factor_sums();
        // iteration-0 posteriors, evaluated from the prior messages
        for (int k = 0; k < graph.n_variables; ++k)
            refresh_posterior(k);
        order_.resize(graph.n_variables);
        std::iota(order_.begin(), order_.end(), 0);
    }

    /// One full sweep over all variables in the given order. Returns the
    /// largest relative posterior-mean change.
    double sweep(const std::vector<int>& order, double damping, int iteration_index)
    {
        rebuild_factor_sums();
        double max_change = 0.0;
        for (int k : order) {
            Complex old_mean = means_(k);
            update_variable(k, damping, iteration_index);
            double change =
                std::abs(means_(k) - old_mean) / std::max(std::abs(old_mean), kMeanFloor);
            max_change = std::max(max_change, change);
        }
        return max_change;
    }

    /// Shuffled sweep; the engine's state advances so successive calls use
    /// fresh permutations.
    double sweep_shuffled(std::mt19937_64& engine, double damping, int iteration_index)
    {
        std::shuffle(order_.begin(), order_.end(), engine);
        return sweep(order_, damping, iteration_index);
    }

    const CVector& means() const { return means_; }
    const RVector& variances() const { return variances_; }

  private:
    static constexpr double kMeanFloor = 1e-12;

    void rebuild_factor_sums()
    {
        factor_mean_sum_.assign(graph_.n_factors, Complex(0.0, 0.0));
        factor_var_sum_.assign(graph_.n_factors, 0.0);
        for (std::size_t e = 0; e < coeff_.size(); ++e) {
            factor_mean_sum_[edge_factor_[e]] += coeff_[e] * msg_mean_[e];
            factor_var_sum_[edge_factor_[e]] += coeff_sq_[e] * msg_var_[e];
        }
    }

    /// Posterior of variable k from the current incoming messages, without
    /// touching the outgoing ones.
    void refresh_posterior(int k)
    {
        double precision = 1.0; // unit-variance zero-mean prior
        Complex weighted_mean(0.0, 0.0);
        for (int e : graph_.variable_edges[k]) {
            int n = edge_factor_[e];
            Complex extr_num = observation_(n) - (factor_mean_sum_[n] - coeff_[e] * msg_mean_[e]);
            double extr_var = graph_.factor_noise(n) +
                              std::max(factor_var_sum_[n] - coeff_sq_[e] * msg_var_[e], 0.0);
            precision += coeff_sq_[e] / extr_var;
            weighted_mean += std::conj(coeff_[e]) * extr_num / extr_var;
        }
        means_(k) = weighted_mean / precision;
        variances_(k) = 1.0 / precision;
    }

    void update_variable(int k, double damping, int iteration_index)
    {
        const auto& edges = graph_.variable_edges[k];
        scratch_prec_.resize(edges.size());
        scratch_wmean_.resize(edges.size());

        double precision = 1.0;
        Complex weighted_mean(0.0, 0.0);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            int e = edges[i];
            int n = edge_factor_[e];
            Complex extr_num = observation_(n) - (factor_mean_sum_[n] - coeff_[e] * msg_mean_[e]);
            double extr_var = graph_.factor_noise(n) +
                              std::max(factor_var_sum_[n] - coeff_sq_[e] * msg_var_[e], 0.0);
            scratch_prec_[i] = coeff_sq_[e] / extr_var;
            scratch_wmean_[i] = std::conj(coeff_[e]) * extr_num / extr_var;
            precision += scratch_prec_[i];
            weighted_mean += scratch_wmean_[i];
        }

        Complex mean = weighted_mean / precision;
        if (!std::isfinite(mean.real()) || !std::isfinite(mean.imag()) || !std::isfinite(precision))
            throw SolverError("rgmp: non-finite message", iteration_index);
        means_(k) = mean;
        variances_(k) = 1.0 / precision;

        for (std::size_t i = 0; i < edges.size(); ++i) {
            int e = edges[i];
            int n = edge_factor_[e];
            double out_prec = precision - scratch_prec_[i]; // >= 1 (prior)
            Complex out_mean = (weighted_mean - scratch_wmean_[i]) / out_prec;
            double out_var = 1.0 / out_prec;
            if (damping > 0.0) {
                out_mean = (1.0 - damping) * out_mean + damping * msg_mean_[e];
                out_var = (1.0 - damping) * out_var + damping * msg_var_[e];
            }
            factor_mean_sum_[n] += coeff_[e] * (out_mean - msg_mean_[e]);
            factor_var_sum_[n] += coeff_sq_[e] * (out_var - msg_var_[e]);
            msg_mean_[e] = out_mean;
            msg_var_[e] = out_var;
        }
    }

    const FactorGraph& graph_;
    CVector observation_;
    std::vector<Complex> coeff_;   // sqrt(P) * H entry per edge
    std::vector<double> coeff_sq_;
    std::vector<int> edge_factor_;
    std::vector<Complex> msg_mean_;
    std::vector<double> msg_var_;
    std::vector<Complex> factor_mean_sum_; // sum_j a_nj m_{j->n} per factor
    std::vector<double> factor_var_sum_;   // sum_j |a_nj|^2 v_{j->n} per factor
    CVector means_;
    RVector variances_;
    std::vector<int> order_;
    std::vector<double> scratch_prec_;
    std::vector<Complex> scratch_wmean_;
};

/// Randomized Gaussian message passing over the graph. Variable update order
/// is re-shuffled every iteration from schedule_seed; stops when no posterior
/// mean moves by more than stop_threshold relative to the previous iteration.
inline DetectionReport detect(const FactorGraph& graph, const CVector& observation,
                              const SolverSettings& settings = {})
{
    settings.validate();
    RgmpSolver solver(graph, observation);
    std::mt19937_64 engine(settings.schedule_seed);

    CVector previous = solver.means();
    int iterations = 0;
    bool converged = false;
    for (int t = 1; t <= settings.max_iterations; ++t) {
        solver.sweep_shuffled(engine, settings.damping, t);
        iterations = t;
        double max_change = 0.0;
        for (Eigen::Index k = 0; k < previous.size(); ++k) {
            double change = std::abs(solver.means()(k) - previous(k)) /
                            std::max(std::abs(previous(k)), 1e-12);
            max_change = std::max(max_change, change);
        }
        previous = solver.means();
        if (max_change <= settings.stop_threshold) {
            converged = true;
            break;
        }
    }
    return DetectionReport(solver.means(), solver.variances(), iterations, graph.nonzero_count(),
                           converged);
}

} // namespace cransim
