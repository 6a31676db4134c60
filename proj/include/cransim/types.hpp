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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cransim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Invalid configuration values (bad counts, non-square grids, ...).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller-side misuse: dimension mismatches, bad argument combinations.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Method parameter outside its admissible range.
class ParameterError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Zero-forcing precoder construction failed (rank-deficient submatrix).
class PrecoderError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Message-passing numerical failure; carries the iteration it occurred in.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, int iteration)
        : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration)
    {
    }
    int iteration() const { return iteration_; }

  private:
    int iteration_;
};

/// Inconsistent or empty record streams in the experiment harness.
class IntegrityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical condition that should be impossible for valid inputs.
class InternalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Noise term of a detection model: either a single power level shared by
/// every receive branch or one level per branch.
class NoiseModel {
  public:
    NoiseModel() : scalar_(true), value_(1.0) {}

    static NoiseModel scalar(double n0)
    {
        NoiseModel m;
        m.scalar_ = true;
        m.value_ = n0;
        return m;
    }

    static NoiseModel per_branch(RVector levels)
    {
        NoiseModel m;
        m.scalar_ = false;
        m.levels_ = std::move(levels);
        return m;
    }

    bool is_scalar() const { return scalar_; }

    double scalar_value() const
    {
        if (!scalar_)
            throw UsageError("NoiseModel: per-branch noise has no scalar value");
        return value_;
    }

    /// Broadcasts to a length-n vector (scalar case) or validates length.
    RVector as_vector(Eigen::Index n) const
    {
        if (scalar_)
            return RVector::Constant(n, value_);
        if (levels_.size() != n)
            throw UsageError("NoiseModel: branch count mismatch");
        return levels_;
    }

    bool all_positive() const
    {
        if (scalar_)
            return value_ > 0.0;
        return levels_.size() > 0 && (levels_.array() > 0.0).all();
    }

  private:
    bool scalar_;
    double value_ = 0.0;
    RVector levels_;
};

// splitmix64 step; stable across platforms, used to derive sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a)
{
    return mix_seed(seed ^ mix_seed(a));
}

template <typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, Rest... rest)
{
    return mix_seed(mix_seed(seed, a), rest...);
}

} // namespace cransim
