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
#include "config.hpp"
#include "distributed.hpp"
#include "mmse.hpp"
#include "network.hpp"
#include "rgmp.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace cransim {

/// One experiment arm: a sparsification method with its parameters.
/// Textual form: pure | crps:<p_min> | mcos:<t_prod> | cbs:<L_r> | mibs:<L_r>
/// | pss[:kind] | drps:<n_p>[:kind] | mss:<n_ext>[:kind], kind = matched|zf.
struct MethodSpec {
    std::string id;
    double threshold = 0.0; // crps p_min / mcos t_prod
    int count_param = 0;    // cbs/mibs rows removed; drps n_p; mss external users
    PrecoderKind precoder = PrecoderKind::Matched;

    bool is_distributed() const { return id == "pss" || id == "drps" || id == "mss"; }

    /// Whether the sparsification level is a closed-form function of the
    /// network shape (true for everything except crps and mcos).
    bool level_deterministic() const { return id != "crps" && id != "mcos"; }

    static MethodSpec parse(const std::string& token);
    std::string params_string() const;
    std::string token() const
    {
        std::string p = params_string();
        return p.empty() ? id : id + ":" + p;
    }
};

namespace detail {

inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string format_param(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline PrecoderKind parse_kind(const std::string& s, const std::string& token)
{
    if (s == "matched")
        return PrecoderKind::Matched;
    if (s == "zf" || s == "zero-forcing")
        return PrecoderKind::ZeroForcing;
    throw ConfigError("method '" + token + "': unknown precoder kind '" + s +
                      "' (expected matched or zf)");
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

} // namespace detail

inline MethodSpec MethodSpec::parse(const std::string& token)
{
    auto parts = detail::split(token, ':');
    MethodSpec m;
    m.id = parts[0];

    auto expect_parts = [&](std::size_t lo, std::size_t hi) {
        if (parts.size() < lo || parts.size() > hi)
            throw ConfigError("method '" + token + "': malformed parameter list");
    };
    auto number = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("method '" + token + "': bad numeric parameter '" + s + "'");
        }
    };

    if (m.id == "pure") {
        expect_parts(1, 1);
    } else if (m.id == "crps" || m.id == "mcos") {
        expect_parts(2, 2);
        m.threshold = number(parts[1]);
    } else if (m.id == "cbs" || m.id == "mibs") {
        expect_parts(2, 2);
        m.count_param = static_cast<int>(number(parts[1]));
    } else if (m.id == "pss") {
        expect_parts(1, 2);
        if (parts.size() == 2)
            m.precoder = detail::parse_kind(parts[1], token);
    } else if (m.id == "drps" || m.id == "mss") {
        expect_parts(2, 3);
        m.count_param = static_cast<int>(number(parts[1]));
        if (parts.size() == 3)
            m.precoder = detail::parse_kind(parts[2], token);
    } else {
        throw ConfigError("unknown method id '" + m.id + "'");
    }
    return m;
}

inline std::string MethodSpec::params_string() const
{
    const char* kind = precoder == PrecoderKind::Matched ? "matched" : "zf";
    if (id == "crps" || id == "mcos")
        return detail::format_param(threshold);
    if (id == "cbs" || id == "mibs")
        return std::to_string(count_param);
    if (id == "pss")
        return kind;
    if (id == "drps" || id == "mss")
        return std::to_string(count_param) + ":" + kind;
    return {};
}

struct ExperimentSpec {
    NetworkConfig network;
    std::vector<MethodSpec> methods;
    std::vector<double> snr_points_db;
    int trials = 1;
    std::uint64_t base_seed = 0;
    std::string output_path = "records.csv";

    void validate() const
    {
        network.validate();
        if (methods.empty())
            throw ConfigError("experiment: methods list is empty");
        if (snr_points_db.empty())
            throw ConfigError("experiment: snr_points_db is empty");
        for (double s : snr_points_db)
            if (!std::isfinite(s))
                throw ConfigError("experiment: SNR points must be finite");
        if (trials < 1)
            throw ConfigError("experiment: trials must be >= 1");
    }
};

/// One (method, SNR, trial) outcome. channel_hash and failure exist only in
/// memory; the CSV schema is fixed.
struct MetricsRecord {
    int method_ordinal = 0;
    std::string method_id;
    std::string params;
    double snr_db = 0.0;
    int trial = 0;
    double asr = 0.0;
    std::int64_t level = 0;
    int iterations = 0;
    std::uint64_t op_count = 0;
    bool converged = false;
    std::uint64_t channel_hash = 0;
    std::string failure;

    bool failed() const { return !failure.empty(); }
};

struct SummaryRow {
    std::string method_id;
    std::string params;
    double snr_db = 0.0;
    double mean_asr = 0.0;
    double std_asr = 0.0;
    double mean_iterations = 0.0;
    double mean_ops = 0.0;
    double level = 0.0;
    int trials = 0;
};

namespace detail {

inline std::uint64_t hash_bytes(const void* data, std::size_t size, std::uint64_t h)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL; // FNV-1a
    }
    return h;
}

inline std::uint64_t hash_channel(const CMatrix& m)
{
    return hash_bytes(m.data(), sizeof(Complex) * static_cast<std::size_t>(m.size()),
                      0xcbf29ce484222325ULL);
}

/// CN(0,1) vector, independent real/imaginary parts.
inline CVector draw_unit_gaussian(Eigen::Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double re = gauss(rng);
        double im = gauss(rng);
        v(i) = Complex(re, im) / std::sqrt(2.0);
    }
    return v;
}

struct MethodResult {
    std::int64_t level = 0;
    DetectionReport report;
    RatePerformance rate;
};

inline MethodResult run_method(const MethodSpec& method, const NetworkLayout& layout,
                               const CMatrix& channel, const CVector& observation,
                               double noise_power, const SolverSettings& settings)
{
    const double p = layout.config.tx_power;

    if (!method.is_distributed()) {
        SparsifiedModel model;
        if (method.id == "pure") {
            model = dense_model(channel, noise_power);
        } else if (method.id == "crps") {
            model = crps(channel, noise_power, method.threshold);
        } else if (method.id == "mcos") {
            model = mcos(channel, layout, noise_power, method.threshold);
        } else if (method.id == "cbs" || method.id == "mibs") {
            int n_keep = layout.config.n_antennas_per_cell - method.count_param;
            model = method.id == "cbs" ? cbs(channel, layout, noise_power, n_keep)
                                       : mibs(channel, layout, noise_power, n_keep);
        } else {
            throw UsageError("run_method: unknown method id " + method.id);
        }
        FactorGraph graph = build_graph(model, p);
        DetectionReport report = detect(graph, observation, settings);
        LinearReceiver receiver = mmse_filter(model.channel, p, model.effective_noise);
        RatePerformance rate = evaluate_asr(receiver, channel, p, noise_power);
        return MethodResult{model.nonzero_count, std::move(report), std::move(rate)};
    }

    std::vector<CellPrecoder> precoders;
    precoders.reserve(layout.cell_antennas.size());
    for (int c = 0; c < static_cast<int>(layout.cell_antennas.size()); ++c) {
        SelectionSet selection;
        if (method.id == "pss")
            selection = select_pss(layout, c);
        else if (method.id == "drps")
            selection = select_drps(channel, layout, c, method.count_param);
        else
            selection = select_mss(channel, layout, c, method.count_param);
        precoders.push_back(build_precoder(channel, layout, selection, method.precoder));
    }
    EffectiveModel model = build_effective_model(channel, observation, noise_power, precoders);
    FactorGraph graph = build_graph(model, p);
    DetectionReport report = detect(graph, model.effective_observation, settings);
    LinearReceiver receiver =
        mmse_filter(model.effective_channel, p, NoiseModel::per_branch(model.branch_noise));
    RatePerformance rate =
        evaluate_asr(receiver, model.effective_channel, p, model.true_noise_covariance);
    return MethodResult{model.nonzero_count, std::move(report), std::move(rate)};
}

} // namespace detail

/// Runs the full pipeline over (method x SNR x trial). Within a trial every
/// method sees the same channel realization and observation; records come
/// back sorted by (method ordinal, snr, trial). Module errors become failure
/// records rather than aborting the run.
inline std::vector<MetricsRecord> run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    NetworkLayout layout = build_layout(spec.network);
    const double p = spec.network.tx_power;

    constexpr std::uint64_t kSignalSalt = 0x5349474e414cULL;   // stream tag
    constexpr std::uint64_t kScheduleSalt = 0x534348454455ULL; // stream tag

    std::vector<MetricsRecord> records;
    records.reserve(spec.methods.size() * spec.snr_points_db.size() *
                    static_cast<std::size_t>(spec.trials));

    for (std::size_t si = 0; si < spec.snr_points_db.size(); ++si) {
        const double snr_db = spec.snr_points_db[si];
        const double noise_power = noise_power_for(spec.network, snr_db);
        for (int trial = 0; trial < spec.trials; ++trial) {
            ChannelMatrix channel =
                draw_channel(layout, spec.base_seed ^ static_cast<std::uint64_t>(trial));
            std::uint64_t channel_hash = detail::hash_channel(channel.entries);

            std::uint64_t signal_seed = mix_seed(spec.base_seed, kSignalSalt, si,
                                                 static_cast<std::uint64_t>(trial));
            CVector x = detail::draw_unit_gaussian(layout.n_users(), signal_seed);
            CVector w = std::sqrt(noise_power) *
                        detail::draw_unit_gaussian(layout.n_antennas(), mix_seed(signal_seed, 1));
            CVector y = std::sqrt(p) * (channel.entries * x) + w;

            SolverSettings settings;
            settings.schedule_seed = mix_seed(spec.base_seed, kScheduleSalt, si,
                                              static_cast<std::uint64_t>(trial));

            for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
                const MethodSpec& method = spec.methods[mi];
                MetricsRecord rec;
                rec.method_ordinal = static_cast<int>(mi);
                rec.method_id = method.id;
                rec.params = method.params_string();
                rec.snr_db = snr_db;
                rec.trial = trial;
                rec.channel_hash = channel_hash;
                try {
                    auto result = detail::run_method(method, layout, channel.entries, y,
                                                     noise_power, settings);
                    rec.asr = result.rate.sum_rate;
                    rec.level = result.level;
                    rec.iterations = result.report.iterations;
                    rec.op_count = result.report.op_count;
                    rec.converged = result.report.converged;
                } catch (const std::exception& e) {
                    rec.failure = e.what();
                    rec.asr = std::nan("");
                }
                records.push_back(std::move(rec));
            }
        }
    }

    std::sort(records.begin(), records.end(), [](const MetricsRecord& a, const MetricsRecord& b) {
        if (a.method_ordinal != b.method_ordinal)
            return a.method_ordinal < b.method_ordinal;
        if (a.snr_db != b.snr_db)
            return a.snr_db < b.snr_db;
        return a.trial < b.trial;
    });
    return records;
}

/// Per (method, params, SNR) aggregates over the successful records. Methods
/// with a closed-form level must report the same level in every trial.
inline std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records)
{
    if (records.empty())
        throw IntegrityError("summarize: empty record stream");

    struct Group {
        SummaryRow row;
        std::vector<double> asr;
        double iter_sum = 0.0;
        double ops_sum = 0.0;
        double level_sum = 0.0;
        std::int64_t first_level = -1;
        bool level_deterministic = true;
    };

    std::vector<Group> groups;
    std::map<std::string, std::size_t> index;
    for (const auto& rec : records) {
        std::string key =
            rec.method_id + "\x1f" + rec.params + "\x1f" + detail::format_double(rec.snr_db);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, groups.size()).first;
            groups.emplace_back();
            Group& g = groups.back();
            g.row.method_id = rec.method_id;
            g.row.params = rec.params;
            g.row.snr_db = rec.snr_db;
            MethodSpec probe;
            probe.id = rec.method_id;
            g.level_deterministic = probe.level_deterministic();
        }
        Group& g = groups[it->second];
        if (rec.failed())
            continue;
        if (g.level_deterministic) {
            if (g.first_level < 0)
                g.first_level = rec.level;
            else if (g.first_level != rec.level)
                throw IntegrityError("summarize: method " + rec.method_id +
                                     " has a non-constant sparsification level");
        }
        g.asr.push_back(rec.asr);
        g.iter_sum += rec.iterations;
        g.ops_sum += static_cast<double>(rec.op_count);
        g.level_sum += static_cast<double>(rec.level);
    }

    std::vector<SummaryRow> rows;
    rows.reserve(groups.size());
    for (auto& g : groups) {
        SummaryRow row = g.row;
        const auto n = g.asr.size();
        row.trials = static_cast<int>(n);
        if (n == 0) {
            row.mean_asr = row.std_asr = row.mean_iterations = row.mean_ops = std::nan("");
            row.level = std::nan("");
        } else {
            double mean = 0.0;
            for (double a : g.asr)
                mean += a;
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (double a : g.asr)
                var += (a - mean) * (a - mean);
            row.mean_asr = mean;
            row.std_asr = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
            row.mean_iterations = g.iter_sum / static_cast<double>(n);
            row.mean_ops = g.ops_sum / static_cast<double>(n);
            row.level = g.level_deterministic ? static_cast<double>(g.first_level)
                                              : g.level_sum / static_cast<double>(n);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_records_csv(std::ostream& out, const std::vector<MetricsRecord>& records)
{
    out << "method,params,snr_db,trial,asr,level,iters,ops,converged\n";
    for (const auto& r : records) {
        out << r.method_id << ',' << r.params << ',' << detail::format_double(r.snr_db) << ','
            << r.trial << ',' << detail::format_double(r.asr) << ',' << r.level << ','
            << r.iterations << ',' << r.op_count << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows)
{
    out << "method,params,snr_db,mean_asr,std_asr,mean_iters,mean_ops,level,trials\n";
    for (const auto& r : rows) {
        out << r.method_id << ',' << r.params << ',' << detail::format_double(r.snr_db) << ','
            << detail::format_double(r.mean_asr) << ',' << detail::format_double(r.std_asr) << ','
            << detail::format_double(r.mean_iterations) << ','
            << detail::format_double(r.mean_ops) << ',' << detail::format_double(r.level) << ','
            << r.trials << '\n';
    }
}

/// Reads back a records CSV produced by write_records_csv. Ordinals are
/// assigned by first appearance of (method, params).
inline std::vector<MetricsRecord> read_records_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw IntegrityError("records CSV: empty file");
    if (line == "method,params,snr_db,trial,asr,level,iters,ops,converged\r")
        line.pop_back();
    if (line != "method,params,snr_db,trial,asr,level,iters,ops,converged")
        throw IntegrityError("records CSV: unexpected header: " + line);

    std::vector<MetricsRecord> records;
    std::map<std::string, int> ordinals;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 9)
            throw IntegrityError("records CSV line " + std::to_string(line_no) +
                                 ": expected 9 fields");
        MetricsRecord rec;
        rec.method_id = fields[0];
        rec.params = fields[1];
        try {
            rec.snr_db = std::stod(fields[2]);
            rec.trial = std::stoi(fields[3]);
            rec.asr = std::stod(fields[4]);
            rec.level = std::stoll(fields[5]);
            rec.iterations = std::stoi(fields[6]);
            rec.op_count = std::stoull(fields[7]);
            rec.converged = fields[8] == "1";
        } catch (const std::exception&) {
            throw IntegrityError("records CSV line " + std::to_string(line_no) +
                                 ": malformed field");
        }
        if (std::isnan(rec.asr))
            rec.failure = "recorded failure";
        std::string key = rec.method_id + "\x1f" + rec.params;
        auto it = ordinals.find(key);
        if (it == ordinals.end())
            it = ordinals.emplace(key, static_cast<int>(ordinals.size())).first;
        rec.method_ordinal = it->second;
        records.push_back(std::move(rec));
    }
    return records;
}

/// Builds a NetworkConfig from flat config keys (all optional, defaults per
/// the struct).
inline NetworkConfig network_config_from(const ConfigMap& cfg)
{
    NetworkConfig n;
    n.n_cells = static_cast<int>(cfg.get_int("n_cells", n.n_cells));
    n.n_antennas_per_cell =
        static_cast<int>(cfg.get_int("n_antennas_per_cell", n.n_antennas_per_cell));
    n.n_users_per_cell = static_cast<int>(cfg.get_int("n_users_per_cell", n.n_users_per_cell));
    n.tx_power = cfg.get_double("tx_power", n.tx_power);
    n.path_loss_exponent = cfg.get_double("path_loss_exponent", n.path_loss_exponent);
    n.cell_side = cfg.get_double("cell_side", n.cell_side);
    n.border_snr_db = cfg.get_double("border_snr_db", n.border_snr_db);
    n.min_distance = cfg.get_double("min_distance", n.min_distance);
    n.rng_seed = cfg.get_uint64("rng_seed", n.rng_seed);

    std::string placement = cfg.get_string("antenna_placement", "co-located");
    if (placement == "co-located")
        n.antenna_placement = AntennaPlacement::CoLocated;
    else if (placement == "uniform-random")
        n.antenna_placement = AntennaPlacement::UniformRandom;
    else
        throw ConfigError("antenna_placement: expected co-located or uniform-random");

    std::string law = cfg.get_string("variance_law", "exponent");
    if (law == "exponent")
        n.variance_law = VarianceLaw::PathLossExponent;
    else if (law == "inverse-distance")
        n.variance_law = VarianceLaw::InverseDistance;
    else
        throw ConfigError("variance_law: expected exponent or inverse-distance");

    std::string border = cfg.get_string("border_reference", "midpoint");
    if (border == "midpoint")
        n.border_reference = BorderReference::EdgeMidpoint;
    else if (border == "corner")
        n.border_reference = BorderReference::Corner;
    else
        throw ConfigError("border_reference: expected midpoint or corner");

    return n;
}

inline ExperimentSpec experiment_spec_from(const ConfigMap& cfg)
{
    ExperimentSpec spec;
    spec.network = network_config_from(cfg);
    for (const auto& token : cfg.get_list("methods"))
        spec.methods.push_back(MethodSpec::parse(token));
    spec.snr_points_db = cfg.get_double_list("snr_points_db");
    spec.trials = static_cast<int>(cfg.get_int("trials", spec.trials));
    spec.base_seed = cfg.get_uint64("base_seed", spec.base_seed);
    spec.output_path = cfg.get_string("output_path", spec.output_path);
    return spec;
}

} // namespace cransim
