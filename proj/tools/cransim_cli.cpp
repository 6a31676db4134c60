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

#include <cransim/cransim.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

int run_command(const std::string& config_path, const std::string& output_override,
                int trials_override, long long seed_override,
                const std::string& methods_override)
{
    auto cfg = cransim::ConfigMap::parse_file(config_path);
    auto spec = cransim::experiment_spec_from(cfg);

    if (!output_override.empty())
        spec.output_path = output_override;
    if (trials_override > 0)
        spec.trials = trials_override;
    if (seed_override >= 0)
        spec.base_seed = static_cast<std::uint64_t>(seed_override);
    if (!methods_override.empty()) {
        spec.methods.clear();
        for (const auto& token : cransim::detail::split(methods_override, ','))
            spec.methods.push_back(cransim::MethodSpec::parse(token));
    }

    auto records = cransim::run_experiment(spec);

    std::ofstream out(spec.output_path);
    if (!out)
        throw cransim::UsageError("cannot open output file: " + spec.output_path);
    cransim::write_records_csv(out, records);

    std::string summary_path = spec.output_path + ".summary.csv";
    std::ofstream summary_out(summary_path);
    if (!summary_out)
        throw cransim::UsageError("cannot open output file: " + summary_path);
    auto summary = cransim::summarize(records);
    cransim::write_summary_csv(summary_out, summary);

    int failures = 0;
    for (const auto& r : records)
        if (r.failed()) {
            ++failures;
            std::cerr << "warning: " << r.method_id
                      << (r.params.empty() ? "" : ":" + r.params) << " snr=" << r.snr_db
                      << " trial=" << r.trial << " failed: " << r.failure << "\n";
        }

    std::cout << records.size() << " records -> " << spec.output_path << "\n"
              << summary.size() << " summary rows -> " << summary_path << "\n";
    if (failures > 0)
        std::cout << failures << " record(s) carry a failure tag\n";
    return 0;
}

int summarize_command(const std::string& input_path, const std::string& output_path)
{
    std::ifstream in(input_path);
    if (!in)
        throw cransim::UsageError("cannot open records file: " + input_path);
    auto records = cransim::read_records_csv(in);
    auto summary = cransim::summarize(records);

    if (output_path.empty()) {
        cransim::write_summary_csv(std::cout, summary);
    } else {
        std::ofstream out(output_path);
        if (!out)
            throw cransim::UsageError("cannot open output file: " + output_path);
        cransim::write_summary_csv(out, summary);
        std::cout << summary.size() << " summary rows -> " << output_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"C-RAN uplink detection simulator: RGMP over sparsified channels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    int trials_override = 0;
    long long seed_override = -1;
    std::string methods_override;

    auto* run = app.add_subcommand("run", "run an experiment described by a config file");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--output", output_override, "records CSV path (overrides output_path)");
    run->add_option("--trials", trials_override, "override the trial count");
    run->add_option("--seed", seed_override, "override the base seed");
    run->add_option("--methods", methods_override,
                    "comma-separated method list override, e.g. pure,crps:0.001,drps:4:matched");

    std::string input_path;
    std::string summary_output;
    auto* summarize = app.add_subcommand("summarize", "aggregate a records CSV");
    summarize->add_option("--input", input_path, "records CSV produced by run")->required();
    summarize->add_option("--output", summary_output, "summary CSV path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_command(config_path, output_override, trials_override, seed_override,
                               methods_override);
        return summarize_command(input_path, summary_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
