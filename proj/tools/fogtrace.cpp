// Copyright 2026 The Fogtrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fogtrace command line: simulate / compare / serve / inspect.
//
// Exit codes: 0 success, 1 usage error, 2 data or config error,
// 3 runtime error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fogtrace/fogtrace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct SimulateOptions {
  std::string config_path;
  int case_id = 0;  // 0 = no preset
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> days;
  std::optional<std::uint32_t> meetups;
  std::optional<double> theta;
  std::optional<double> tau0_min;
  std::optional<double> nu0_dbm;
  std::optional<std::uint32_t> population;
  std::optional<std::uint32_t> initial_infected;
  std::optional<double> symptom_rate;
  std::optional<double> compliance;
  std::string out = "fogtrace_series.csv";
};

std::string manifest_path_for(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string() + ".manifest.json";
}

// Resolves the layered configuration (file, then preset, then flags) into
// plain JSON so every run goes through the one canonical loader. Sampling
// ranges follow tau0 unless the config file pinned them.
nlohmann::json resolve_base_json(const SimulateOptions& opt) {
  nlohmann::json base = nlohmann::json::object();
  if (!opt.config_path.empty())
    base = fogtrace::detail::load_json_file(opt.config_path);

  if (opt.case_id != 0) {
    const fogtrace::CasePreset& preset = fogtrace::case_preset(opt.case_id);
    base["population"] = 10000;
    base["days"] = 15;
    base["theta"] = preset.theta;
    base.erase("tau0_min");
    base["tau0_s"] = preset.tau0_min * 60.0;
    base["nu0_dbm"] = preset.nu0_dbm;
    base["initial_infected"] = preset.initial_infected;
    base.erase("contact_time_range_s");  // presets derive ranges from tau0
    base.erase("signal_range_dbm");
  }

  if (opt.theta) base["theta"] = *opt.theta;
  if (opt.tau0_min) {
    base.erase("tau0_min");
    base["tau0_s"] = *opt.tau0_min * 60.0;
    base.erase("contact_time_range_s");  // follow the overridden threshold
  }
  if (opt.nu0_dbm) base["nu0_dbm"] = *opt.nu0_dbm;
  if (opt.seed) base["rng_seed"] = *opt.seed;
  if (opt.days) base["days"] = *opt.days;
  if (opt.population) base["population"] = *opt.population;
  if (opt.initial_infected) base["initial_infected"] = *opt.initial_infected;
  if (opt.symptom_rate) base["daily_symptom_rate"] = *opt.symptom_rate;
  if (opt.compliance) base["alert_compliance"] = *opt.compliance;
  if (opt.meetups) base["meetups_per_day"] = *opt.meetups;
  return base;
}

int cmd_simulate(const SimulateOptions& opt) {
  const nlohmann::json base = resolve_base_json(opt);

  struct Variant {
    std::string name;
    fogtrace::SimulationConfig config;
  };
  std::vector<Variant> variants;
  if (opt.case_id != 0 && !opt.meetups) {
    for (std::uint32_t rate : fogtrace::case_preset(opt.case_id).meetups_per_day) {
      nlohmann::json j = base;
      j["meetups_per_day"] = rate;
      variants.push_back({"meetups_" + std::to_string(rate),
                          fogtrace::simulation_config_from_json(j)});
    }
  } else {
    const auto config = fogtrace::simulation_config_from_json(base);
    variants.push_back(
        {"meetups_" + std::to_string(config.meetups_per_day), config});
  }

  const bool with_alerts =
      variants.front().config.alert_compliance > 0.0;

  // Independent runs fan out across workers.
  struct RunOutput {
    fogtrace::DailySeries baseline;
    fogtrace::DailySeries alerted;  // empty unless with_alerts
  };
  std::vector<std::future<RunOutput>> futures;
  futures.reserve(variants.size());
  for (const Variant& variant : variants) {
    futures.push_back(std::async(std::launch::async, [&variant, with_alerts] {
      RunOutput out;
      if (with_alerts) {
        auto [baseline, alerted] = fogtrace::run_with_alerts(variant.config);
        out.baseline = std::move(baseline);
        out.alerted = std::move(alerted);
      } else {
        out.baseline = fogtrace::run(variant.config);
      }
      return out;
    }));
  }
  std::vector<RunOutput> outputs;
  outputs.reserve(futures.size());
  for (auto& f : futures) outputs.push_back(f.get());

  if (variants.size() == 1 && !with_alerts) {
    fogtrace::write_daily_series_csv(outputs[0].baseline, opt.out);
  } else {
    std::vector<fogtrace::NamedSeries> curves;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      if (with_alerts) {
        curves.push_back({variants[i].name + "_baseline",
                          outputs[i].baseline.new_infections()});
        curves.push_back({variants[i].name + "_alerted",
                          outputs[i].alerted.new_infections()});
      } else {
        curves.push_back({variants[i].name, outputs[i].baseline.new_infections()});
      }
    }
    fogtrace::export_curves(curves, opt.out);
  }

  nlohmann::json manifest{
      {"command", "simulate"},
      {"output_csv", opt.out},
      {"with_alerts", with_alerts},
      {"runs", nlohmann::json::array()},
  };
  if (opt.case_id != 0) manifest["case"] = opt.case_id;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    manifest["runs"].push_back(
        {{"name", variants[i].name},
         {"total_new_infections", outputs[i].baseline.total()},
         {"config", fogtrace::simulation_config_to_json(variants[i].config)}});
  }
  const std::string manifest_path = manifest_path_for(opt.out);
  std::ofstream manifest_out(manifest_path, std::ios::binary);
  if (!manifest_out) throw std::runtime_error("cannot write manifest: " + manifest_path);
  manifest_out << manifest.dump(2) << '\n';

  std::cerr << "wrote " << opt.out << " and " << manifest_path << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& sim_path, const std::string& real_path,
                const std::string& out_path) {
  const fogtrace::DailySeries sim = fogtrace::read_daily_series_csv(sim_path);
  const fogtrace::CaseSeries real = fogtrace::load_case_series(real_path);
  const fogtrace::ComparisonMetrics metrics = fogtrace::compare_series(sim, real);
  if (metrics.truncated)
    std::cerr << "warning: length mismatch (" << sim.days() << " vs " << real.days()
              << " days); comparing the first " << metrics.aligned_days << "\n";

  const std::vector<fogtrace::NamedSeries> curves = {
      {"simulated", {sim.new_infections().begin(),
                     sim.new_infections().begin() +
                         static_cast<std::ptrdiff_t>(metrics.aligned_days)}},
      {real.label, {real.new_cases.begin(),
                    real.new_cases.begin() +
                        static_cast<std::ptrdiff_t>(metrics.aligned_days)}},
  };
  fogtrace::export_curves(curves, out_path);

  const nlohmann::json out{
      {"mean_absolute_error", metrics.mean_absolute_error},
      {"root_mean_square_error", metrics.root_mean_square_error},
      {"total_count_delta", metrics.total_count_delta},
      {"per_day_delta", metrics.per_day_delta},
      {"aligned_days", metrics.aligned_days},
      {"truncated", metrics.truncated},
      {"curves_csv", out_path},
  };
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

std::atomic<fogtrace::HttpService*> g_running_service{nullptr};

void handle_shutdown_signal(int) {
  if (auto* service = g_running_service.load()) service->stop();
}

int cmd_serve(const std::string& config_path, std::optional<int> port_override,
              std::optional<std::string> snapshot_override) {
  fogtrace::ServiceConfig config;
  if (!config_path.empty()) config = fogtrace::load_service_config(config_path);
  fogtrace::apply_env_overrides(config);
  if (port_override) config.port = *port_override;
  if (snapshot_override) config.snapshot_path = *snapshot_override;

  fogtrace::GuidanceTable guidance = fogtrace::GuidanceTable::load(config.guidance_path);
  fogtrace::FogStore store(config.thresholds, config.bands, std::move(guidance));
  if (std::filesystem::exists(config.snapshot_path)) {
    store.restore_snapshot(config.snapshot_path);
    std::cerr << "restored snapshot from " << config.snapshot_path << '\n';
  }

  fogtrace::HttpService service(store, config);
  service.bind_configured_port();
  g_running_service = &service;
  std::signal(SIGINT, handle_shutdown_signal);
  std::signal(SIGTERM, handle_shutdown_signal);

  std::cerr << "fogtrace service listening on port " << config.port << '\n';
  service.run();  // returns after stop()

  g_running_service = nullptr;
  store.save_snapshot(config.snapshot_path);
  std::cerr << "snapshot written to " << config.snapshot_path << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& snapshot_path, const std::string& user_id) {
  // Construction needs a placeholder config; the snapshot replaces all of it.
  fogtrace::FogStore store(
      fogtrace::Thresholds{fogtrace::Probability(0.9), 120.0, -0.55},
      fogtrace::RiskBands::defaults(),
      fogtrace::GuidanceTable::from_map({
          {fogtrace::RiskLevel::kLow, "-"},
          {fogtrace::RiskLevel::kModerate, "-"},
          {fogtrace::RiskLevel::kHigh, "-"},
          {fogtrace::RiskLevel::kVeryHigh, "-"},
      }));
  store.restore_snapshot(snapshot_path);
  std::cout << fogtrace::report_to_json(store.report_for(user_id)).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fog-based contact-tracing infection probability toolkit"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  CLI::App* simulate = app.add_subcommand("simulate", "run the epidemic simulator");
  simulate->add_option("--config", sim_opt.config_path, "simulation config JSON");
  simulate->add_option("--case", sim_opt.case_id, "bundled experiment preset (1-8)")
      ->check(CLI::Range(1, 8));
  simulate->add_option("--seed", sim_opt.seed, "RNG seed");
  simulate->add_option("--days", sim_opt.days, "days to simulate");
  simulate->add_option("--meetups", sim_opt.meetups, "meetups per day");
  simulate->add_option("--theta", sim_opt.theta, "infection probability threshold");
  simulate->add_option("--tau0-min", sim_opt.tau0_min, "contact-time threshold, minutes");
  simulate->add_option("--nu0-dbm", sim_opt.nu0_dbm, "signal-strength threshold, dBm");
  simulate->add_option("--population", sim_opt.population, "population size");
  simulate->add_option("--initial-infected", sim_opt.initial_infected,
                       "seeded infected users");
  simulate->add_option("--symptom-rate", sim_opt.symptom_rate,
                       "per-user daily symptom probability");
  simulate->add_option("--compliance", sim_opt.compliance,
                       "alert compliance; > 0 adds an alerted replay");
  simulate->add_option("--out", sim_opt.out, "output CSV path");

  std::string cmp_sim, cmp_real, cmp_out = "comparison.csv";
  CLI::App* compare = app.add_subcommand("compare", "compare a run against real case data");
  compare->add_option("sim_csv", cmp_sim, "simulated series CSV")->required();
  compare->add_option("real_csv", cmp_real, "real case series CSV")->required();
  compare->add_option("--out", cmp_out, "merged curves CSV path");

  std::string serve_config;
  std::optional<int> serve_port;
  std::optional<std::string> serve_snapshot;
  CLI::App* serve = app.add_subcommand("serve", "run the fog ingestion/reporting service");
  serve->add_option("--config", serve_config, "service config JSON");
  serve->add_option("--port", serve_port, "listen port override");
  serve->add_option("--snapshot", serve_snapshot, "snapshot path override");

  std::string inspect_snapshot, inspect_user;
  CLI::App* inspect = app.add_subcommand("inspect", "print a user's report from a snapshot");
  inspect->add_option("snapshot", inspect_snapshot, "snapshot file")->required();
  inspect->add_option("user_id", inspect_user, "user id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_opt);
    if (compare->parsed()) return cmd_compare(cmp_sim, cmp_real, cmp_out);
    if (serve->parsed()) return cmd_serve(serve_config, serve_port, serve_snapshot);
    if (inspect->parsed()) return cmd_inspect(inspect_snapshot, inspect_user);
  } catch (const fogtrace::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitData;
  } catch (const fogtrace::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitData;
  } catch (const fogtrace::NotFoundError& e) {
    std::cerr << "not found: " << e.what() << '\n';
    return kExitData;
  } catch (const fogtrace::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return kExitData;
  } catch (const fogtrace::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
