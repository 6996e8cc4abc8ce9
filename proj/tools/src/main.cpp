#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evsched/bench.hpp"
#include "evsched/csv.hpp"
#include "evsched/ebo.hpp"
#include "evsched/milp.hpp"
#include "evsched/modelgen.hpp"
#include "evsched/mpc.hpp"
#include "evsched/params.hpp"
#include "evsched/station.hpp"
#include "evsched/stochastic.hpp"
#include "evsched/toy_mdp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace evsched;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------------------
// shared options

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string profile_csv;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::int64_t node_limit = 0;
    double time_limit_ms = 0.0;
    double rel_gap = 0.0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* node_opt = nullptr;
    CLI::Option* time_opt = nullptr;
    CLI::Option* gap_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o, const std::string& default_out) {
    cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--preset,--profile", o.preset, "parameter preset: paper or desk");
    cmd->add_option("--profile-csv", o.profile_csv,
                    "renewable profile CSV (hour,wind_speed_mps,irradiance_wm2)")
        ->check(CLI::ExistingFile);
    o.seed_opt = cmd->add_option("--seed", o.seed, "master seed");
    if (!default_out.empty()) {
        o.out_dir = default_out;
        cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    }
    o.node_opt = cmd->add_option("--node-limit", o.node_limit, "branch and bound node cap");
    o.time_opt = cmd->add_option("--time-limit-ms", o.time_limit_ms, "per-model time limit");
    o.gap_opt = cmd->add_option("--rel-gap", o.rel_gap, "relative optimality gap");
}

Config load_config(const CommonOpts& o) {
    Config cfg;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        if (o.preset.empty()) {
            cfg = Config::from_json(ss.str());
        } else {
            // the command line wins over the file's preset key
            json j = json::parse(ss.str());
            j["preset"] = o.preset;
            cfg = Config::from_json(j.dump());
        }
    } else if (!o.preset.empty()) {
        cfg = Config::preset(o.preset);
    }
    if (o.seed_opt && o.seed_opt->count()) cfg.seed = o.seed;
    if (!o.profile_csv.empty()) cfg.profile = RenewableProfile::load_csv(o.profile_csv);
    if (o.node_opt && o.node_opt->count()) cfg.solver.node_limit = o.node_limit;
    if (o.time_opt && o.time_opt->count()) cfg.solver.time_limit_ms = o.time_limit_ms;
    if (o.gap_opt && o.gap_opt->count()) cfg.solver.rel_gap = o.rel_gap;
    cfg.validate();
    return cfg;
}

std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void write_manifest(const std::string& dir, const std::string& command, const Config& cfg,
                    const std::vector<std::string>& outputs, json run = json::object()) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = cfg.seed;
    j["config_hash"] = hash_hex(cfg.hash());
    j["outputs"] = outputs;
    if (!run.empty()) j["run"] = std::move(run);
    j["config"] = json::parse(cfg.to_json());
    std::ofstream out(dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// csv writers

void save_values_csv(const ebo::ValueTable& vals, const std::string& path) {
    csv::Table t;
    t.header = {"stage"};
    for (int e = 0; e < env::kEventCount; ++e)
        t.header.push_back(env::to_string(static_cast<env::EventClass>(e)));
    for (std::size_t s = 0; s < vals.value.size(); ++s) {
        std::vector<std::string> row{std::to_string(s)};
        for (int e = 0; e < env::kEventCount; ++e) row.push_back(fmt(vals.value[s][e]));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

void save_episodes_csv(const std::vector<ebo::EpisodeStats>& eps, const std::string& path) {
    csv::Table t;
    t.header = {"episode",  "epsilon",
                "updates",  "explorations",
                "reward",   "reward_sans_variance",
                "earning",  "value_table_total",
                "entered",  "lost"};
    for (const auto& s : eps)
        t.rows.push_back({std::to_string(s.episode), fmt(s.epsilon), std::to_string(s.updates),
                          std::to_string(s.explorations), fmt(s.reward_total),
                          fmt(s.reward_sans_variance), fmt(s.earning), fmt(s.value_table_total),
                          std::to_string(s.entered), std::to_string(s.lost)});
    csv::write_file(path, t);
}

// update events only: the nondecreasing best-value trace per (stage, event)
void save_convergence_csv(const std::vector<ebo::StageLogRow>& log, const std::string& path) {
    csv::Table t;
    t.header = {"episode", "stage", "event", "value", "price"};
    for (const auto& r : log)
        if (r.updated)
            t.rows.push_back({std::to_string(r.episode), std::to_string(r.stage),
                              env::to_string(r.event), fmt(r.greedy_value), fmt(r.greedy_price)});
    csv::write_file(path, t);
}

void save_stages_csv(const std::vector<ebo::StageLogRow>& log, const std::string& path) {
    csv::Table t;
    t.header = {"episode",      "stage",        "event",        "epsilon",
                "avg_price",    "greedy_price", "greedy_value", "posted_price",
                "updated",      "explored",     "earning",      "procure_cost",
                "storage_cost", "wind_cost",    "solar_cost",   "qos_cost",
                "variance_penalty", "reward",   "soc",          "occupied",
                "entered",      "lost"};
    for (const auto& r : log) {
        const auto& rw = r.reward;
        t.rows.push_back({std::to_string(r.episode), std::to_string(r.stage),
                          env::to_string(r.event), fmt(r.epsilon), fmt(r.avg_price),
                          fmt(r.greedy_price), fmt(r.greedy_value), fmt(r.posted_price),
                          std::to_string(r.updated ? 1 : 0), std::to_string(r.explored ? 1 : 0),
                          fmt(rw.earning), fmt(rw.procure_cost), fmt(rw.storage_cost),
                          fmt(rw.wind_cost), fmt(rw.solar_cost), fmt(rw.qos_cost),
                          fmt(rw.variance_penalty), fmt(rw.total()), fmt(r.soc),
                          std::to_string(r.occupied), std::to_string(r.entered),
                          std::to_string(r.lost)});
    }
    csv::write_file(path, t);
}

void save_trace_csv(const std::vector<bench::StageTraceRow>& rows, const std::string& path) {
    csv::Table t;
    t.header = {"day",        "stage",       "event",        "price",
                "storage_kw", "soc",         "wind_kw",      "solar_kw",
                "grid_kw",    "occupied",    "entered",      "departed",
                "lost",       "raw_arrivals", "charging",
                "wind_available_kw", "solar_available_kw",
                "earning",    "procure_cost", "storage_cost", "wind_cost",
                "solar_cost", "qos_cost",     "reward"};
    for (const auto& r : rows) {
        const auto& rw = r.reward;
        t.rows.push_back({std::to_string(r.day), std::to_string(r.stage), env::to_string(r.event),
                          fmt(r.posted_price), fmt(r.storage_power_kw), fmt(r.soc_after),
                          fmt(r.wind_used_kw), fmt(r.solar_used_kw), fmt(r.grid_import_kw),
                          std::to_string(r.occupied_after), std::to_string(r.entered),
                          std::to_string(r.departed), std::to_string(r.lost),
                          std::to_string(r.raw_arrivals), std::to_string(r.charging),
                          fmt(r.wind_available_kw), fmt(r.solar_available_kw), fmt(rw.earning),
                          fmt(rw.procure_cost), fmt(rw.storage_cost), fmt(rw.wind_cost),
                          fmt(rw.solar_cost), fmt(rw.qos_cost), fmt(rw.reward_sans_variance())});
    }
    csv::write_file(path, t);
}

void save_days_csv(const std::vector<bench::DayResult>& days, const std::string& path) {
    csv::Table t;
    t.header = {"day",          "obj",        "obj_with_variance", "profit",
                "earning",      "procure_cost", "storage_cost",    "wind_cost",
                "solar_cost",   "qos_cost",   "arrivals",          "entered",
                "lost",         "price_std",  "price_gap"};
    for (std::size_t d = 0; d < days.size(); ++d) {
        const auto& r = days[d];
        t.rows.push_back({std::to_string(d), fmt(r.obj_profit_minus_qos()),
                          fmt(r.obj_with_variance()), fmt(r.profit()), fmt(r.earning),
                          fmt(r.procure_cost), fmt(r.storage_cost), fmt(r.wind_cost),
                          fmt(r.solar_cost), fmt(r.qos_cost), std::to_string(r.arrivals),
                          std::to_string(r.entered), std::to_string(r.lost), fmt(r.price_std()),
                          fmt(r.price_gap())});
    }
    csv::write_file(path, t);
}

using MetricMember = bench::MetricSummary bench::RunMetrics::*;

const std::vector<std::pair<std::string, MetricMember>> kMetricCols = {
    {"obj_profit_minus_qos", &bench::RunMetrics::obj_profit_minus_qos},
    {"obj_with_variance", &bench::RunMetrics::obj_with_variance},
    {"profit", &bench::RunMetrics::profit},
    {"earning", &bench::RunMetrics::earning},
    {"procure_cost", &bench::RunMetrics::procure_cost},
    {"storage_cost", &bench::RunMetrics::storage_cost},
    {"wind_cost", &bench::RunMetrics::wind_cost},
    {"solar_cost", &bench::RunMetrics::solar_cost},
    {"qos_cost", &bench::RunMetrics::qos_cost},
    {"service_ratio", &bench::RunMetrics::service_ratio},
    {"arrival_num", &bench::RunMetrics::arrival_num},
    {"enter_num", &bench::RunMetrics::enter_num},
    {"price_std", &bench::RunMetrics::price_std},
    {"price_gap", &bench::RunMetrics::price_gap},
    {"avg_cost_per_ev", &bench::RunMetrics::avg_cost_per_ev},
};

void save_metrics_csv(const std::vector<bench::RunMetrics>& rows, const std::string& path) {
    csv::Table t;
    t.header = {"policy", "days"};
    for (const auto& [name, _] : kMetricCols) {
        t.header.push_back(name + "_mean");
        t.header.push_back(name + "_ci95");
    }
    for (const auto& r : rows) {
        std::vector<std::string> row{r.policy, std::to_string(r.days)};
        for (const auto& [_, member] : kMetricCols) {
            row.push_back(fmt((r.*member).mean));
            row.push_back(fmt((r.*member).ci95));
        }
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

void save_sweep_csv(const std::string& dimension, const std::vector<bench::SweepPoint>& points,
                    const std::string& path) {
    csv::Table t;
    t.header = {"dimension", "value", "episodes", "converged"};
    for (const auto& [name, _] : kMetricCols) {
        t.header.push_back(name + "_mean");
        t.header.push_back(name + "_ci95");
    }
    for (const auto& p : points) {
        std::vector<std::string> row{dimension, fmt(p.value), std::to_string(p.episodes),
                                     std::to_string(p.converged ? 1 : 0)};
        for (const auto& [_, member] : kMetricCols) {
            row.push_back(fmt((p.metrics.*member).mean));
            row.push_back(fmt((p.metrics.*member).ci95));
        }
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

void print_metrics(const std::vector<bench::RunMetrics>& rows) {
    std::cout << std::left << std::setw(8) << "policy" << std::right << std::setw(10) << "obj"
              << std::setw(10) << "profit" << std::setw(10) << "earning" << std::setw(10)
              << "procure" << std::setw(9) << "qos" << std::setw(9) << "svc" << std::setw(10)
              << "price_sd" << std::setw(9) << "avg_cost" << "\n";
    std::cout << std::string(85, '-') << "\n";
    std::cout << std::fixed << std::setprecision(2);
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(8) << r.policy << std::right << std::setw(10)
                  << r.obj_profit_minus_qos.mean << std::setw(10) << r.profit.mean
                  << std::setw(10) << r.earning.mean << std::setw(10) << r.procure_cost.mean
                  << std::setw(9) << r.qos_cost.mean << std::setw(9) << r.service_ratio.mean
                  << std::setw(10) << r.price_std.mean << std::setw(9) << r.avg_cost_per_ev.mean
                  << "\n";
    }
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
}

// ---------------------------------------------------------------------------
// policy roster helpers

std::string canon_policy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "pistar" || s == "pi_star" || s == "star" || s == "optimal") return "pi*";
    return s;
}

bench::PolicySpec find_policy(const std::string& name) {
    std::string want = canon_policy(name);
    for (const auto& spec : bench::standard_policies())
        if (spec.name == want) return spec;
    throw std::invalid_argument("unknown policy '" + name + "', see --list");
}

void list_policies() {
    auto pricing = [](const bench::PolicySpec& s) -> std::string {
        switch (s.pricing) {
            case bench::PricingMode::Learned: return "learned table";
            case bench::PricingMode::Constant: return "constant " + fmt(s.constant_price);
            case bench::PricingMode::EventTable: return "occupancy-tier table";
        }
        return {};
    };
    auto charging = [](const bench::PolicySpec& s) {
        switch (s.charging) {
            case bench::ChargingMode::Mpc: return "scenario program";
            case bench::ChargingMode::Greedy: return "greedy";
            case bench::ChargingMode::Delayed: return "delayed";
        }
        return "";
    };
    for (const auto& spec : bench::standard_policies())
        std::cout << std::left << std::setw(8) << spec.name << std::setw(24) << pricing(spec)
                  << charging(spec) << "\n";
}

stoch::PriceFn spec_price_fn(const bench::PolicySpec& spec, const ebo::PolicyTable* learned) {
    switch (spec.pricing) {
        case bench::PricingMode::Learned:
            if (!learned) throw std::invalid_argument("policy needs a learned table");
            return ebo::price_fn(*learned);
        case bench::PricingMode::Constant: {
            double c = spec.constant_price;
            return [c](int, env::EventClass) { return c; };
        }
        case bench::PricingMode::EventTable:
            return [](int, env::EventClass e) { return bench::event_price_baseline(e); };
    }
    throw std::logic_error("unhandled pricing mode");
}

ebo::TrainResult train_with_progress(const Config& cfg, bool quiet,
                                     std::vector<ebo::StageLogRow>* stage_log) {
    ebo::TrainOptions opts;
    opts.stage_log = stage_log;
    if (!quiet) {
        opts.on_episode = [](const ebo::EpisodeStats& s) {
            if (s.episode % 10 != 0) return;
            std::cout << "  ep " << std::setw(4) << s.episode << "  eps " << std::fixed
                      << std::setprecision(3) << s.epsilon << "  updates " << std::setw(3)
                      << s.updates << "  reward " << std::setprecision(2) << std::setw(9)
                      << s.reward_total << "  value-sum " << std::setw(10) << s.value_table_total
                      << "\n";
            std::cout.unsetf(std::ios::fixed);
            std::cout << std::setprecision(6);
        };
    }
    return ebo::train(cfg, opts);
}

// ---------------------------------------------------------------------------
// learn

struct LearnArgs {
    CommonOpts common;
    int episodes = 0;
    bool no_plateau = false;
    bool stage_log = false;
    bool quiet = false;
};

int run_learn(const LearnArgs& a) {
    Config cfg = load_config(a.common);
    if (a.episodes > 0) cfg.pricing.max_episodes = a.episodes;
    if (a.no_plateau) cfg.pricing.stop_on_plateau = false;
    cfg.validate();
    const std::string& dir = a.common.out_dir;
    fs::create_directories(dir);

    std::vector<ebo::StageLogRow> stage_log;
    ebo::TrainResult res = train_with_progress(cfg, a.quiet, &stage_log);

    ebo::save_policy_csv(res.policy, dir + "/policy.csv");
    save_values_csv(res.values, dir + "/values.csv");
    save_episodes_csv(res.episodes, dir + "/episodes.csv");
    save_convergence_csv(stage_log, dir + "/convergence.csv");
    std::vector<std::string> outputs = {"policy.csv", "values.csv", "episodes.csv",
                                        "convergence.csv"};
    if (a.stage_log) {
        save_stages_csv(stage_log, dir + "/stages.csv");
        outputs.push_back("stages.csv");
    }
    json run;
    run["episodes"] = res.episodes.size();
    run["stop_reason"] = res.stop_reason;
    run["converged"] = res.converged;
    outputs.push_back("manifest.json");
    write_manifest(dir, "learn", cfg, outputs, run);

    std::cout << "learned " << res.episodes.size() << " episodes (" << res.stop_reason
              << "), value-table total " << fmt(res.values.total()) << "\n"
              << "policy written to " << dir << "/policy.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    CommonOpts common;
    std::string policy = "pi*";
    std::string policy_file;
    int days = 1;
    bool train = false;
    bool dump_lp = false;
    bool list = false;
    bool quiet = false;
};

void dump_stage_models(const Config& cfg, const bench::PolicySpec& spec,
                       const ebo::PolicyTable* learned, const std::string& dir,
                       std::vector<std::string>& outputs) {
    // illustrative export: the scenario program of the first stage of a fresh
    // day, in both emissions
    stoch::Rng day_rng(
        stoch::substream(cfg.seed, static_cast<std::uint64_t>(stoch::StreamTag::Diagnostics), 9000));
    env::StationState state = ebo::episode_start(cfg, day_rng);
    stoch::PriceFn price = spec_price_fn(spec, learned);
    double posted = price(state.stage, env::classify_event(state.occupied_count(),
                                                           cfg.station.pile_count));
    auto set = stoch::generate_sample_paths(
        state, posted, price, cfg.sampling.mpc_scenarios, false, cfg,
        stoch::substream(cfg.seed, static_cast<std::uint64_t>(stoch::StreamTag::Diagnostics), 9001));
    for (auto mode : {mpc::EmitMode::Compact, mpc::EmitMode::Literal}) {
        mpc::CompileOptions co;
        co.mode = mode;
        co.stage_mode = mpc::StageMode::Implement;
        mpc::StageModel sm = mpc::compile_stage(set, cfg, co);
        std::string name =
            mode == mpc::EmitMode::Compact ? "stage0_compact.lp" : "stage0_literal.lp";
        std::ofstream os(dir + "/" + name);
        milp::write_lp(os, sm.model);
        outputs.push_back(name);
    }
}

int run_simulate(const SimulateArgs& a) {
    if (a.list) {
        list_policies();
        return 0;
    }
    Config cfg = load_config(a.common);
    const std::string& dir = a.common.out_dir;
    fs::create_directories(dir);
    bench::PolicySpec spec = find_policy(a.policy);

    ebo::PolicyTable table;
    bool have_table = false;
    std::vector<std::string> outputs;
    json run;
    if (!a.policy_file.empty()) {
        table = ebo::load_policy_csv(a.policy_file);
        have_table = true;
    } else if (spec.pricing == bench::PricingMode::Learned) {
        if (!a.train)
            throw std::invalid_argument("policy " + spec.name +
                                        " needs --policy-file or --train");
        if (!a.quiet) std::cout << "training pricing table first\n";
        ebo::TrainResult res = train_with_progress(cfg, a.quiet, nullptr);
        table = res.policy;
        have_table = true;
        ebo::save_policy_csv(table, dir + "/policy.csv");
        outputs.push_back("policy.csv");
        run["trained_episodes"] = res.episodes.size();
        run["stop_reason"] = res.stop_reason;
    }

    std::vector<bench::StageTraceRow> trace;
    std::vector<bench::DayResult> days;
    for (int d = 0; d < a.days; ++d)
        days.push_back(bench::simulate_day(spec, have_table ? &table : nullptr, cfg, d, &trace));

    save_trace_csv(trace, dir + "/trace.csv");
    save_days_csv(days, dir + "/days.csv");
    outputs.push_back("trace.csv");
    outputs.push_back("days.csv");
    if (a.dump_lp) dump_stage_models(cfg, spec, have_table ? &table : nullptr, dir, outputs);

    bench::RunMetrics m = bench::aggregate_days(spec.name, days);
    run["policy"] = spec.name;
    run["days"] = a.days;
    outputs.push_back("manifest.json");
    write_manifest(dir, "simulate", cfg, outputs, run);

    print_metrics({m});
    std::cout << "trace written to " << dir << "/trace.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
    CommonOpts common;
    std::vector<std::string> policies;
    std::string policy_file;
    int days = 20;
    bool list = false;
    bool quiet = false;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
    if (a.list) {
        list_policies();
        return 0;
    }
    Config cfg = load_config(a.common);
    const std::string& dir = a.common.out_dir;
    fs::create_directories(dir);

    std::vector<bench::PolicySpec> specs;
    if (a.policies.empty()) {
        specs = bench::standard_policies();
    } else {
        for (const auto& name : a.policies) specs.push_back(find_policy(name));
    }
    bool needs_learned = std::any_of(specs.begin(), specs.end(), [](const auto& s) {
        return s.pricing == bench::PricingMode::Learned;
    });

    ebo::PolicyTable table;
    bool have_table = false;
    std::vector<std::string> outputs;
    json run;
    if (!a.policy_file.empty()) {
        table = ebo::load_policy_csv(a.policy_file);
        have_table = true;
    } else if (needs_learned) {
        if (!a.quiet) std::cout << "training pricing table first\n";
        ebo::TrainResult res = train_with_progress(cfg, a.quiet, nullptr);
        table = res.policy;
        have_table = true;
        ebo::save_policy_csv(table, dir + "/policy.csv");
        outputs.push_back("policy.csv");
        run["trained_episodes"] = res.episodes.size();
        run["stop_reason"] = res.stop_reason;
    }

    std::vector<bench::RunMetrics> rows =
        bench::run_benchmark(specs, have_table ? &table : nullptr, cfg, a.days);
    save_metrics_csv(rows, dir + "/metrics.csv");
    outputs.push_back("metrics.csv");

    run["days"] = a.days;
    json names = json::array();
    for (const auto& s : specs) names.push_back(s.name);
    run["policies"] = names;
    outputs.push_back("manifest.json");
    write_manifest(dir, "benchmark", cfg, outputs, run);

    print_metrics(rows);
    std::cout << "metrics written to " << dir << "/metrics.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
    CommonOpts common;
    std::string dimension;
    std::vector<double> values;
    int days = 10;
    bool quiet = false;
};

int run_sweep(const SweepArgs& a) {
    Config cfg = load_config(a.common);
    const std::string& dir = a.common.out_dir;
    fs::create_directories(dir);

    std::vector<bench::SweepPoint> points;
    if (a.dimension == "beta") {
        points = bench::beta_sweep(a.values, cfg, a.days);
    } else if (a.dimension == "capacity") {
        points = bench::sensitivity_sweep(bench::SweepDimension::Capacity, a.values, cfg, a.days);
    } else if (a.dimension == "arrival") {
        points =
            bench::sensitivity_sweep(bench::SweepDimension::ArrivalRate, a.values, cfg, a.days);
    } else {
        throw std::invalid_argument("unknown dimension '" + a.dimension +
                                    "' (beta, capacity, arrival)");
    }

    save_sweep_csv(a.dimension, points, dir + "/sweep.csv");
    json run;
    run["dimension"] = a.dimension;
    run["values"] = a.values;
    run["eval_days"] = a.days;
    write_manifest(dir, "sweep", cfg, {"sweep.csv", "manifest.json"}, run);

    std::cout << std::left << std::setw(10) << "value" << std::right << std::setw(10) << "obj"
              << std::setw(10) << "price_sd" << std::setw(10) << "gap" << std::setw(9) << "svc"
              << std::setw(10) << "episodes" << "\n";
    std::cout << std::fixed << std::setprecision(3);
    for (const auto& p : points)
        std::cout << std::left << std::setw(10) << p.value << std::right << std::setw(10)
                  << p.metrics.obj_profit_minus_qos.mean << std::setw(10)
                  << p.metrics.price_std.mean << std::setw(10) << p.metrics.price_gap.mean
                  << std::setw(9) << p.metrics.service_ratio.mean << std::setw(10) << p.episodes
                  << "\n";
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6) << "sweep written to " << dir << "/sweep.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// validate

bool check_lp_roundtrip(std::uint64_t seed, std::string& detail) {
    stoch::Rng rng(stoch::substream(seed, 71));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        milp::MilpModel m = milp::random_model(rng);
        milp::LpResult a = milp::lp_solve(m);
        milp::MilpModel m2 = milp::parse_lp_string(milp::to_lp_string(m));
        milp::LpResult b = milp::lp_solve(m2);
        if (a.status != b.status) {
            detail = "status mismatch on instance " + std::to_string(i);
            return false;
        }
        if (a.status == milp::LpStatus::Optimal)
            worst = std::max(worst,
                             std::fabs(a.objective - b.objective) / (1.0 + std::fabs(a.objective)));
    }
    detail = "20 models, worst relative drift " + fmt(worst);
    return worst <= 1e-9;
}

bool check_bnb_oracle(std::uint64_t seed, std::string& detail) {
    stoch::Rng rng(stoch::substream(seed, 72));
    milp::RandomModelOptions opts;
    opts.max_binaries = 8;
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        milp::MilpModel m = milp::random_model(rng, opts);
        milp::MipResult got = milp::branch_and_bound(m);
        milp::MipResult want = milp::enumerate_oracle(m);
        bool got_feasible = got.status == milp::MipStatus::Optimal ||
                            got.status == milp::MipStatus::FeasibleWithGap;
        bool want_feasible = want.status == milp::MipStatus::Optimal;
        if (got_feasible != want_feasible) {
            detail = "feasibility mismatch on instance " + std::to_string(i);
            return false;
        }
        if (got_feasible)
            worst = std::max(worst, std::fabs(got.objective - want.objective) /
                                        (1.0 + std::fabs(want.objective)));
    }
    detail = "40 models, worst relative gap to enumeration " + fmt(worst);
    return worst <= 1e-6;
}

toy::MixedPolicy random_toy_policy(const toy::ToyMdp& m, stoch::Rng& rng) {
    toy::MixedPolicy p;
    for (int e = 0; e < m.n_events; ++e) p.first.push_back(rng.uniform_int(0, m.n_actions - 1));
    for (int e = 0; e < m.n_events; ++e) p.future.push_back(rng.uniform_int(0, m.n_actions - 1));
    return p;
}

bool check_difference_identity(std::uint64_t seed, std::string& detail) {
    stoch::Rng rng(stoch::substream(seed, 73));
    double worst = 0.0;
    for (int i = 0; i < 30; ++i) {
        toy::ToyMdp mdp = toy::random_toy(rng);
        int event = rng.uniform_int(0, mdp.n_events - 1);
        toy::MixedPolicy sigma = random_toy_policy(mdp, rng);
        toy::MixedPolicy upsilon = random_toy_policy(mdp, rng);
        worst = std::max(worst, toy::difference_identity_gap(mdp, event, sigma, upsilon));
    }
    detail = "30 chains, worst identity residual " + fmt(worst);
    return worst <= 1e-8;
}

bool check_program_modes(std::uint64_t seed, std::string& detail) {
    Config cfg = Config::preset("desk");
    cfg.station.pile_count = 4;
    cfg.station.window_stages = 3;
    cfg.sampling.mpc_scenarios = 2;
    cfg.sampling.eval_scenarios = 2;
    cfg.validate();
    stoch::Rng rng(stoch::substream(seed, 74));
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) {
        env::StationState state = stoch::random_station_state(rng, cfg);
        bool fresh_arrivals = i % 2 == 0;
        double posted = cfg.pricing.grid_min +
                        (cfg.pricing.grid_max - cfg.pricing.grid_min) * rng.uniform();
        stoch::PriceFn price = [](int, env::EventClass e) {
            return bench::event_price_baseline(e);
        };
        auto set = stoch::generate_sample_paths(state, posted, price, 2, fresh_arrivals, cfg,
                                                stoch::substream(seed, 74, 10 + i));
        mpc::CompileOptions literal, compact;
        literal.mode = mpc::EmitMode::Literal;
        compact.mode = mpc::EmitMode::Compact;
        literal.stage_mode = compact.stage_mode =
            fresh_arrivals ? mpc::StageMode::CandidateEval : mpc::StageMode::Implement;
        mpc::StageSolution sa = mpc::solve_stage(mpc::compile_stage(set, cfg, literal), set, cfg);
        mpc::StageSolution sb = mpc::solve_stage(mpc::compile_stage(set, cfg, compact), set, cfg);
        if (!sa.optimal() || !sb.optimal()) {
            detail = "solver failed on instance " + std::to_string(i);
            return false;
        }
        worst = std::max(worst, std::fabs(sa.mip.objective - sb.mip.objective) /
                                    (1.0 + std::fabs(sb.mip.objective)));
    }
    detail = "6 stage programs, worst emission disagreement " + fmt(worst);
    return worst <= 1e-7;
}

bool check_acceptance_rate(std::uint64_t seed, std::string& detail) {
    StationParams p;  // price cap 2.5
    double posted = 1.25;
    double expect = 1.0 - posted / p.price_cap;
    stoch::Rng rng(stoch::substream(seed, 75));
    int n = 100000, hits = 0;
    for (int i = 0; i < n; ++i)
        if (rng.uniform() < expect) ++hits;
    double got = static_cast<double>(hits) / n;
    detail = "posted 1.25 accepted at " + fmt(got) + ", expected " + fmt(expect);
    return std::fabs(got - expect) <= 0.02;
}

bool check_profile_roundtrip(std::string& detail) {
    RenewableProfile prof = RenewableProfile::default_profile();
    std::string path = (fs::temp_directory_path() / "evsched_profile_check.csv").string();
    prof.save_csv(path);
    RenewableProfile back = RenewableProfile::load_csv(path);
    fs::remove(path);
    for (int h = 0; h < 24; ++h)
        if (prof.wind_speed_ms[h] != back.wind_speed_ms[h] ||
            prof.irradiance_wm2[h] != back.irradiance_wm2[h]) {
            detail = "hour " + std::to_string(h) + " did not round-trip";
            return false;
        }
    detail = "24 hourly rows round-tripped exactly";
    return true;
}

int run_validate(std::uint64_t seed) {
    struct Check {
        const char* name;
        std::function<bool(std::string&)> fn;
    };
    std::vector<Check> checks = {
        {"lp-format-roundtrip", [&](std::string& d) { return check_lp_roundtrip(seed, d); }},
        {"bnb-vs-enumeration", [&](std::string& d) { return check_bnb_oracle(seed, d); }},
        {"difference-identity", [&](std::string& d) { return check_difference_identity(seed, d); }},
        {"program-emissions", [&](std::string& d) { return check_program_modes(seed, d); }},
        {"acceptance-rate", [&](std::string& d) { return check_acceptance_rate(seed, d); }},
        {"profile-roundtrip", [&](std::string& d) { return check_profile_roundtrip(d); }},
    };
    int failures = 0;
    for (auto& c : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        std::cout << (ok ? "PASS " : "FAIL ") << std::left << std::setw(22) << c.name << " "
                  << detail << "\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint pricing and charging control for an EV charging station"};
    app.require_subcommand(1);

    LearnArgs learn;
    CLI::App* learn_cmd = app.add_subcommand("learn", "train the event-based pricing table");
    add_common(learn_cmd, learn.common, "out/learn");
    learn_cmd->add_option("--episodes", learn.episodes, "override the episode cap");
    learn_cmd->add_flag("--no-plateau", learn.no_plateau, "run to the cap or a fixpoint");
    learn_cmd->add_flag("--stage-log", learn.stage_log, "write the full per-stage log");
    learn_cmd->add_flag("--quiet", learn.quiet, "suppress progress lines");

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "run days under one policy, write traces");
    add_common(sim_cmd, sim.common, "out/simulate");
    sim_cmd->add_option("--policy", sim.policy, "roster policy name")->capture_default_str();
    sim_cmd->add_option("--policy-file", sim.policy_file, "learned pricing table CSV")
        ->check(CLI::ExistingFile);
    sim_cmd->add_option("--days", sim.days, "number of days")->capture_default_str();
    sim_cmd->add_flag("--train", sim.train, "train the table first when needed");
    sim_cmd->add_flag("--dump-lp", sim.dump_lp, "export the first stage program in LP format");
    sim_cmd->add_flag("--list", sim.list, "list roster policies and exit");
    sim_cmd->add_flag("--quiet", sim.quiet, "suppress progress lines");

    BenchmarkArgs bm;
    CLI::App* bm_cmd = app.add_subcommand("benchmark", "compare policies over paired days");
    add_common(bm_cmd, bm.common, "out/benchmark");
    bm_cmd->add_option("--policies", bm.policies, "comma separated roster names (default all)")
        ->delimiter(',');
    bm_cmd->add_option("--policy-file", bm.policy_file, "learned pricing table CSV")
        ->check(CLI::ExistingFile);
    bm_cmd->add_option("--days", bm.days, "days per policy")->capture_default_str();
    bm_cmd->add_flag("--list", bm.list, "list roster policies and exit");
    bm_cmd->add_flag("--quiet", bm.quiet, "suppress progress lines");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "retrain and evaluate across one input");
    add_common(sweep_cmd, sweep.common, "out/sweep");
    sweep_cmd->add_option("--dimension", sweep.dimension, "beta, capacity or arrival")
        ->required();
    sweep_cmd->add_option("--values", sweep.values, "comma separated values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--days", sweep.days, "evaluation days per point")
        ->capture_default_str();
    sweep_cmd->add_flag("--quiet", sweep.quiet, "suppress progress lines");

    std::uint64_t validate_seed = 1;
    CLI::App* val_cmd = app.add_subcommand("validate", "fast solver and estimator cross-checks");
    val_cmd->add_option("--seed", validate_seed, "master seed")->capture_default_str();

    try {
        app.parse(argc, argv);
        if (learn_cmd->parsed()) return run_learn(learn);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (bm_cmd->parsed()) return run_benchmark_cmd(bm);
        if (sweep_cmd->parsed()) return run_sweep(sweep);
        if (val_cmd->parsed()) return run_validate(validate_seed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
