#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "jitai/errors.hpp"
#include "jitai/hybrid.hpp"

namespace jitai {

enum class AgentMode { Hybrid, Standard };

inline std::string_view to_string(AgentMode mode) {
  return mode == AgentMode::Hybrid ? "hybrid" : "standard";
}

inline AgentMode agent_mode_from_string(const std::string& name) {
  if (name == "hybrid") return AgentMode::Hybrid;
  if (name == "standard") return AgentMode::Standard;
  throw ConfigError("unknown mode: " + name + " (expected hybrid or standard)");
}

// Grid experiment: modes x (p_w11, p_w00) cells x seeds, one trial each.
// p_w00 is the user-facing knob; internally p_w01 = 1 - p_w00.
struct SweepSpec {
  std::vector<double> p_w11_values;
  std::vector<double> p_w00_values;
  std::vector<std::uint64_t> seeds;
  std::vector<AgentMode> modes = {AgentMode::Hybrid, AgentMode::Standard};
  std::filesystem::path output_dir;
  EnvParams env;
  WalkParams walk;  // p_w01/p_w11 overridden per cell
  TSConfig ts;
  double oracle_ambiguity_rate = 0.06;
  bool live_llm = false;  // hybrid mode consults the endpoint instead of the mock
  LLMClientConfig llm;
  int history_window = 4;
  int threads = 0;  // 0 = hardware concurrency
  bool write_trial_logs = true;
};

struct Quantiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct CellResult {
  double p_w11 = 0.0;
  double p_w00 = 0.0;
  AgentMode mode = AgentMode::Hybrid;
  Quantiles total_reward;
  std::array<long, kNumActions> action_counts{};
  std::vector<Quantiles> cumulative_reward;  // per time step, pooled over seeds
  long trials = 0;
  long steps = 0;
  long filter_queries = 0;
  long llm_http_calls = 0;
  long llm_transport_errors = 0;
};

struct AggregateResult {
  std::vector<CellResult> cells;
};

// Nearest-rank percentile: the smallest element whose rank is >= ceil(q/100 * n).
inline double percentile_nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile must be in [0,100]");
  std::sort(values.begin(), values.end());
  if (q == 0.0) return values.front();
  const auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(values.size())));
  return values[rank - 1];
}

inline Quantiles summarize(const std::vector<double>& values) {
  return {percentile_nearest_rank(values, 50.0), percentile_nearest_rank(values, 25.0),
          percentile_nearest_rank(values, 75.0)};
}

inline CellResult aggregate_cell(double p_w11, double p_w00, AgentMode mode,
                                 const std::vector<TrialRecord>& records) {
  CellResult cell;
  cell.p_w11 = p_w11;
  cell.p_w00 = p_w00;
  cell.mode = mode;
  cell.trials = static_cast<long>(records.size());

  std::vector<double> totals;
  totals.reserve(records.size());
  std::size_t max_len = 0;
  for (const auto& record : records) {
    totals.push_back(record.total_reward);
    max_len = std::max(max_len, record.steps.size());
    cell.steps += static_cast<long>(record.steps.size());
    cell.filter_queries += record.filter_queries;
    cell.llm_http_calls += record.llm_http_calls;
    cell.llm_transport_errors += record.llm_transport_errors;
    for (const auto& step : record.steps) cell.action_counts[step.executed] += 1;
  }
  cell.total_reward = summarize(totals);

  // Cumulative rewards carry forward past early termination.
  std::vector<std::vector<double>> cumulative(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    double running = 0.0;
    cumulative[i].reserve(max_len);
    for (const auto& step : records[i].steps) {
      running += step.reward;
      cumulative[i].push_back(running);
    }
    while (cumulative[i].size() < max_len) cumulative[i].push_back(running);
  }
  cell.cumulative_reward.reserve(max_len);
  std::vector<double> column(records.size());
  for (std::size_t t = 0; t < max_len; ++t) {
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = cumulative[i][t];
    cell.cumulative_reward.push_back(summarize(column));
  }
  return cell;
}

namespace detail {

inline std::string format_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Runs fn(0..count-1) on a small worker pool; results must be slotted by
// index so the outcome is independent of scheduling.
inline void run_indexed_jobs(std::size_t count, int threads,
                             const std::function<void(std::size_t)>& fn) {
  unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::thread::hardware_concurrency();
  if (n < 1) n = 1;
  n = std::min<unsigned>(n, count == 0 ? 1 : static_cast<unsigned>(count));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        break;
      }
    }
  };
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

inline void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory is not writable: " + dir.string());
  }
  std::filesystem::remove(probe, ec);
}

inline std::string trial_stem(double p_w11, double p_w00, AgentMode mode, std::uint64_t seed) {
  return "trial_pw11_" + format_prob(p_w11) + "_pw00_" + format_prob(p_w00) + "_" +
         std::string(to_string(mode)) + "_seed_" + std::to_string(seed);
}

}  // namespace detail

inline void write_summary_csv(const AggregateResult& result, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << "p_w11,p_w00,mode,median,q25,q75\n";
  for (const auto& cell : result.cells) {
    out << detail::format_prob(cell.p_w11) << ',' << detail::format_prob(cell.p_w00) << ','
        << to_string(cell.mode) << ',' << detail::format_value(cell.total_reward.median) << ','
        << detail::format_value(cell.total_reward.q25) << ','
        << detail::format_value(cell.total_reward.q75) << '\n';
  }
}

inline void write_histogram_csv(const AggregateResult& result, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << "p_w11,p_w00,mode,action,count\n";
  for (const auto& cell : result.cells) {
    for (int a = 0; a < kNumActions; ++a) {
      out << detail::format_prob(cell.p_w11) << ',' << detail::format_prob(cell.p_w00) << ','
          << to_string(cell.mode) << ',' << a << ',' << cell.action_counts[a] << '\n';
    }
  }
}

inline void write_cumulative_csv(const AggregateResult& result, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::out | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << "p_w11,p_w00,mode,t,median,q25,q75\n";
  for (const auto& cell : result.cells) {
    for (std::size_t t = 0; t < cell.cumulative_reward.size(); ++t) {
      const auto& q = cell.cumulative_reward[t];
      out << detail::format_prob(cell.p_w11) << ',' << detail::format_prob(cell.p_w00) << ','
          << to_string(cell.mode) << ',' << t << ',' << detail::format_value(q.median) << ','
          << detail::format_value(q.q25) << ',' << detail::format_value(q.q75) << '\n';
    }
  }
}

// Runs every (mode, cell, seed) trial, writes per-trial JSONL plus the three
// aggregate CSVs, and returns the aggregates. Deterministic for a fixed spec
// under MockOracle/standard modes, whatever the thread count.
inline AggregateResult run_sweep(const SweepSpec& spec) {
  if (spec.p_w11_values.empty() || spec.p_w00_values.empty()) {
    throw ConfigError("sweep needs at least one p_w11 and one p_w00 value");
  }
  if (spec.seeds.empty()) throw ConfigError("sweep needs at least one seed");
  for (double v : spec.p_w11_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("p_w11 values must be in [0,1]");
  }
  for (double v : spec.p_w00_values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("p_w00 values must be in [0,1]");
  }
  validate(spec.env);
  validate(spec.ts);
  {
    WalkParams probe = spec.walk;
    probe.p_w11 = spec.p_w11_values.front();
    probe.p_w01 = 1.0 - spec.p_w00_values.front();
    validate(probe);
  }
  detail::ensure_writable_dir(spec.output_dir);

  struct Cell {
    double p_w11;
    double p_w00;
    AgentMode mode;
  };
  std::vector<Cell> cells;
  for (double p_w11 : spec.p_w11_values) {
    for (double p_w00 : spec.p_w00_values) {
      for (AgentMode mode : spec.modes) cells.push_back({p_w11, p_w00, mode});
    }
  }

  struct Job {
    TrialConfig cfg;
    std::filesystem::path log_file;
  };
  std::vector<Job> jobs;
  jobs.reserve(cells.size() * spec.seeds.size());
  for (const auto& cell : cells) {
    for (std::uint64_t seed : spec.seeds) {
      TrialConfig cfg;
      cfg.env = spec.env;
      cfg.walk = spec.walk;
      cfg.walk.p_w11 = cell.p_w11;
      cfg.walk.p_w01 = 1.0 - cell.p_w00;
      cfg.ts = spec.ts;
      cfg.seed = seed;
      cfg.history_window = spec.history_window;
      const auto stem = detail::trial_stem(cell.p_w11, cell.p_w00, cell.mode, seed);
      if (cell.mode == AgentMode::Hybrid) {
        if (spec.live_llm) {
          cfg.filter.mode = FilterMode::LiveLLM;
          cfg.filter.llm = spec.llm;
          cfg.filter.audit_log = spec.output_dir / ("audit_" + stem + ".jsonl");
        } else {
          cfg.filter.mode = FilterMode::MockOracle;
          cfg.filter.ambiguity_rate = spec.oracle_ambiguity_rate;
        }
      }
      jobs.push_back({std::move(cfg), spec.output_dir / (stem + ".jsonl")});
    }
  }

  std::vector<TrialRecord> records(jobs.size());
  detail::run_indexed_jobs(jobs.size(), spec.threads, [&](std::size_t i) {
    records[i] = run_trial(jobs[i].cfg);
    if (spec.write_trial_logs) write_jsonl(records[i], jobs[i].log_file);
  });

  AggregateResult result;
  result.cells.reserve(cells.size());
  const std::size_t per_cell = spec.seeds.size();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<TrialRecord> cell_records(records.begin() + static_cast<long>(c * per_cell),
                                          records.begin() + static_cast<long>((c + 1) * per_cell));
    result.cells.push_back(
        aggregate_cell(cells[c].p_w11, cells[c].p_w00, cells[c].mode, cell_records));
  }

  write_summary_csv(result, spec.output_dir / "summary.csv");
  write_histogram_csv(result, spec.output_dir / "histogram.csv");
  write_cumulative_csv(result, spec.output_dir / "cumulative.csv");
  return result;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file,
                                                      std::size_t expected_fields) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != expected_fields) {
      throw ConfigError("malformed row in " + file.string() + ": " + line);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

// Rebuilds an AggregateResult from the three CSVs written by run_sweep, so
// plots can be regenerated without re-running trials.
inline AggregateResult read_aggregate_csvs(const std::filesystem::path& dir) {
  AggregateResult result;
  auto find_cell = [&result](double p_w11, double p_w00, AgentMode mode) -> CellResult& {
    for (auto& cell : result.cells) {
      if (cell.p_w11 == p_w11 && cell.p_w00 == p_w00 && cell.mode == mode) return cell;
    }
    throw ConfigError("histogram/cumulative row without a summary row");
  };

  for (const auto& row : detail::read_csv(dir / "summary.csv", 6)) {
    CellResult cell;
    cell.p_w11 = std::stod(row[0]);
    cell.p_w00 = std::stod(row[1]);
    cell.mode = agent_mode_from_string(row[2]);
    cell.total_reward = {std::stod(row[3]), std::stod(row[4]), std::stod(row[5])};
    result.cells.push_back(std::move(cell));
  }
  for (const auto& row : detail::read_csv(dir / "histogram.csv", 5)) {
    auto& cell = find_cell(std::stod(row[0]), std::stod(row[1]), agent_mode_from_string(row[2]));
    const int action = std::stoi(row[3]);
    if (action < 0 || action >= kNumActions) throw ConfigError("histogram action out of range");
    cell.action_counts[action] = std::stol(row[4]);
  }
  for (const auto& row : detail::read_csv(dir / "cumulative.csv", 7)) {
    auto& cell = find_cell(std::stod(row[0]), std::stod(row[1]), agent_mode_from_string(row[2]));
    const auto t = static_cast<std::size_t>(std::stol(row[3]));
    if (cell.cumulative_reward.size() != t) {
      throw ConfigError("cumulative rows out of order in " + (dir / "cumulative.csv").string());
    }
    cell.cumulative_reward.push_back({std::stod(row[4]), std::stod(row[5]), std::stod(row[6])});
  }
  return result;
}

// Scenario file: JSON object with the grid, seeds, modes and parameter
// overrides. Defaults fill everything that is omitted.
inline SweepSpec load_scenario(const std::filesystem::path& file, std::uint64_t seed_base = 0) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read scenario file: " + file.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed scenario file " + file.string() + ": " + e.what());
  }

  SweepSpec spec;
  try {
    spec.p_w11_values = j.at("p_w11").get<std::vector<double>>();
    spec.p_w00_values = j.at("p_w00").get<std::vector<double>>();

    if (j.contains("seeds")) {
      spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      for (auto& s : spec.seeds) s += seed_base;
    } else {
      const auto num_seeds = j.value("num_seeds", 10);
      if (num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
      for (int i = 0; i < num_seeds; ++i) spec.seeds.push_back(seed_base + static_cast<std::uint64_t>(i));
    }

    if (j.contains("modes")) {
      spec.modes.clear();
      for (const auto& name : j["modes"]) spec.modes.push_back(agent_mode_from_string(name.get<std::string>()));
    }

    spec.oracle_ambiguity_rate = j.value("oracle_ambiguity_rate", spec.oracle_ambiguity_rate);
    spec.history_window = j.value("history_window", spec.history_window);

    if (j.contains("env")) {
      const auto& e = j["env"];
      spec.env.sigma = e.value("sigma", spec.env.sigma);
      spec.env.delta_h = e.value("delta_h", spec.env.delta_h);
      spec.env.epsilon_h = e.value("epsilon_h", spec.env.epsilon_h);
      spec.env.delta_d = e.value("delta_d", spec.env.delta_d);
      spec.env.epsilon_d = e.value("epsilon_d", spec.env.epsilon_d);
      spec.env.m_s = e.value("m_s", spec.env.m_s);
      spec.env.rho1 = e.value("rho1", spec.env.rho1);
      spec.env.rho2 = e.value("rho2", spec.env.rho2);
      spec.env.d_threshold = e.value("d_threshold", spec.env.d_threshold);
      spec.env.t_max = e.value("t_max", spec.env.t_max);
    }
    if (j.contains("walk")) {
      const auto& w = j["walk"];
      spec.walk.eta_d = w.value("eta_d", spec.walk.eta_d);
      spec.walk.eta_h = w.value("eta_h", spec.walk.eta_h);
      if (w.contains("constraint_mode")) {
        const auto mode = w["constraint_mode"].get<std::string>();
        if (mode == "per_step") spec.walk.constraint_mode = ConstraintMode::PerStep;
        else if (mode == "on_transition") spec.walk.constraint_mode = ConstraintMode::OnTransition;
        else throw ConfigError("unknown constraint_mode: " + mode);
      }
      if (w.contains("preference_pool_file")) {
        spec.walk.preference_pool = load_preference_pool(w["preference_pool_file"].get<std::string>());
      }
    }
    if (j.contains("ts")) {
      const auto& t = j["ts"];
      spec.ts.feature_dim = t.value("feature_dim", spec.ts.feature_dim);
      spec.ts.prior_mean_scale = t.value("prior_mean_scale", spec.ts.prior_mean_scale);
      spec.ts.prior_cov_scale = t.value("prior_cov_scale", spec.ts.prior_cov_scale);
      spec.ts.reward_noise_var = t.value("reward_noise_var", spec.ts.reward_noise_var);
    }
    if (j.contains("llm")) {
      const auto& l = j["llm"];
      spec.llm.endpoint_url = l.value("endpoint_url", spec.llm.endpoint_url);
      spec.llm.model_name = l.value("model_name", spec.llm.model_name);
      spec.llm.api_key_env_var = l.value("api_key_env_var", spec.llm.api_key_env_var);
      spec.llm.timeout = std::chrono::milliseconds(l.value("timeout_ms", spec.llm.timeout.count()));
      spec.llm.max_retries = l.value("max_retries", spec.llm.max_retries);
      spec.llm.temperature = l.value("temperature", spec.llm.temperature);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid scenario file " + file.string() + ": " + e.what());
  }
  return spec;
}

}  // namespace jitai
