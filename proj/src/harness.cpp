#include "pcrbtrack/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "pcrbtrack/selftest.hpp"

namespace pcrbtrack {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void put(std::string& s, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, r.ptr);
}

void put(std::string& s, long long v) {
  char buf[24];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, r.ptr);
}

std::string shortest(double v) {
  std::string s;
  put(s, v);
  return s;
}

template <class T>
T parse_number(std::string_view f, int line) {
  T v{};
  const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
  if (r.ec != std::errc() || r.ptr != f.data() + f.size())
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" +
                             std::string(f) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (;;) {
    const size_t k = line.find(sep, start);
    const size_t len = k == std::string_view::npos ? std::string_view::npos : k - start;
    out.push_back(line.substr(start, len));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

std::vector<Policy> parse_policies(const std::string& s) {
  if (s == "both") return {Policy::kProposed, Policy::kBenchmark};
  return {policy_from_string(s)};
}

std::string trial_file(const EpisodeLog& log) {
  std::ostringstream name;
  name << to_string(log.policy) << "_trial" << std::setw(4) << std::setfill('0') << log.trial
       << ".csv";
  return name.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

Policy policy_from_string(std::string_view s) {
  if (s == "proposed") return Policy::kProposed;
  if (s == "benchmark") return Policy::kBenchmark;
  throw std::invalid_argument("unknown policy '" + std::string(s) + "'");
}

ModeTag mode_tag_from_string(std::string_view s) {
  for (ModeTag t : {ModeTag::kCandidate, ModeTag::kBackupFallback, ModeTag::kDirectFlight,
                    ModeTag::kForcedTerminal})
    if (s == to_string(t)) return t;
  throw std::invalid_argument("unknown mode tag '" + std::string(s) + "'");
}

std::string to_csv(const EpisodeLog& log) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : log.records) {
    put(s, static_cast<long long>(r.trial));
    s += ',';
    put(s, static_cast<long long>(r.slot));
    s += ',';
    put(s, r.time);
    s += ',';
    s += to_string(r.policy);
    s += ',';
    s += to_string(r.tag);
    for (double v : {r.target_pos, r.uav_pos, r.uav_vel, r.rel_x, r.rel_v, r.est_x, r.est_v,
                     r.pred_pcrb_x, r.pred_pcrb_v, r.act_pcrb_x, r.act_pcrb_v, r.weighted_actual,
                     r.slot_energy, r.cumulative_energy, r.E_b}) {
      s += ',';
      put(s, v);
    }
    s += ',';
    put(s, static_cast<long long>(r.gate));
    s += '\n';
  }
  return s;
}

EpisodeLog parse_csv(std::string_view text) {
  EpisodeLog log;
  int line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const size_t k = text.find('\n');
    std::string_view line = text.substr(0, k);
    text = k == std::string_view::npos ? std::string_view{} : text.substr(k + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 21)
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 21 fields");
    SlotRecord r;
    r.trial = parse_number<int>(f[0], line_no);
    r.slot = parse_number<int>(f[1], line_no);
    r.time = parse_number<double>(f[2], line_no);
    r.policy = policy_from_string(f[3]);
    r.tag = mode_tag_from_string(f[4]);
    double* dst[] = {&r.target_pos, &r.uav_pos, &r.uav_vel, &r.rel_x, &r.rel_v,
                     &r.est_x, &r.est_v, &r.pred_pcrb_x, &r.pred_pcrb_v, &r.act_pcrb_x,
                     &r.act_pcrb_v, &r.weighted_actual, &r.slot_energy, &r.cumulative_energy,
                     &r.E_b};
    for (size_t i = 0; i < std::size(dst); ++i) *dst[i] = parse_number<double>(f[5 + i], line_no);
    r.gate = parse_number<int>(f[20], line_no);
    log.records.push_back(r);
  }
  if (header) throw std::runtime_error("csv: missing header");
  if (!log.records.empty()) {
    log.trial = log.records.front().trial;
    log.policy = log.records.front().policy;
  }
  return log;
}

RunSummary summarize(const std::vector<EpisodeLog>& logs, double x_F) {
  RunSummary out;
  out.x_F = x_F;
  for (const auto& log : logs) {
    auto it = std::find_if(out.policies.begin(), out.policies.end(),
                           [&](const PolicySummary& p) { return p.policy == log.policy; });
    if (it == out.policies.end()) {
      out.policies.push_back({});
      it = std::prev(out.policies.end());
      it->policy = log.policy;
    }
    it->trials += 1;
  }
  for (auto& ps : out.policies) {
    double w_sum = 0.0, e_sum = 0.0, tp_sum = 0.0;
    long long slots = 0;
    for (const auto& log : logs) {
      if (log.policy != ps.policy) continue;
      for (const auto& r : log.records) w_sum += r.weighted_actual;
      slots += static_cast<long long>(log.records.size());
      const double e = log.total_energy();
      e_sum += e;
      ps.energy_max = std::max(ps.energy_max, e);
      const int tp = log.turning_point();
      tp_sum += tp;
      ps.turning_points[tp] += 1;
      ps.terminal_error_max = std::max(ps.terminal_error_max, log.terminal_error(x_F));
    }
    ps.mean_weighted_actual = slots > 0 ? w_sum / static_cast<double>(slots) : 0.0;
    ps.energy_mean = e_sum / ps.trials;
    ps.turning_point_mean = tp_sum / ps.trials;
  }
  return out;
}

std::string summary_json(const RunSummary& s) {
  json doc;
  doc["x_F"] = s.x_F;
  doc["policies"] = json::array();
  for (const auto& p : s.policies) {
    json tp = json::object();
    for (const auto& [slot, count] : p.turning_points) tp[std::to_string(slot)] = count;
    doc["policies"].push_back({{"policy", to_string(p.policy)},
                               {"trials", p.trials},
                               {"mean_weighted_actual_pcrb", p.mean_weighted_actual},
                               {"energy_mean", p.energy_mean},
                               {"energy_max", p.energy_max},
                               {"turning_point_mean", p.turning_point_mean},
                               {"turning_points", tp},
                               {"terminal_error_max", p.terminal_error_max}});
  }
  return doc.dump(2) + "\n";
}

std::string summary_table(const RunSummary& s) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "policy" << std::right << std::setw(7) << "trials"
     << std::setw(15) << "w_actual_pcrb" << std::setw(13) << "energy_mean" << std::setw(13)
     << "energy_max" << std::setw(12) << "turn_mean" << std::setw(14) << "term_err_max" << "\n";
  for (const auto& p : s.policies) {
    os << std::left << std::setw(10) << to_string(p.policy) << std::right << std::setw(7)
       << p.trials << std::setw(15) << std::setprecision(6) << p.mean_weighted_actual
       << std::fixed << std::setprecision(2) << std::setw(13) << p.energy_mean << std::setw(13)
       << p.energy_max << std::setw(12) << p.turning_point_mean << std::defaultfloat
       << std::setprecision(3) << std::setw(14) << p.terminal_error_max << "\n";
  }
  return os.str();
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

int effective_jobs(int requested) {
  if (const char* env = std::getenv("PCRB_TRACKER_JOBS")) {
    const std::string_view s(env);
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1, requested);
}

std::vector<EpisodeLog> run_batch(const Scenario& sc, const BatchOptions& opt) {
  const int np = static_cast<int>(opt.policies.size());
  const int tasks = opt.trials * np;
  std::vector<EpisodeLog> logs(static_cast<size_t>(tasks));
  std::vector<std::exception_ptr> errors(static_cast<size_t>(tasks));
  const Solvers solvers{opt.sdp, nullptr};

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, opt.jobs))
  for (int k = 0; k < tasks; ++k) {
    const int trial = k / np + 1;
    try {
      logs[static_cast<size_t>(k)] = run_episode(sc, opt.policies[static_cast<size_t>(k % np)],
                                                 trial_seed(opt.seed, trial), solvers, trial);
    } catch (...) {
      errors[static_cast<size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return logs;
}

void write_run(const std::string& dir, const std::vector<EpisodeLog>& logs,
               const RunSummary& summary) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
  for (const auto& log : logs) write_file(root / trial_file(log), to_csv(log));
  write_file(root / "summary.json", summary_json(summary));
}

Scenario with_override(const Scenario& sc, const std::string& key, double value) {
  json doc = json::parse(serialize_scenario(sc));
  if (!doc.contains(key)) throw ConfigError("unknown sweep parameter '" + key + "'");
  doc[key] = value;
  return load_scenario(doc.dump());
}

namespace {

struct Prepared {
  Scenario sc;
  BatchOptions batch;
};

// Exit codes: 2 usage/config, 3 I/O, 4 infeasible or numerical failure in a trial.
int prepare(const SimulateArgs& a, Prepared& p, std::ostream& err) {
  try {
    p.sc = a.config.empty() ? load_scenario("") : load_scenario_file(a.config);
    p.batch.policies = parse_policies(a.policy);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (a.trials < 1) {
    err << "error: --trials must be >= 1\n";
    return 2;
  }
  if (a.solver != "sdp" && a.solver != "oracle") {
    err << "error: --solver must be sdp or oracle\n";
    return 2;
  }
  p.batch.trials = a.trials;
  p.batch.seed = a.seed.value_or(p.sc.init.seed);
  p.batch.jobs = effective_jobs(a.jobs);
  return 0;
}

int run_and_write(const Scenario& sc, BatchOptions batch, const std::string& solver,
                  const std::string& dir, RunSummary& summary, std::ostream& err) {
  const PrimalDualSdpSolver sdp;
  batch.sdp = solver == "sdp" ? &sdp : nullptr;
  std::vector<EpisodeLog> logs;
  try {
    logs = run_batch(sc, batch);
  } catch (const std::exception& e) {
    err << "error: trial failed: " << e.what() << "\n";
    return 4;
  }
  summary = summarize(logs, sc.mission.x_F);
  try {
    write_run(dir, logs, summary);
    write_file(fs::path(dir) / "scenario.json", serialize_scenario(sc));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  Prepared p;
  if (int rc = prepare(args, p, err)) return rc;
  RunSummary summary;
  if (int rc = run_and_write(p.sc, p.batch, args.solver, args.out, summary, err)) return rc;
  out << summary_table(summary);
  return 0;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  if (args.values.empty()) {
    err << "error: --values needs at least one value\n";
    return 2;
  }
  Prepared p;
  if (int rc = prepare(args.base, p, err)) return rc;

  std::vector<Scenario> scenarios;
  try {
    for (double v : args.values) scenarios.push_back(with_override(p.sc, args.param, v));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  std::string rows = "param,value,policy,trials,mean_weighted_actual_pcrb,energy_mean,energy_max,"
                     "turning_point_mean,terminal_error_max\n";
  out << std::left << std::setw(14) << args.param << std::setw(10) << "policy" << std::right
      << std::setw(12) << "turn_mean" << std::setw(15) << "w_actual_pcrb" << std::setw(13)
      << "energy_mean" << "\n";
  for (size_t i = 0; i < scenarios.size(); ++i) {
    const std::string value = shortest(args.values[i]);
    const std::string dir = (fs::path(args.base.out) / (args.param + "=" + value)).string();
    RunSummary summary;
    if (int rc = run_and_write(scenarios[i], p.batch, args.base.solver, dir, summary, err))
      return rc;
    for (const auto& ps : summary.policies) {
      rows += args.param + "," + value + "," + to_string(ps.policy) + ",";
      put(rows, static_cast<long long>(ps.trials));
      for (double v : {ps.mean_weighted_actual, ps.energy_mean, ps.energy_max,
                       ps.turning_point_mean, ps.terminal_error_max}) {
        rows += ',';
        put(rows, v);
      }
      rows += '\n';
      out << std::left << std::setw(14) << value << std::setw(10) << to_string(ps.policy)
          << std::right << std::fixed << std::setprecision(2) << std::setw(12)
          << ps.turning_point_mean << std::defaultfloat << std::setprecision(6) << std::setw(15)
          << ps.mean_weighted_actual << std::fixed << std::setprecision(2) << std::setw(13)
          << ps.energy_mean << std::defaultfloat << "\n";
    }
  }
  try {
    write_file(fs::path(args.base.out) / "sweep.csv", rows);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

int cmd_selftest(const SelftestArgs& args, std::ostream& out, std::ostream&) {
  const PrimalDualSdpSolver sdp;
  SelftestOptions opt;
  opt.sdp = args.no_sdp ? nullptr : &sdp;
  opt.seed = args.seed;
  if (args.mutate_pcrb) opt.mutation.angle_term_scale = 1.001;
  bool failed = false;
  for (const auto& c : run_selftest(opt)) {
    out << std::left << std::setw(8) << to_string(c.status) << std::setw(24) << c.name << c.detail
        << "\n";
    failed = failed || c.status == CheckStatus::kFail;
  }
  return failed ? 1 : 0;
}

}  // namespace pcrbtrack
