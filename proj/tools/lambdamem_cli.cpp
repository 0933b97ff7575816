// Command-line front end: simulate / sweep / analyze / histogram /
// fit-lifetime / print-defaults. Every command that writes result files also
// writes a manifest.json (before the results, finalized with timing after).
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error. Worker count for sweeps and ring averaging comes from the
// LAMBDAMEM_WORKERS environment variable (default: hardware concurrency).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lambdamem/config.hpp"
#include "lambdamem/counts.hpp"
#include "lambdamem/ensemble.hpp"
#include "lambdamem/manifest.hpp"
#include "lambdamem/solver.hpp"
#include "lambdamem/sweep.hpp"
#include "lambdamem/timetags.hpp"
#include "lambdamem/units.hpp"

namespace fs = std::filesystem;
using namespace lambdamem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// File contents that fail to parse are configuration errors; unopenable or
// unwritable files are I/O errors.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

std::string join_args(int argc, char** argv) {
  std::string joined;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) joined += ' ';
    joined += argv[i];
  }
  return joined;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& sets) {
  ExperimentConfig config = default_experiment_config();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file: " + config_path);
    apply_config_text(config, in);
  }
  for (const std::string& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + item +
                        "' is not of the form section.key=value");
    apply_setting(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return config;
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failure on: " + path);
}

struct ManifestSession {
  std::string out_dir;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  // Written up front so a crashed run cannot leave orphan results, then
  // finalized with wall-clock timing.
  void begin() { write_manifest(out_dir, manifest); }
  void finish() {
    manifest.wall_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    write_manifest(out_dir, manifest);
  }
};

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path,
                 const std::vector<std::string>& sets,
                 const std::string& out_dir, const std::string& command) {
  const ExperimentConfig config = load_config(config_path, sets);
  const PhysicsPoint point = resolve(config);

  ManifestSession session;
  session.out_dir = out_dir;
  session.manifest.command = command;
  session.manifest.resolved_config = to_config_text(config);
  if (!config_path.empty())
    session.manifest.input_digests.emplace_back(config_path,
                                                fnv1a64_hex_file(config_path));
  session.manifest.output_files = {"summary.csv", "leakage.csv",
                                   "retrieval.csv", "spin_profile.csv"};
  ensure_out_dir(out_dir);
  session.begin();

  const MemoryRunResult result =
      ensemble_run(point.scheme, point.ensemble, point.signal, point.control_in,
                   point.control_out, point.storage_time);

  {
    auto out = open_output(out_dir + "/summary.csv");
    out << "eta_internal,eta_storage,input_energy,leaked_energy,"
           "retrieved_energy,decayed_energy,hold_loss,residual_energy,"
           "energy_defect\n";
    char line[352];
    std::snprintf(line, sizeof line,
                  "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.3e\n",
                  result.eta_internal, result.eta_storage, result.input_energy,
                  result.leaked_energy, result.retrieved_energy,
                  result.decayed_energy, result.hold_loss,
                  result.residual_energy, result.energy_defect());
    out << line;
    finish_output(out, out_dir + "/summary.csv");
  }
  const auto write_trace = [&](const std::string& name,
                               const std::vector<double>& t,
                               const std::vector<double>& flux) {
    auto out = open_output(out_dir + "/" + name);
    out << "t_ns,flux\n";
    char line[80];
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::snprintf(line, sizeof line, "%.6f,%.10g\n", t[i], flux[i]);
      out << line;
    }
    finish_output(out, out_dir + "/" + name);
  };
  write_trace("leakage.csv", result.leakage_t, result.leakage_flux);
  write_trace("retrieval.csv", result.retrieval_t, result.retrieval_flux);
  {
    auto out = open_output(out_dir + "/spin_profile.csv");
    out << "z_mm,re,im\n";
    char line[112];
    for (Eigen::Index i = 0; i < result.z.size(); ++i) {
      std::snprintf(line, sizeof line, "%.6f,%.10g,%.10g\n", result.z[i],
                    result.spin_profile[i].real(),
                    result.spin_profile[i].imag());
      out << line;
    }
    finish_output(out, out_dir + "/spin_profile.csv");
  }
  session.finish();

  std::printf("eta_internal = %.6f\n", result.eta_internal);
  std::printf("eta_storage  = %.6f\n", result.eta_storage);
  std::printf("energy defect = %.3e (relative %.3e)\n", result.energy_defect(),
              result.input_energy > 0.0
                  ? result.energy_defect() / result.input_energy
                  : 0.0);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFile {
  SweepSpec spec;
  std::vector<std::string> overrides; // section.key=value entries
};

SweepFile parse_sweep_spec(std::istream& in) {
  SweepFile file;
  bool have_axis = false;
  bool have_values = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("sweep spec line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "axis") {
      file.spec.axis = sweep_axis_from_string(value);
      have_axis = true;
    } else if (key == "values") {
      std::string cleaned = value;
      std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
      std::istringstream vs(cleaned);
      double v = 0.0;
      while (vs >> v) file.spec.values.push_back(v);
      if (!vs.eof())
        throw ConfigError("sweep spec line " + std::to_string(line_no) +
                          ": non-numeric entry in values");
      have_values = true;
    } else if (key == "align") {
      if (value == "true" || value == "1")
        file.spec.align = true;
      else if (value == "false" || value == "0")
        file.spec.align = false;
      else
        throw ConfigError("sweep spec line " + std::to_string(line_no) +
                          ": align must be true or false");
    } else if (key.rfind("set ", 0) == 0 || key.rfind("set\t", 0) == 0) {
      file.overrides.push_back(trim(key.substr(4)) + "=" + value);
    } else {
      throw ConfigError("sweep spec line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
  }
  if (!have_axis) throw ConfigError("sweep spec: missing 'axis'");
  if (!have_values || file.spec.values.empty())
    throw ConfigError("sweep spec: missing or empty 'values'");
  return file;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& sets,
              const std::string& spec_path, const std::string& out_dir,
              bool resume, const std::string& command) {
  ExperimentConfig config = load_config(config_path, sets);
  SweepFile sweep_file;
  {
    std::ifstream in(spec_path);
    if (!in) throw IoError("cannot open sweep spec: " + spec_path);
    sweep_file = parse_sweep_spec(in);
  }
  for (const std::string& item : sweep_file.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("sweep spec 'set " + item +
                        "' is not of the form section.key=value");
    apply_setting(config, trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  const PhysicsPoint base = resolve(config);

  const std::string csv_path = out_dir + "/sweep.csv";

  // Resume: rows already computed successfully (matched by exact axis value,
  // which round-trips through the CSV) are kept; error rows are retried.
  std::map<double, SweepRow> completed;
  if (resume && fs::exists(csv_path)) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open existing sweep output: " + csv_path);
    for (const SweepRow& row : parse_sweep_csv(in))
      if (row.status.rfind("error", 0) != 0) completed.emplace(row.value, row);
  }

  ManifestSession session;
  session.out_dir = out_dir;
  session.manifest.command = command;
  session.manifest.resolved_config = to_config_text(config);
  if (!config_path.empty())
    session.manifest.input_digests.emplace_back(config_path,
                                                fnv1a64_hex_file(config_path));
  session.manifest.input_digests.emplace_back(spec_path,
                                              fnv1a64_hex_file(spec_path));
  session.manifest.output_files = {"sweep.csv"};
  ensure_out_dir(out_dir);
  session.begin();

  SweepSpec missing = sweep_file.spec;
  missing.values.clear();
  for (double v : sweep_file.spec.values)
    if (!completed.count(v)) missing.values.push_back(v);

  std::vector<SweepRow> fresh;
  if (!missing.values.empty()) fresh = run_sweep(missing, base);

  std::vector<SweepRow> rows;
  rows.reserve(sweep_file.spec.values.size());
  std::size_t next_fresh = 0;
  for (double v : sweep_file.spec.values) {
    const auto it = completed.find(v);
    if (it != completed.end())
      rows.push_back(it->second);
    else
      rows.push_back(fresh.at(next_fresh++));
  }

  {
    auto out = open_output(csv_path);
    write_sweep_csv(out, sweep_file.spec.axis, rows);
    finish_output(out, csv_path);
  }
  session.finish();

  int failures = 0;
  for (const SweepRow& row : rows)
    if (row.status.rfind("error", 0) == 0) ++failures;
  std::printf("%zu points (%zu reused, %d failed) -> %s\n", rows.size(),
              rows.size() - missing.values.size(), failures, csv_path.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct CountsFile {
  CountsRecord record;
  double g2_noise = 2.0;
  std::optional<double> lifetime_ns;
  std::optional<double> bandwidth_mhz;
};

CountsFile parse_counts_file(std::istream& in) {
  CountsFile file;
  std::map<std::string, bool> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("counts file line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(value, &used);
    } catch (const std::exception&) {
      throw ConfigError("counts file line " + std::to_string(line_no) +
                        ": '" + value + "' is not a number");
    }
    if (used != value.size())
      throw ConfigError("counts file line " + std::to_string(line_no) +
                        ": trailing characters after number");
    const auto int_field = [&](std::int64_t& slot) {
      if (parsed < 0.0)
        throw ConfigError("counts file: " + key + " must be non-negative");
      if (parsed != std::floor(parsed))
        throw ConfigError("counts file: " + key + " must be an integer");
      slot = static_cast<std::int64_t>(parsed);
    };
    if (key == "n_herald")
      int_field(file.record.n_herald);
    else if (key == "n_ret")
      int_field(file.record.n_ret);
    else if (key == "n_noise_tot")
      int_field(file.record.n_noise_tot);
    else if (key == "n_noise_mem")
      int_field(file.record.n_noise_mem);
    else if (key == "eta_h")
      file.record.eta_h = parsed;
    else if (key == "eta_det")
      file.record.eta_det = parsed;
    else if (key == "g2_input")
      file.record.g2_input = parsed;
    else if (key == "g2_noise")
      file.g2_noise = parsed;
    else if (key == "lifetime_ns")
      file.lifetime_ns = parsed;
    else if (key == "bandwidth_mhz")
      file.bandwidth_mhz = parsed;
    else
      throw ConfigError("counts file line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    seen[key] = true;
  }
  std::string missing;
  for (const char* required : {"n_herald", "n_ret", "n_noise_tot",
                               "n_noise_mem", "eta_h", "eta_det", "g2_input"})
    if (!seen.count(required)) missing += std::string(missing.empty() ? "" : ", ") + required;
  if (!missing.empty())
    throw ConfigError("counts file: missing required fields: " + missing);
  return file;
}

int cmd_analyze(const std::string& counts_path, const std::string& out_dir,
                const std::string& command) {
  CountsFile file;
  {
    std::ifstream in(counts_path);
    if (!in) throw IoError("cannot open counts file: " + counts_path);
    file = parse_counts_file(in);
  }

  const Measured eta = e2e_efficiency(file.record);
  const Measured mu_mem =
      noise_floor(file.record.n_noise_mem, file.record.n_herald);
  const Measured mu_tot =
      noise_floor(file.record.n_noise_tot, file.record.n_herald);
  const Measured snr_value = snr(file.record);
  const Measured g2_model = g2_retrieved_model(file.record, file.g2_noise);
  const double g2_limit = g2_snr_limit(snr_value.value);

  std::printf("eta_e2e   = %.6f +- %.6f\n", eta.value, eta.sigma);
  std::printf("mu_mem    = %.4e +- %.2e\n", mu_mem.value, mu_mem.sigma);
  std::printf("mu_tot    = %.4e +- %.2e\n", mu_tot.value, mu_tot.sigma);
  std::printf("snr       = %.4f +- %.4f\n", snr_value.value, snr_value.sigma);
  std::printf("g2_model  = %.5f +- %.5f\n", g2_model.value, g2_model.sigma);
  std::printf("g2_limit  = %.5f   (2/(snr+1))\n", g2_limit);

  std::optional<TimeBandwidth> tb;
  if (file.lifetime_ns && file.bandwidth_mhz) {
    tb = time_bandwidth_product(*file.lifetime_ns, *file.bandwidth_mhz,
                                eta.value);
    std::printf("B         = %.1f   eta*B = %.3f\n", tb->b, tb->eta_b);
  }

  std::ostringstream csv;
  csv << "eta_e2e,eta_e2e_sigma,mu_mem,mu_mem_sigma,mu_tot,mu_tot_sigma,"
         "snr,snr_sigma,g2_model,g2_model_sigma,g2_limit,b\n";
  char row[400];
  std::snprintf(row, sizeof row,
                "%.8g,%.3g,%.8g,%.3g,%.8g,%.3g,%.8g,%.3g,%.8g,%.3g,%.8g,%s\n",
                eta.value, eta.sigma, mu_mem.value, mu_mem.sigma, mu_tot.value,
                mu_tot.sigma, snr_value.value, snr_value.sigma, g2_model.value,
                g2_model.sigma, g2_limit,
                tb ? std::to_string(tb->b).c_str() : "");
  csv << row;
  std::printf("%s", csv.str().c_str());

  if (!out_dir.empty()) {
    ManifestSession session;
    session.out_dir = out_dir;
    session.manifest.command = command;
    session.manifest.input_digests.emplace_back(counts_path,
                                                fnv1a64_hex_file(counts_path));
    session.manifest.output_files = {"analysis.csv"};
    ensure_out_dir(out_dir);
    session.begin();
    auto out = open_output(out_dir + "/analysis.csv");
    out << csv.str();
    finish_output(out, out_dir + "/analysis.csv");
    session.finish();
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// histogram

int cmd_histogram(const std::string& input_path, const std::string& format,
                  int trigger_ch, int signal_ch, std::int64_t bin_width_ps,
                  std::int64_t range_ps, std::int64_t window_start_ps,
                  std::int64_t window_width_ps, const std::string& out_dir,
                  const std::string& command) {
  const TagFormat tag_format = [&] {
    if (format == "text") return TagFormat::text_csv;
    if (format == "binary") return TagFormat::binary_le;
    throw ConfigError("unknown time-tag format '" + format +
                      "' (expected text or binary)");
  }();

  std::vector<TimeTagEvent> events;
  ParseReport report;
  {
    std::ifstream in(input_path, std::ios::binary);
    if (!in) throw IoError("cannot open time-tag file: " + input_path);
    try {
      events = parse_timetags(in, tag_format, &report);
    } catch (const std::runtime_error& e) {
      throw ConfigError(std::string("time-tag parse: ") + e.what());
    }
  }

  const Histogram hist = arrival_histogram(
      events, static_cast<std::uint16_t>(trigger_ch),
      static_cast<std::uint16_t>(signal_ch), bin_width_ps, range_ps);
  const std::int64_t in_window =
      window_counts(hist, window_start_ps, window_width_ps);

  ManifestSession session;
  session.out_dir = out_dir;
  session.manifest.command = command;
  session.manifest.input_digests.emplace_back(input_path,
                                              fnv1a64_hex_file(input_path));
  session.manifest.output_files = {"histogram.csv"};
  ensure_out_dir(out_dir);
  session.begin();
  {
    auto out = open_output(out_dir + "/histogram.csv");
    out << "bin_start_ps,count\n";
    char line[64];
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      std::snprintf(line, sizeof line, "%lld,%lld\n",
                    static_cast<long long>(
                        hist.origin_ps +
                        static_cast<std::int64_t>(i) * hist.bin_width_ps),
                    static_cast<long long>(hist.counts[i]));
      out << line;
    }
    finish_output(out, out_dir + "/histogram.csv");
  }
  session.finish();

  std::printf("%zu events (%zu malformed skipped), %lld pairs in range\n",
              events.size(), report.malformed,
              static_cast<long long>(hist.total()));
  std::printf("window [%lld, %lld) ps: %lld counts\n",
              static_cast<long long>(window_start_ps),
              static_cast<long long>(window_start_ps + window_width_ps),
              static_cast<long long>(in_window));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fit-lifetime

std::vector<LifetimePoint> parse_lifetime_csv(std::istream& in) {
  std::vector<LifetimePoint> points;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    LifetimePoint p;
    char extra = '\0';
    const int got = std::sscanf(line.c_str(), "%lf ,%lf ,%lf %c",
                                &p.storage_time_ns, &p.eta, &p.sigma, &extra);
    if (got == 3) {
      points.push_back(p);
    } else if (line_no == 1) {
      continue; // header row
    } else {
      throw ConfigError("lifetime CSV line " + std::to_string(line_no) +
                        ": expected 'storage_time_ns,eta,sigma'");
    }
  }
  return points;
}

int cmd_fit_lifetime(const std::string& input_path, const std::string& out_dir,
                     const std::string& command) {
  std::vector<LifetimePoint> points;
  {
    std::ifstream in(input_path);
    if (!in) throw IoError("cannot open lifetime CSV: " + input_path);
    points = parse_lifetime_csv(in);
  }
  const LifetimeFit fit = fit_lifetime(points);

  std::printf("eta0 = %.6g +- %.2g\n", fit.eta0.value, fit.eta0.sigma);
  if (fit.decays)
    std::printf("tau  = %.6g +- %.2g ns\n", fit.tau.value, fit.tau.sigma);
  else
    std::printf("tau  = no decay resolved\n");
  std::printf("%d iterations, %d points excluded\n", fit.iterations,
              fit.excluded);

  if (!out_dir.empty()) {
    ManifestSession session;
    session.out_dir = out_dir;
    session.manifest.command = command;
    session.manifest.input_digests.emplace_back(input_path,
                                                fnv1a64_hex_file(input_path));
    session.manifest.output_files = {"fit.csv"};
    ensure_out_dir(out_dir);
    session.begin();
    auto out = open_output(out_dir + "/fit.csv");
    out << "eta0,eta0_sigma,tau_ns,tau_sigma,decays,excluded,iterations\n";
    char row[240];
    std::snprintf(row, sizeof row, "%.10g,%.4g,%.10g,%.4g,%d,%d,%d\n",
                  fit.eta0.value, fit.eta0.sigma, fit.tau.value, fit.tau.sigma,
                  fit.decays ? 1 : 0, fit.excluded, fit.iterations);
    out << row;
    finish_output(out, out_dir + "/fit.csv");
    session.finish();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Warm-vapor lambda-memory simulator and counting analytics.\n"
      "Worker threads: set LAMBDAMEM_WORKERS (default: all cores)."};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string out_dir;

  auto add_config_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "configuration file (section.key = value lines)");
    sub->add_option("--set", sets,
                    "override, section.key=value (repeatable, last wins)");
  };

  CLI::App* sim = app.add_subcommand(
      "simulate", "run the storage protocol at one operating point");
  add_config_flags(sim);
  sim->add_option("--out", out_dir, "output directory")->required();

  std::string spec_path;
  bool resume = false;
  CLI::App* swp = app.add_subcommand(
      "sweep", "run a parameter sweep with per-point alignment");
  add_config_flags(swp);
  swp->add_option("--spec", spec_path, "sweep spec file")->required();
  swp->add_option("--out", out_dir, "output directory")->required();
  swp->add_flag("--resume", resume, "reuse completed rows from sweep.csv");

  std::string counts_path;
  CLI::App* ana = app.add_subcommand(
      "analyze", "counting statistics of a storage run (key = value file)");
  ana->add_option("--counts", counts_path, "counts record file")->required();
  ana->add_option("--out", out_dir, "output directory (optional)");

  std::string tags_path;
  std::string tag_format = "text";
  int trigger_ch = 0;
  int signal_ch = 1;
  std::int64_t bin_width_ps = 162;
  std::int64_t range_ps = 243000;
  std::int64_t window_start_ps = 0;
  std::int64_t window_width_ps = 6480;
  CLI::App* hist = app.add_subcommand(
      "histogram", "arrival-time histogram of raw detector time tags");
  hist->add_option("--input", tags_path, "time-tag file")->required();
  hist->add_option("--format", tag_format, "text | binary (default text)");
  hist->add_option("--trigger", trigger_ch, "trigger channel (default 0)");
  hist->add_option("--signal", signal_ch, "signal channel (default 1)");
  hist->add_option("--bin-width", bin_width_ps,
                   "bin width, ps (default 162; multiple of 81)");
  hist->add_option("--range", range_ps, "histogram range, ps (default 243000)");
  hist->add_option("--window-start", window_start_ps,
                   "retrieval window start, ps (default 0)");
  hist->add_option("--window-width", window_width_ps,
                   "retrieval window width, ps (default 6480)");
  hist->add_option("--out", out_dir, "output directory")->required();

  std::string lifetime_path;
  CLI::App* fit = app.add_subcommand(
      "fit-lifetime", "exponential fit of efficiency vs storage time");
  fit->add_option("--input", lifetime_path,
                  "CSV of storage_time_ns,eta,sigma rows")
      ->required();
  fit->add_option("--out", out_dir, "output directory (optional)");

  CLI::App* defs = app.add_subcommand(
      "print-defaults", "emit the default configuration as config text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  const std::string command =
      std::string(argv[0] ? fs::path(argv[0]).filename().string() : "") + " " +
      join_args(argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, sets, out_dir, command);
    if (swp->parsed())
      return cmd_sweep(config_path, sets, spec_path, out_dir, resume, command);
    if (ana->parsed()) return cmd_analyze(counts_path, out_dir, command);
    if (hist->parsed())
      return cmd_histogram(tags_path, tag_format, trigger_ch, signal_ch,
                           bin_width_ps, range_ps, window_start_ps,
                           window_width_ps, out_dir, command);
    if (fit->parsed()) return cmd_fit_lifetime(lifetime_path, out_dir, command);
    if (defs->parsed()) {
      std::fputs(to_config_text(default_experiment_config()).c_str(), stdout);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalInstabilityError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
