#include "jwdiscord/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "jwdiscord/experiments.hpp"
#include "jwdiscord/oracle.hpp"

#ifndef JWD_VERSION
#define JWD_VERSION "0.0.0"
#endif

namespace jwd::cli {

const char* const kVersion = JWD_VERSION;

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kExperiments{"spectrum", "discord-matrix", "sweep-b", "sweep-noise", "verify"};

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

json parameters_json(const RunConfig& c) {
  return json{{"experiment", c.experiment},
              {"n", c.chain.n_sites},
              {"d", c.chain.coupling},
              {"omega0", c.chain.omega0},
              {"j0", c.j0},
              {"b_j0", c.b_j0},
              {"state", c.state},
              {"b", c.b},
              {"b_max", c.b_max},
              {"points", c.points},
              {"eps", c.eps},
              {"n_real", c.n_real},
              {"order", c.orders},
              {"seed", c.seed},
              {"t", c.t}};
}

void build_app(CLI::App& app, RunConfig& c) {
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Flat key = value file keyed by long flag names; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("experiment", c.experiment, "spectrum | discord-matrix | sweep-b | sweep-noise | verify")
      ->required()
      ->check(CLI::IsMember(kExperiments));
  app.add_option("--n", c.chain.n_sites, "Number of chain nodes")->capture_default_str();
  app.add_option("--d", c.chain.coupling, "Coupling constant D")->capture_default_str();
  app.add_option("--omega0", c.chain.omega0, "Larmor frequency")->capture_default_str();
  app.add_option("--j0", c.j0, "Initially polarized node, 1-based (default: middle node)");
  app.add_option("--b-j0", c.b_j0, "Polarization parameter of node j0")->capture_default_str();
  app.add_option("--state", c.state, "discord-matrix state: three-node | noise")
      ->check(CLI::IsMember({"three-node", "noise"}))
      ->capture_default_str();
  app.add_option("--b", c.b, "Parasitic polarization of the neighbours of j0")->capture_default_str();
  app.add_option("--b-max", c.b_max, "Upper end of the b sweep")->capture_default_str();
  app.add_option("--points", c.points, "Number of b sweep points")->capture_default_str();
  app.add_option("--eps", c.eps, "Noise amplitudes, comma separated")->delimiter(',')->capture_default_str();
  app.add_option("--n-real", c.n_real, "Noise realizations per amplitude")->capture_default_str();
  app.add_option("--order", c.orders, "Noise expansion orders (1, 2), comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Noise seed")->capture_default_str();
  app.add_option("--t", c.t, "Evaluation time for discord-matrix")->capture_default_str();
  app.add_option("--out", c.out, "Output path (default: $JWD_OUT_DIR/<experiment>.<format>, else stdout)");
  app.add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

using Cell = std::variant<long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string render_csv(const Table& table, const std::string& header) {
  std::ostringstream os;
  os << header << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              os << format_double(v);
            else
              os << v;
          },
          row[i]);
    }
    os << '\n';
  }
  return os.str();
}

json render_json(const Table& table, const RunConfig& c, const std::string& hash) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) std::visit([&](const auto& v) { obj[table.columns[i]] = v; }, row[i]);
    rows.push_back(std::move(obj));
  }
  return json{{"tool", "jwdiscord"}, {"version", kVersion},     {"config_hash", hash},
              {"seed", c.seed},      {"columns", table.columns}, {"rows", std::move(rows)}};
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << content;
    f.close();
    if (!f) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

void log_line(std::ostream& log, const json& j) { log << j.dump() << std::endl; }

struct Outcome {
  Table table;
  json results = json::object();
  int status = 0;
};

Outcome run_spectrum(const RunConfig& c, const SpectralPtr& spec) {
  (void)c;
  Outcome o;
  o.table.columns = {"n", "k", "energy"};
  for (int n = 0; n < spec->size(); ++n)
    o.table.rows.push_back({static_cast<long long>(n + 1), spec->wavenumber(n), spec->energy(n)});
  return o;
}

Outcome run_discord_matrix(const RunConfig& c, const SpectralPtr& spec, const RunOptions& opts) {
  Outcome o;
  DiscordMatrix qm;
  if (c.state == "noise") {
    qm = averaged_noise_matrix(spec, Site{c.j0}, c.b_j0, c.eps.front(), c.n_real, c.seed, c.orders.front(), opts);
  } else {
    qm = discord_matrix(parasitic_state(spec, Site{c.j0}, c.b_j0, c.b), opts);
  }
  o.table.columns = {"n", "m", "Q"};
  for (int a = 1; a <= qm.size(); ++a)
    for (int b = 1; b <= qm.size(); ++b)
      o.table.rows.push_back({static_cast<long long>(a), static_cast<long long>(b), qm.at(Mode{a}, Mode{b})});
  if (auto cl = predict_cluster(spec->size(), Site{c.j0})) {
    const SpreadStats s = spread_stats(qm, *cl);
    o.results = {{"cluster", cl->members}, {"rule", to_string(cl->rule)}, {"cl_max", s.cl_max},
                 {"cl_min", s.cl_min},     {"z_max", s.z_max},              {"z_min", s.z_min}};
  }
  return o;
}

Outcome run_sweep_b(const RunConfig& c, const SpectralPtr& spec, const RunOptions& opts, std::ostream& log) {
  Outcome o;
  const auto rows = sweep_b(spec, Site{c.j0}, c.b_j0, c.b_max, c.points, opts);
  o.table.columns = {"b", "cl_max", "cl_min", "z_max", "z_min"};
  std::vector<double> xs, fs;
  for (const auto& r : rows) {
    o.table.rows.push_back({r.param, r.stats.cl_max, r.stats.cl_min, r.stats.z_max, r.stats.z_min});
    xs.push_back(r.param);
    fs.push_back(r.stats.cl_min - r.stats.z_max);
  }
  const ClusterSpec cl = *predict_cluster(spec->size(), Site{c.j0});
  auto f = [&](double b) {
    const SpreadStats s = spread_stats(discord_matrix(parasitic_state(spec, Site{c.j0}, c.b_j0, b), opts), cl);
    return s.cl_min - s.z_max;
  };
  if (rows.size() >= 2) {
    try {
      const CriticalPoint cp = refine_first_root(f, xs, fs);
      o.results = {{"b_cl", cp.root}, {"crossings", cp.crossings}};
      if (cp.crossings > 1)
        log_line(log, {{"warning", "cl_min - z_max changes sign " + std::to_string(cp.crossings) +
                                       " times; reporting the smallest root"}});
      log_line(log, {{"b_cl", cp.root}});
    } catch (const std::runtime_error& e) {
      o.results = {{"b_cl", nullptr}, {"crossings", 0}};
      log_line(log, {{"warning", e.what()}});
    }
  }
  return o;
}

Outcome run_sweep_noise(const RunConfig& c, const SpectralPtr& spec, const RunOptions& opts) {
  Outcome o;
  o.table.columns = {"epsilon", "order", "cl_max", "cl_min", "z_max", "z_min", "n_realizations"};
  for (int order : c.orders) {
    for (const auto& r : noise_sweep(spec, Site{c.j0}, c.b_j0, c.eps, c.n_real, c.seed, order, opts))
      o.table.rows.push_back({r.param, static_cast<long long>(*r.order), r.stats.cl_max, r.stats.cl_min, r.stats.z_max,
                              r.stats.z_min, static_cast<long long>(r.n_realizations)});
  }
  return o;
}

Outcome run_verify(const RunConfig& c, const SpectralPtr& spec) {
  Outcome o;
  o.table.columns = {"check", "value", "tolerance", "status"};
  int failed = 0;
  for (const auto& r : oracle::run_self_checks(spec, c.seed)) {
    o.table.rows.push_back({r.name, r.value, r.tolerance, std::string(r.passed() ? "pass" : "fail")});
    if (!r.passed()) ++failed;
  }
  o.results = {{"failed", failed}, {"checks", o.table.rows.size()}};
  o.status = failed ? 1 : 0;
  return o;
}

}  // namespace

void RunConfig::resolve() {
  if (j0 == 0) j0 = (chain.n_sites + 1) / 2;
}

void RunConfig::validate() const {
  require(std::find(kExperiments.begin(), kExperiments.end(), experiment) != kExperiments.end(),
          "unknown experiment '" + experiment + "'");
  chain.validate();
  const int n = chain.n_sites;
  require(j0 >= 1 && j0 <= n, "j0 must lie in 1..N");
  require(std::isfinite(b_j0) && std::isfinite(b) && std::isfinite(t), "parameters must be finite");
  require(threads >= 0, "threads must be >= 0");
  require(format == "csv" || format == "json", "format must be csv or json");
  require(state == "three-node" || state == "noise", "state must be three-node or noise");
  require(!orders.empty(), "at least one order is required");
  for (int o : orders) require(o == 1 || o == 2, "order must be 1 or 2");
  for (double e : eps) require(std::isfinite(e) && e >= 0.0, "noise amplitudes must be >= 0");
  require(n_real >= 1, "n-real must be >= 1");

  if (experiment == "discord-matrix" && state == "three-node")
    require(j0 > 1 && j0 < n, "three-node state needs 1 < j0 < N");
  if (experiment == "discord-matrix" && state == "noise")
    require(eps.size() == 1 && orders.size() == 1, "noise discord-matrix needs exactly one --eps and one --order");
  if (experiment == "sweep-b") {
    require(points >= 1, "points must be >= 1");
    require(std::isfinite(b_max) && b_max > 0.0, "b-max must be > 0");
    require(j0 > 1 && j0 < n, "three-node state needs 1 < j0 < N");
  }
  if (experiment == "sweep-noise") require(!eps.empty(), "sweep-noise needs at least one --eps value");
  if (experiment == "sweep-b" || experiment == "sweep-noise")
    require(predict_cluster(n, Site{j0}).has_value(),
            "no known cluster for N=" + std::to_string(n) + ", j0=" + std::to_string(j0));
  if (experiment == "verify")
    require(n <= oracle::kMaxSites, "verify runs the exact oracle and needs N <= " + std::to_string(oracle::kMaxSites));
}

std::string config_hash(const RunConfig& config) {
  const std::string canonical = parameters_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"jwdiscord"};
  build_app(app, c);
  app.parse(argc, argv);
  c.resolve();
  c.validate();
  return c;
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& log) {
  RunConfig c = config;
  c.resolve();
  c.validate();
  const SpectralPtr spec = build_spectral(c.chain);
  RunOptions opts;
  opts.threads = c.threads == 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : c.threads;
  opts.t = c.t;

  Outcome o;
  if (c.experiment == "spectrum") o = run_spectrum(c, spec);
  else if (c.experiment == "discord-matrix") o = run_discord_matrix(c, spec, opts);
  else if (c.experiment == "sweep-b") o = run_sweep_b(c, spec, opts, log);
  else if (c.experiment == "sweep-noise") o = run_sweep_noise(c, spec, opts);
  else o = run_verify(c, spec);
  const std::string hash = config_hash(c);
  const std::string body = c.format == "csv"
                               ? render_csv(o.table, std::string("# jwdiscord ") + kVersion + " config_hash=" + hash +
                                                         " seed=" + std::to_string(c.seed))
                               : render_json(o.table, c, hash).dump(2) + "\n";

  fs::path path = c.out;
  if (path.empty()) {
    if (const char* dir = std::getenv("JWD_OUT_DIR"); dir && *dir) path = fs::path(dir) / (c.experiment + "." + c.format);
  }
  if (path.empty()) {
    out << body;
    return o.status;
  }
  json meta{{"tool", "jwdiscord"},
            {"version", kVersion},
            {"config_hash", hash},
            {"seed", c.seed},
            {"config", parameters_json(c)},
            {"output", {{"format", c.format}, {"threads", c.threads}}},
            {"results", o.results}};
  fs::path meta_path = path;
  meta_path += ".meta.json";
  write_atomic(path, body);
  write_atomic(meta_path, meta.dump(2) + "\n");
  log_line(log, {{"wrote", path.string()}});
  return o.status;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"jwdiscord: stationary pairwise discord of Jordan-Wigner fermions in an open XY chain"};
  build_app(app, c);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }
  try {
    c.resolve();
    c.validate();
  } catch (const std::invalid_argument& e) {
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << std::endl;
    return 2;
  }
  try {
    if (execute(c, out, err) != 0) {
      err << json{{"error", "check-failed"}, {"message", c.experiment + " reported failing checks"}}.dump() << std::endl;
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << json{{"error", "runtime"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
}

}  // namespace jwd::cli
