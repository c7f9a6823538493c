#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace nhmps::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used != v.size() || x < 0) throw std::invalid_argument("");
    return static_cast<std::size_t>(x);
  } catch (...) {
    throw ConfigError("config: bad integer value for '" + key + "': " + v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean value for '" + key + "': " + v);
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F item) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("config: empty list element in '" + key + "'");
    out.push_back(item(key, part));
  }
  if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
  return out;
}

Which parse_which(const std::string& key, const std::string& v) {
  if (v == "sr") return Which::SR;
  if (v == "si") return Which::SI;
  throw ConfigError("config: '" + key + "' must be sr or si, got: " + v);
}

const std::set<std::string> kCommands = {"solve",   "sweep",        "distributions",
                                         "entropy", "benchmark-ed", "overlap-scaling"};

}  // namespace

std::pair<RunConfig, ConfigEcho> parse_config_text(const std::string& text) {
  RunConfig cfg;
  ConfigEcho echo;
  std::string section;
  std::set<std::string> sections_seen;

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool epsilon_re_set = false, epsilon_im_set = false;
  double epsilon_re = 0.0, epsilon_im = 0.0;

  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      sections_seen.insert(section);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected 'key = value' at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value at line " + std::to_string(lineno));

    const std::string full = section.empty() ? key : section + "." + key;
    if (echo.count(full)) throw ConfigError("config: duplicate key '" + full + "'");
    echo[full] = value;

    if (section.empty()) {
      if (key == "command") {
        if (!kCommands.count(value)) throw ConfigError("config: unknown command: " + value);
        cfg.command = value;
      } else {
        throw ConfigError("config: unknown top-level key '" + key + "'");
      }
    } else if (section == "model") {
      if (key == "n_cells") cfg.model.n_cells = parse_size(full, value);
      else if (key == "t") cfg.model.t = parse_double(full, value);
      else if (key == "gamma") cfg.model.gamma = parse_double(full, value);
      else if (key == "u") cfg.model.u = parse_double(full, value);
      else if (key == "mu") cfg.model.mu = parse_double(full, value);
      else if (key == "boundary") {
        if (value == "obc") cfg.model.boundary = Boundary::OBC;
        else if (value == "pbc") cfg.model.boundary = Boundary::PBC;
        else throw ConfigError("config: boundary must be obc or pbc, got: " + value);
      } else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "solver") {
      if (key == "bond_dim") cfg.solver.bond_dim = parse_size(full, value);
      else if (key == "tol") cfg.solver.tol = parse_double(full, value);
      else if (key == "max_sweeps") cfg.solver.max_sweeps = parse_size(full, value);
      else if (key == "eig_tol") cfg.solver.eig_tol = parse_double(full, value);
      else if (key == "seed") cfg.solver.seed = parse_size(full, value);
      else if (key == "krylov_cap") cfg.solver.krylov_cap = parse_size(full, value);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "run") {
      if (key == "output_dir") cfg.output_dir = value;
      else if (key == "threads") cfg.threads = parse_size(full, value);
      else if (key == "verbose") cfg.verbose = parse_bool(full, value);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "solve") {
      if (key == "epsilon_re") { epsilon_re = parse_double(full, value); epsilon_re_set = true; }
      else if (key == "epsilon_im") { epsilon_im = parse_double(full, value); epsilon_im_set = true; }
      else if (key == "which") cfg.which = parse_which(full, value);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "sweep") {
      if (key == "t_min") cfg.t_min = parse_double(full, value);
      else if (key == "t_max") cfg.t_max = parse_double(full, value);
      else if (key == "t_steps") cfg.t_steps = parse_size(full, value);
      else if (key == "gamma_min") cfg.gamma_min = parse_double(full, value);
      else if (key == "gamma_max") cfg.gamma_max = parse_double(full, value);
      else if (key == "gamma_steps") cfg.gamma_steps = parse_size(full, value);
      else if (key == "which") cfg.which = parse_which(full, value);
      else if (key == "filling") {
        cfg.filling = value == "auto" ? 0 : parse_size(full, value);
      } else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "distributions") {
      if (key == "p_list") cfg.p_list = parse_list<std::size_t>(full, value, parse_size);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "entropy") {
      if (key == "d_list") cfg.d_list = parse_list<std::size_t>(full, value, parse_size);
      else if (key == "which") cfg.which = parse_which(full, value);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "benchmark-ed") {
      if (key == "u_list") cfg.u_list = parse_list<double>(full, value, parse_double);
      else if (key == "d_list") cfg.d_list = parse_list<std::size_t>(full, value, parse_size);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else if (section == "overlap-scaling") {
      if (key == "n_list") cfg.n_list = parse_list<std::size_t>(full, value, parse_size);
      else throw ConfigError("config: unknown key '" + full + "'");
    } else {
      throw ConfigError("config: unknown section '" + section + "'");
    }
  }

  if (cfg.command.empty()) throw ConfigError("config: missing 'command'");

  // Sections must belong to the chosen command; shared sections are always
  // allowed. This is what rejects e.g. a [solve] epsilon under command=sweep.
  for (const std::string& s : sections_seen) {
    if (s == "model" || s == "solver" || s == "run") continue;
    if (s != cfg.command)
      throw ConfigError("config: section [" + s + "] does not apply to command '" +
                        cfg.command + "'");
  }

  if (epsilon_re_set || epsilon_im_set) cfg.epsilon = cplx(epsilon_re, epsilon_im);

  // Structural validation.
  if (cfg.model.n_cells == 0) throw ConfigError("config: model.n_cells must be positive");
  if (cfg.solver.bond_dim == 0) throw ConfigError("config: solver.bond_dim must be positive");
  if (cfg.solver.max_sweeps == 0) throw ConfigError("config: solver.max_sweeps must be positive");
  if (!(cfg.solver.tol > 0.0) || !(cfg.solver.eig_tol > 0.0))
    throw ConfigError("config: solver tolerances must be positive");
  if (cfg.threads == 0) throw ConfigError("config: run.threads must be positive");

  const std::size_t n_sites = cfg.model.n_sites();
  if (cfg.command == "sweep") {
    if (cfg.t_steps == 0 || cfg.gamma_steps == 0)
      throw ConfigError("config: sweep needs t_min/t_max/t_steps and gamma_*");
    if (cfg.model.u != 0.0)
      throw ConfigError("config: sweep reference energies need a free model (u = 0)");
  }
  if (cfg.command == "distributions") {
    if (cfg.p_list.empty()) throw ConfigError("config: distributions needs p_list");
    for (std::size_t p : cfg.p_list)
      if (p == 0 || p >= n_sites)
        throw ConfigError("config: distributions fillings must lie in [1, n_sites - 1]");
    if (cfg.model.u != 0.0)
      throw ConfigError("config: distribution reference needs a free model (u = 0)");
  }
  if (cfg.command == "entropy" && cfg.d_list.empty())
    throw ConfigError("config: entropy needs d_list");
  if (cfg.command == "benchmark-ed") {
    if (cfg.u_list.empty() || cfg.d_list.empty())
      throw ConfigError("config: benchmark-ed needs u_list and d_list");
    if (n_sites > 14)
      throw ConfigError("config: benchmark-ed supports at most 7 cells (14 sites)");
  }
  if (cfg.command == "overlap-scaling") {
    if (cfg.n_list.empty()) throw ConfigError("config: overlap-scaling needs n_list");
    for (std::size_t nc : cfg.n_list)
      if (nc == 0 || nc > 64)
        throw ConfigError("config: overlap-scaling cell counts must lie in [1, 64]");
    if (cfg.model.u != 0.0)
      throw ConfigError("config: overlap-scaling reference needs a free model (u = 0)");
  }
  return {cfg, echo};
}

std::pair<RunConfig, ConfigEcho> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_overrides(RunConfig& cfg, ConfigEcho& echo, const CliOverrides& ov) {
  if (ov.output_dir) {
    cfg.output_dir = *ov.output_dir;
    echo["run.output_dir"] = *ov.output_dir;
  }
  if (ov.threads) {
    if (*ov.threads == 0) throw ConfigError("config: run.threads must be positive");
    cfg.threads = *ov.threads;
    echo["run.threads"] = std::to_string(*ov.threads);
  }
  if (ov.seed) {
    cfg.solver.seed = *ov.seed;
    echo["solver.seed"] = std::to_string(*ov.seed);
  }
  if (ov.verbose) {
    cfg.verbose = true;
    echo["run.verbose"] = "true";
  }
}

}  // namespace nhmps::cli
