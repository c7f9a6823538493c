#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <thread>

#include "nhmps/free_fermion.hpp"
#include "nhmps/nh_solver.hpp"
#include "record.hpp"

namespace nhmps::cli {

namespace {

// Fixed-size job pool. Jobs are independent and write into preallocated
// slots, so the output is identical for any thread count.
template <typename Job>
void run_jobs(std::size_t n_jobs, std::size_t threads, Job job) {
  threads = std::min(threads, n_jobs);
  if (threads <= 1) {
    for (std::size_t k = 0; k < n_jobs; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t k = next++; k < n_jobs; k = next++) job(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

nlohmann::json trace_json(const SolverReport& rep) {
  nlohmann::json j;
  for (const cplx& e : rep.epsilon_trace) {
    j["epsilon_re"].push_back(e.real());
    j["epsilon_im"].push_back(e.imag());
  }
  for (double a : rep.alpha_trace) j["alpha"].push_back(a);
  for (double eta : rep.eta_trace) j["eta"].push_back(eta);
  for (const cplx& e : rep.e_trace) {
    j["e_re"].push_back(e.real());
    j["e_im"].push_back(e.imag());
  }
  return j;
}

std::pair<Mps, SolverReport> run_solver(const RunConfig& cfg, const ModelSpec& model,
                                        const std::optional<cplx>& epsilon) {
  const Mpo h = build_nhssh(model);
  if (epsilon) return hvmps(h, *epsilon, cfg.solver);
  if (cfg.which == Which::SI) return solve_si_ground(h, cfg.solver);
  return gvmps(h, cfg.solver);
}

double safe_log10(double eta) {
  return std::log10(std::max(eta, 1e-300));
}

// Reference energy of the p-particle extremal state of the free model.
cplx free_reference_energy(const ModelSpec& model, std::size_t p, Which which) {
  SingleParticleSolution sol = solve_single_particle(model);
  if (which == Which::SR) return many_body_energy(sol, p);
  std::vector<cplx> by_im = sol.lambdas;
  std::stable_sort(by_im.begin(), by_im.end(), [](const cplx& a, const cplx& b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  cplx e = 0.0;
  for (std::size_t k = 0; k < p; ++k) e += by_im[k];
  return e;
}

int cmd_solve(const RunConfig& cfg, RunRecord& record) {
  auto [state, rep] = run_solver(cfg, cfg.model, cfg.epsilon);

  save_mps(state, join_path(cfg.output_dir, "state.mps"));

  EntropyProfile prof = entropy_profile(state);
  CsvWriter entropy(join_path(cfg.output_dir, "entropy.csv"), {"cut", "entropy"});
  for (std::size_t c = 0; c < prof.cut_entropies.size(); ++c)
    entropy.row({std::to_string(c + 1), CsvWriter::num(prof.cut_entropies[c])});

  nlohmann::json report;
  report["epsilon_re"] = rep.epsilon.real();
  report["epsilon_im"] = rep.epsilon.imag();
  report["eta"] = rep.eta;
  report["converged"] = rep.converged;
  report["degenerate"] = rep.degenerate;
  report["sweeps"] = rep.sweeps;
  report["max_entropy"] = prof.max_entropy;
  report["traces"] = trace_json(rep);
  write_text_file(join_path(cfg.output_dir, "report.json"), report.dump(2) + "\n");

  record.results() = {{"epsilon_re", rep.epsilon.real()},
                      {"epsilon_im", rep.epsilon.imag()},
                      {"eta", rep.eta},
                      {"converged", rep.converged},
                      {"sweeps", rep.sweeps}};
  return rep.converged ? 0 : 2;
}

int cmd_sweep(const RunConfig& cfg, RunRecord& record) {
  auto linspace = [](double lo, double hi, std::size_t steps) {
    std::vector<double> v(steps);
    for (std::size_t k = 0; k < steps; ++k)
      v[k] = steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (steps - 1);
    return v;
  };
  const std::vector<double> ts = linspace(cfg.t_min, cfg.t_max, cfg.t_steps);
  const std::vector<double> gs = linspace(cfg.gamma_min, cfg.gamma_max, cfg.gamma_steps);
  const std::size_t p = cfg.filling == 0 ? cfg.model.n_cells : cfg.filling;
  if (p == 0 || p > cfg.model.n_sites())
    throw ConfigError("config: sweep filling out of range");

  struct Point {
    double t, gamma, log10_eta, max_entropy;
    bool converged, failed;
  };
  std::vector<Point> grid(ts.size() * gs.size());

  run_jobs(grid.size(), cfg.threads, [&](std::size_t k) {
    ModelSpec ms = cfg.model;
    ms.t = ts[k / gs.size()];
    ms.gamma = gs[k % gs.size()];
    Point& pt = grid[k];
    pt.t = ms.t;
    pt.gamma = ms.gamma;
    try {
      const cplx eps = free_reference_energy(ms, p, cfg.which);
      auto [state, rep] = hvmps(build_nhssh(ms), eps, cfg.solver);
      pt.log10_eta = safe_log10(rep.eta);
      pt.max_entropy = entropy_profile(state).max_entropy;
      pt.converged = rep.converged;
      pt.failed = false;
    } catch (const std::exception&) {
      pt.log10_eta = std::nan("");
      pt.max_entropy = std::nan("");
      pt.converged = false;
      pt.failed = true;
    }
  });

  CsvWriter csv(join_path(cfg.output_dir, "phase_map.csv"),
                {"t", "gamma", "log10_eta", "max_entropy", "converged"});
  std::size_t n_conv = 0, n_failed = 0;
  for (const Point& pt : grid) {
    csv.row({CsvWriter::num(pt.t), CsvWriter::num(pt.gamma), CsvWriter::num(pt.log10_eta),
             CsvWriter::num(pt.max_entropy), pt.converged ? "1" : "0"});
    n_conv += pt.converged;
    n_failed += pt.failed;
  }
  record.results() = {{"points", grid.size()}, {"converged", n_conv}, {"failed", n_failed}};
  return 0;
}

int cmd_distributions(const RunConfig& cfg, RunRecord& record) {
  const SingleParticleSolution sol = solve_single_particle(cfg.model);

  struct Row {
    DistributionResult oracle;
    std::vector<double> n_mps;
    bool converged;
  };
  std::vector<Row> rows(cfg.p_list.size());

  run_jobs(rows.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t p = cfg.p_list[k];
    Row& row = rows[k];
    row.oracle = particle_distribution(sol, p);

    ModelSpec pinned = cfg.model;
    pinned.mu += pinning_mu(sol, p);
    auto [state, rep] = run_solver(cfg, pinned, std::nullopt);
    row.converged = rep.converged;
    const Tensor n_op = number_op();
    row.n_mps.resize(cfg.model.n_cells);
    for (std::size_t j = 0; j < cfg.model.n_cells; ++j)
      row.n_mps[j] = (single_site_expectation(state, 2 * j, n_op) +
                      single_site_expectation(state, 2 * j + 1, n_op))
                         .real();
  });

  CsvWriter csv(join_path(cfg.output_dir, "dist.csv"),
                {"p", "cell", "n_oracle", "n_mps", "abs_diff"});
  double worst = 0.0;
  bool all_conv = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t j = 0; j < cfg.model.n_cells; ++j) {
      const double diff = std::abs(rows[k].oracle.n_cell[j] - rows[k].n_mps[j]);
      worst = std::max(worst, diff);
      csv.row({std::to_string(cfg.p_list[k]), std::to_string(j + 1),
               CsvWriter::num(rows[k].oracle.n_cell[j]), CsvWriter::num(rows[k].n_mps[j]),
               CsvWriter::num(diff)});
    }
    all_conv = all_conv && rows[k].converged;
  }
  record.results() = {{"max_cell_diff", worst}, {"all_converged", all_conv}};
  return 0;
}

int cmd_entropy(const RunConfig& cfg, RunRecord& record) {
  struct Row {
    EntropyProfile prof;
    bool converged;
  };
  std::vector<Row> rows(cfg.d_list.size());

  run_jobs(rows.size(), cfg.threads, [&](std::size_t k) {
    RunConfig local = cfg;
    local.solver.bond_dim = cfg.d_list[k];
    auto [state, rep] = run_solver(local, cfg.model, std::nullopt);
    rows[k].prof = entropy_profile(state);
    rows[k].converged = rep.converged;
  });

  CsvWriter csv(join_path(cfg.output_dir, "entropy_vs_D.csv"),
                {"bond_dim", "cut", "entropy"});
  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t c = 0; c < rows[k].prof.cut_entropies.size(); ++c)
      csv.row({std::to_string(cfg.d_list[k]), std::to_string(c + 1),
               CsvWriter::num(rows[k].prof.cut_entropies[c])});
    summary.push_back({{"bond_dim", cfg.d_list[k]},
                       {"max_entropy", rows[k].prof.max_entropy},
                       {"converged", rows[k].converged}});
  }
  record.results() = {{"per_bond_dim", summary}};
  return 0;
}

int cmd_benchmark_ed(const RunConfig& cfg, RunRecord& record) {
  // One spectrum per interaction strength, shared across bond dimensions.
  std::vector<FockMatrix> fms;
  std::vector<EdSpectrum> spectra;
  for (double u : cfg.u_list) {
    ModelSpec ms = cfg.model;
    ms.u = u;
    fms.push_back(build_dense(ms));
    spectra.push_back(full_spectrum(fms.back()));
  }

  struct Row {
    CompareResult cmp;
    bool converged;
  };
  const std::size_t nd = cfg.d_list.size();
  std::vector<Row> rows(cfg.u_list.size() * nd);

  run_jobs(rows.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t iu = k / nd, id = k % nd;
    ModelSpec ms = cfg.model;
    ms.u = cfg.u_list[iu];
    RunConfig local = cfg;
    local.solver.bond_dim = cfg.d_list[id];
    auto [state, rep] = run_solver(local, ms, std::nullopt);
    rows[k].cmp = compare(state, fms[iu], spectra[iu], cfg.which);
    rows[k].converged = rep.converged;
  });

  CsvWriter csv(join_path(cfg.output_dir, "benchmark.csv"),
                {"u", "bond_dim", "delta_e", "infidelity", "converged"});
  for (std::size_t k = 0; k < rows.size(); ++k)
    csv.row({CsvWriter::num(cfg.u_list[k / nd]), std::to_string(cfg.d_list[k % nd]),
             CsvWriter::num(rows[k].cmp.delta_e), CsvWriter::num(rows[k].cmp.infidelity),
             rows[k].converged ? "1" : "0"});
  record.results() = {{"rows", rows.size()}};
  return 0;
}

int cmd_overlap_scaling(const RunConfig& cfg, RunRecord& record) {
  struct Row {
    double oracle = std::nan("");
    double mps = std::nan("");
    bool has_mps = false;
  };
  std::vector<Row> rows(cfg.n_list.size());

  run_jobs(rows.size(), cfg.threads, [&](std::size_t k) {
    ModelSpec ms = cfg.model;
    ms.n_cells = cfg.n_list[k];
    const std::size_t p = ms.n_cells;  // half filling
    SingleParticleSolution sol = solve_single_particle(ms);
    rows[k].oracle = biorthogonal_overlap(sol, p);
    if (ms.n_sites() <= 14) {
      const cplx eps = many_body_energy(sol, p);
      auto [state, rep] = hvmps(build_nhssh(ms), eps, cfg.solver);
      (void)rep;
      rows[k].mps = std::abs(overlap(state, apply_parity_reflection(state)));
      rows[k].has_mps = true;
    }
  });

  CsvWriter csv(join_path(cfg.output_dir, "overlap.csv"), {"n_cells", "o_lr", "method"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    csv.row({std::to_string(cfg.n_list[k]), CsvWriter::num(rows[k].oracle), "oracle"});
    if (rows[k].has_mps)
      csv.row({std::to_string(cfg.n_list[k]), CsvWriter::num(rows[k].mps), "mps"});
  }
  record.results() = {{"rows", rows.size()}};
  return 0;
}

}  // namespace

int run_command(const RunConfig& cfg, const ConfigEcho& echo) {
  ensure_output_dir(cfg.output_dir);
  RunRecord record(cfg, echo);
  int code = 0;
  try {
    if (cfg.command == "solve") code = cmd_solve(cfg, record);
    else if (cfg.command == "sweep") code = cmd_sweep(cfg, record);
    else if (cfg.command == "distributions") code = cmd_distributions(cfg, record);
    else if (cfg.command == "entropy") code = cmd_entropy(cfg, record);
    else if (cfg.command == "benchmark-ed") code = cmd_benchmark_ed(cfg, record);
    else if (cfg.command == "overlap-scaling") code = cmd_overlap_scaling(cfg, record);
    else throw ConfigError("unknown command: " + cfg.command);
  } catch (...) {
    // Still try to leave a record of the failed run behind.
    try {
      record.finalize(join_path(cfg.output_dir, "run_record.json"), 4);
    } catch (...) {
    }
    throw;
  }
  record.finalize(join_path(cfg.output_dir, "run_record.json"), code);
  return code;
}

}  // namespace nhmps::cli
