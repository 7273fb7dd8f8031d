// rssim: command-line front end. `run` simulates one cycle and writes the
// CSV/JSON results; `convergence` compares runs across grids or between the
// two stepping variants and emits a small CSV table.
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "rs/config.hpp"
#include "rs/output.hpp"
#include "rs/simulator.hpp"

namespace {

using namespace rs;

Variant variant_from(const std::string& s) {
  return s == "unsplit" ? Variant::kUnsplit : Variant::kSplit;
}

unsigned worker_count(size_t jobs) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError("RS_THREADS must be a positive integer");
    }
    workers = static_cast<unsigned>(v);
  }
  return std::min<size_t>(workers, jobs);
}

// Run every job, fanning out across worker threads; results keep job order.
std::vector<RunRecord> run_all(const Scenario& sc,
                               const std::vector<RunOptions>& jobs) {
  std::vector<RunRecord> results(jobs.size());
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mx;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = run_scenario(sc, jobs[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mx);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const unsigned workers = worker_count(jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

// Aggregate a fine-grid snapshot onto a coarser grid (integer refinement
// ratio) by exact mass: stored values absorb the wetted fraction, so plain
// volume-weighted child sums are conservative across the surface cell too.
Snapshot project_to_coarse(const Snapshot& fine, const Grid& gf,
                           const Grid& gc) {
  const int r = gf.n() / gc.n();
  Snapshot out;
  out.t = fine.t;
  out.zbar = fine.zbar;
  out.C.assign(static_cast<size_t>(gc.n() + 2) * kNumSolids, 0.0);
  out.S.assign(static_cast<size_t>(gc.n() + 2) * kNumSolubles, 0.0);
  for (int j = 1; j <= gc.n(); ++j) {
    const double inv_vol = 1.0 / (gc.A_cell(j) * gc.h());
    for (int c = 0; c < r; ++c) {
      const int jf = (j - 1) * r + c + 1;
      const double w = gf.A_cell(jf) * gf.h() * inv_vol;
      for (int k = 0; k < kNumSolids; ++k) {
        out.C[static_cast<size_t>(j) * kNumSolids + k] +=
            w * fine.C[static_cast<size_t>(jf) * kNumSolids + k];
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        out.S[static_cast<size_t>(j) * kNumSolubles + k] +=
            w * fine.S[static_cast<size_t>(jf) * kNumSolubles + k];
      }
    }
  }
  return out;
}

const Snapshot& snapshot_near(const RunRecord& rec, double t, double tol) {
  const Snapshot* best = nullptr;
  double best_dt = std::numeric_limits<double>::infinity();
  for (const Snapshot& sn : rec.snapshots) {
    const double dt = std::abs(sn.t - t);
    if (dt < best_dt) {
      best_dt = dt;
      best = &sn;
    }
  }
  if (best == nullptr || best_dt > tol) {
    throw ConfigError("convergence: no snapshot near the requested time");
  }
  return *best;
}

double max_stage_tau(const RunRecord& rec) {
  double m = 0.0;
  for (const StageReport& rep : rec.stages) m = std::max(m, rep.tau);
  return m;
}

void append_num(std::string& out, double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  out.append(buf, res.ptr);
}

int cmd_run(const std::string& cfg_path, const std::string& out_dir,
            int cells, const std::string& scheme_name, double snap_every,
            double tau) {
  const Scenario sc = load_scenario(cfg_path);
  RunOptions opt;
  opt.variant = variant_from(scheme_name);
  opt.cells_override = cells;
  opt.snapshot_override = snap_every;
  opt.tau_override = tau;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw ConfigError("output: cannot create directory " + out_dir + ": " +
                      ec.message());
  }

  const RunRecord rec = run_scenario(sc, opt);
  write_run_outputs(out_dir, sc, rec);

  long steps = 0;
  for (const StageReport& rep : rec.stages) steps += rep.steps;
  std::cout << "scenario " << rec.scenario << ": " << rec.cells
            << " cells, variant " << to_string(rec.variant) << ", base step "
            << rec.tau_used << " s (limited by " << rec.cfl.dominant << "), "
            << steps << " steps, " << rec.snapshots.size() << " snapshots\n"
            << "mass closure (worst component): "
            << rec.audit.worst_closure << " relative\n"
            << "wrote " << out_dir << "/profiles.csv, boundary_series.csv, "
            << "audit.json in " << rec.wall_seconds << " s\n";
  return 0;
}

int cmd_convergence(const std::string& cfg_path, const std::string& out_path,
                    std::vector<int> cells_list, double at_time,
                    const std::string& mode, const std::string& scheme_name,
                    double tau) {
  const Scenario sc = load_scenario(cfg_path);
  if (cells_list.empty()) throw ConfigError("convergence: no cell counts");
  for (size_t i = 0; i < cells_list.size(); ++i) {
    if (cells_list[i] < 3) {
      throw ConfigError("convergence: need at least 3 cells");
    }
    if (i > 0 && cells_list[i] <= cells_list[i - 1]) {
      throw ConfigError("convergence: cell counts must be increasing");
    }
  }
  const bool self_mode = mode == "self";
  if (self_mode && cells_list.size() < 2) {
    throw ConfigError("convergence: self mode needs at least two cell counts");
  }
  if (self_mode) {
    for (size_t i = 0; i + 1 < cells_list.size(); ++i) {
      if (cells_list[i + 1] % cells_list[i] != 0) {
        throw ConfigError(
            "convergence: self mode needs integer refinement ratios");
      }
    }
  }
  if (at_time < 0.0 || at_time > sc.total_time() + 1e-9) {
    throw ConfigError("convergence: time outside the simulated cycle");
  }

  std::vector<RunOptions> jobs;
  for (int n : cells_list) {
    RunOptions opt;
    opt.cells_override = n;
    opt.snapshot_override = 0.0;  // stage boundaries only, plus the probe
    opt.extra_snapshot_times = {at_time};
    opt.tau_override = tau;
    if (self_mode) {
      opt.variant = variant_from(scheme_name);
      jobs.push_back(opt);
    } else {
      opt.variant = Variant::kSplit;
      jobs.push_back(opt);
      opt.variant = Variant::kUnsplit;
      jobs.push_back(opt);
    }
  }
  const std::vector<RunRecord> runs = run_all(sc, jobs);

  std::vector<std::pair<int, double>> table;
  std::vector<std::string> warnings;
  if (!self_mode) {
    for (size_t i = 0; i < cells_list.size(); ++i) {
      const RunRecord& split_run = runs[2 * i];
      const RunRecord& unsplit_run = runs[2 * i + 1];
      const double tol =
          1e-6 + 1.01 * std::max(max_stage_tau(split_run),
                                 max_stage_tau(unsplit_run));
      table.emplace_back(
          cells_list[i],
          relative_difference(unsplit_run, split_run, at_time, &warnings,
                              tol));
    }
  } else {
    for (size_t i = 0; i + 1 < cells_list.size(); ++i) {
      const RunRecord& coarse = runs[i];
      const RunRecord& fine = runs[i + 1];
      const Grid gc(sc.area, sc.depth, coarse.cells);
      const Grid gf(sc.area, sc.depth, fine.cells);
      const double tol =
          1e-6 + 1.01 * std::max(max_stage_tau(coarse), max_stage_tau(fine));
      const Snapshot& sc_coarse = snapshot_near(coarse, at_time, tol);
      const Snapshot projected =
          project_to_coarse(snapshot_near(fine, at_time, tol), gf, gc);
      table.emplace_back(
          cells_list[i],
          l1_relative_difference(sc_coarse, projected, coarse.cells,
                                 &warnings));
    }
  }

  std::string csv = "N,value,ratio_to_previous\n";
  for (size_t i = 0; i < table.size(); ++i) {
    csv += std::to_string(table[i].first);
    csv += ',';
    append_num(csv, table[i].second);
    csv += ',';
    if (i > 0 && table[i].second > 0.0) {
      append_num(csv, table[i - 1].second / table[i].second);
    }
    csv += '\n';
  }

  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()),
                 warnings.end());
  for (const std::string& w : warnings) std::cerr << "note: " << w << '\n';

  if (out_path == "-") {
    std::cout << csv;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ConfigError("output: cannot open " + out_path);
    f << csv;
    if (!f) throw ConfigError("output: failed writing " + out_path);
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-dimensional reactive-settling SBR simulator"};
  app.require_subcommand(1);

  std::string run_cfg, run_out;
  int run_cells = 0;
  std::string run_scheme = "split";
  double run_snap = -1.0, run_tau = 0.0;
  CLI::App* run = app.add_subcommand(
      "run", "simulate one cycle; writes profiles.csv, boundary_series.csv "
             "and audit.json");
  run->add_option("--config", run_cfg, "scenario file (JSON)")->required();
  run->add_option("--out", run_out, "output directory (created if missing)")
      ->required();
  run->add_option("--cells", run_cells, "override the configured cell count");
  run->add_option("--scheme", run_scheme, "stepping variant")
      ->check(CLI::IsMember({"split", "unsplit"}));
  run->add_option("--snapshot-every", run_snap,
                  "snapshot cadence in simulated seconds "
                  "(0 = stage boundaries only)");
  run->add_option("--tau", run_tau,
                  "override the time step [s]; stability is then the "
                  "caller's responsibility");

  std::string conv_cfg, conv_out = "-", conv_mode = "split-vs-unsplit",
              conv_scheme = "split";
  std::vector<int> conv_cells;
  double conv_at = -1.0, conv_tau = 0.0;
  CLI::App* conv = app.add_subcommand(
      "convergence",
      "compare runs across cell counts; emits CSV (N, value, ratio)");
  conv->add_option("--config", conv_cfg, "scenario file (JSON)")->required();
  conv->add_option("--cells", conv_cells, "cell counts, e.g. 25,50,100")
      ->required()
      ->delimiter(',');
  conv->add_option("--at", conv_at, "comparison time [s]")->required();
  conv->add_option("--mode", conv_mode,
                   "split-vs-unsplit: stepping-variant difference per N; "
                   "self: successive-refinement difference")
      ->check(CLI::IsMember({"split-vs-unsplit", "self"}));
  conv->add_option("--out", conv_out, "output CSV path (default: stdout)");
  conv->add_option("--scheme", conv_scheme, "variant used in self mode")
      ->check(CLI::IsMember({"split", "unsplit"}));
  conv->add_option("--tau", conv_tau, "override the time step [s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(run_cfg, run_out, run_cells, run_scheme, run_snap,
                     run_tau);
    }
    return cmd_convergence(conv_cfg, conv_out, conv_cells, conv_at, conv_mode,
                           conv_scheme, conv_tau);
  } catch (const rs::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rs::RuntimeAbort& e) {
    std::cerr << "abort: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
