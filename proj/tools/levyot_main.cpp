// Command-line surface: distance reports, optimal coupling construction,
// certification, coupled-path simulation, and convergence diagnostics over
// the JSON schemas of the core library.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levyot/json_io.hpp"
#include "levyot/simulate.hpp"

namespace {

using namespace levyot;

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content << "\n";
  } else {
    write_file(out_path, content);
  }
}

std::vector<double> parse_time_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ValidationError("bad time list entry: " + item);
    }
  }
  if (out.empty()) throw ValidationError("empty time list");
  return out;
}

struct PairInput {
  InputKind kind = InputKind::Unknown;
  LevyTriplet ta, tb;
  DiscreteLevyMeasure ma, mb;
};

PairInput load_pair(const std::string& a_path, const std::string& b_path) {
  PairInput in;
  const InputKind ka = detect_file_kind(a_path);
  const InputKind kb = detect_file_kind(b_path);
  if (ka != kb) throw ValidationError("inputs --a and --b must both be triplets or both measures");
  in.kind = ka;
  if (ka == InputKind::Triplet) {
    in.ta = load_triplet(a_path);
    in.tb = load_triplet(b_path);
    if (in.ta.dim() != in.tb.dim()) throw ValidationError("triplet dimension mismatch");
  } else if (ka == InputKind::Measure) {
    in.ma = load_measure(a_path);
    in.mb = load_measure(b_path);
    if (in.ma.dim() != in.mb.dim()) throw ValidationError("measure dimension mismatch");
  } else {
    throw ValidationError("inputs must be triplet or measure JSON files");
  }
  return in;
}

LevyTriplet as_pure_jump(const DiscreteLevyMeasure& m) {
  return make_triplet(Vec::Zero(m.dim()), Mat::Zero(m.dim(), m.dim()), m);
}

int run_dist(const std::string& a_path, const std::string& b_path,
             const std::string& out_path) {
  const PairInput in = load_pair(a_path, b_path);
  if (in.kind == InputKind::Measure) {
    const double c = levy_ot_solve(in.ma, in.mb).cost;
    emit(out_path, "{\"jump_sq\":" + format_double(c) + "}");
  } else {
    emit(out_path, to_json(generator_distance(in.ta, in.tb)));
  }
  return 0;
}

int run_couple(const std::string& a_path, const std::string& b_path,
               const std::string& out_path) {
  const PairInput in = load_pair(a_path, b_path);
  if (in.kind == InputKind::Measure) {
    const TransportSolution sol = levy_ot_solve(in.ma, in.mb);
    emit(out_path, solution_to_json(sol, in.ma, in.mb));
  } else {
    emit(out_path, to_json(build_optimal_coupling(in.ta, in.tb)));
  }
  return 0;
}

int run_classical(const std::string& a_path, const std::string& b_path,
                  const std::string& out_path) {
  const DiscreteLevyMeasure ma = load_measure(a_path);
  const DiscreteLevyMeasure mb = load_measure(b_path);
  const TransportSolution sol = classical_ot_solve(ma, mb);
  emit(out_path, solution_to_json(sol, ma, mb));
  return 0;
}

struct Certificates {
  double gap = 0.0;
  bool gap_ok = false;
  bool monotone = false;
  double marginal_defect = 0.0;
  bool marginal_ok = false;
  bool psd_ok = true;
  bool diffusion_ok = true;
  bool all() const { return gap_ok && monotone && marginal_ok && psd_ok && diffusion_ok; }
  std::string json() const {
    std::string s = "{\"gap\":" + format_double(gap);
    s += ",\"gap_ok\":" + std::string(gap_ok ? "true" : "false");
    s += ",\"monotone\":" + std::string(monotone ? "true" : "false");
    s += ",\"marginal_defect\":" + format_double(marginal_defect);
    s += ",\"marginal_ok\":" + std::string(marginal_ok ? "true" : "false");
    s += ",\"psd_ok\":" + std::string(psd_ok ? "true" : "false");
    s += ",\"diffusion_ok\":" + std::string(diffusion_ok ? "true" : "false");
    s += ",\"pass\":" + std::string(all() ? "true" : "false") + "}";
    return s;
  }
};

Certificates certify_jump(const DiscreteLevyMeasure& mu, const DiscreteLevyMeasure& nu,
                          const LevyCoupling& plan, double cost, double gap,
                          double tol_gap) {
  Certificates c;
  c.gap = gap;
  c.gap_ok = std::abs(gap) <= tol_gap * (1.0 + std::abs(cost));
  c.monotone = check_cyclical_monotonicity(plan.atoms(), 4).pass;
  const MarginalCertificate mc = validate_coupling(plan, mu, nu);
  c.marginal_defect = mc.worst_defect;
  c.marginal_ok = mc.pass;
  return c;
}

int run_certify(const std::string& a_path, const std::string& b_path,
                const std::string& coupled_path, double tol_gap,
                const std::string& out_path) {
  if (!(tol_gap > 0.0)) throw ValidationError("--tol-gap must be > 0");
  const PairInput in = load_pair(a_path, b_path);
  const DiscreteLevyMeasure& mu = in.kind == InputKind::Measure ? in.ma : in.ta.jumps;
  const DiscreteLevyMeasure& nu = in.kind == InputKind::Measure ? in.mb : in.tb.jumps;

  Certificates cert;
  if (coupled_path.empty()) {
    const TransportSolution sol = levy_ot_solve(mu, nu);
    extract_duals(sol, mu, nu);
    cert = certify_jump(mu, nu, sol.plan, sol.cost, sol.duality_gap, tol_gap);
    if (in.kind == InputKind::Triplet) {
      const auto diff = optimal_cross_block(in.ta.diffusion, in.tb.diffusion);
      cert.psd_ok = is_psd(diff.joint);
      cert.diffusion_ok =
          std::abs(diff.cost - bures_wasserstein_sq(in.ta.diffusion, in.tb.diffusion)) <=
          tol::num * (1.0 + diff.cost);
    }
  } else {
    if (in.kind != InputKind::Triplet)
      throw ValidationError("--coupled requires triplet inputs");
    const CoupledTriplet j = load_coupled_triplet(coupled_path);
    const int d = in.ta.dim();
    if (j.dim() != d) throw ValidationError("coupled triplet dimension mismatch");
    const TransportSolution sol = levy_ot_solve(mu, nu);
    const double plan_cost = j.jumps.cost();
    cert = certify_jump(mu, nu, j.jumps, plan_cost, plan_cost - sol.cost, tol_gap);
    cert.psd_ok = is_psd(j.diffusion);
    const bool blocks_match =
        (j.diffusion.topLeftCorner(d, d) - in.ta.diffusion).cwiseAbs().maxCoeff() == 0.0 &&
        (j.diffusion.bottomRightCorner(d, d) - in.tb.diffusion).cwiseAbs().maxCoeff() == 0.0;
    const double bw = bures_wasserstein_sq(in.ta.diffusion, in.tb.diffusion);
    const double given_cost = 0.5 * (in.ta.diffusion.trace() + in.tb.diffusion.trace()) -
                              j.diffusion.topRightCorner(d, d).trace();
    cert.diffusion_ok = blocks_match && std::abs(given_cost - bw) <= tol::num * (1.0 + bw);
  }
  emit(out_path, cert.json());
  return cert.all() ? 0 : 1;
}

int run_simulate(const std::string& a_path, const std::string& b_path,
                 const std::string& t_csv, double T, int n_paths, int n_grid,
                 std::uint64_t seed, bool sup_mode, const std::string& path_csv,
                 const std::string& out_path) {
  const PairInput in = load_pair(a_path, b_path);
  const LevyTriplet ta = in.kind == InputKind::Triplet ? in.ta : as_pure_jump(in.ma);
  const LevyTriplet tb = in.kind == InputKind::Triplet ? in.tb : as_pure_jump(in.mb);
  const CoupledTriplet j = build_optimal_coupling(ta, tb);
  const GeneratorDistance g = generator_distance(ta, tb);
  const bool zero_mean = ta.drift.isZero(0.0) && tb.drift.isZero(0.0);
  const int d = ta.dim();
  const Vec origin = Vec::Zero(d);

  if (!path_csv.empty()) {
    const PathSample sample = simulate_path(j, Vec::Zero(2 * d), T, seed, n_grid);
    std::string csv = "t";
    for (int k = 0; k < 2 * d; ++k) csv += ",z" + std::to_string(k);
    csv += "\n";
    for (std::size_t i = 0; i < sample.times.size(); ++i) {
      csv += format_double(sample.times[i]);
      for (int k = 0; k < 2 * d; ++k) csv += "," + format_double(sample.states[i][k]);
      csv += "\n";
    }
    write_file(path_csv, csv);
  }

  std::vector<double> t_list = parse_time_list(t_csv);
  std::string csv = "t,estimate,std_error,predicted,bound\n";
  if (sup_mode) {
    for (double t : t_list) {
      const McEstimate est = estimate_sup_distance(j, t, n_paths, n_grid, seed);
      // Predicted column: exact terminal expectation E|X_t - Y_t|^2, a lower
      // anchor for the running sup.
      const double predicted = 2.0 * predicted_cost_growth(j, origin, origin, t);
      csv += format_double(t) + "," + format_double(est.mean) + "," +
             format_double(est.std_error) + "," + format_double(predicted) + "," +
             format_double(sup_distance_bound(t, g.total_sq, zero_mean)) + "\n";
    }
  } else {
    const auto ests = estimate_cost_growth(j, origin, origin, t_list, n_paths, seed);
    for (std::size_t q = 0; q < t_list.size(); ++q) {
      const double t = t_list[q];
      csv += format_double(t) + "," + format_double(ests[q].mean) + "," +
             format_double(ests[q].std_error) + "," +
             format_double(predicted_cost_growth(j, origin, origin, t)) + "," +
             format_double(sup_distance_bound(t, g.total_sq, zero_mean)) + "\n";
    }
  }
  emit(out_path, csv);
  return 0;
}

int run_converge(const std::string& target_path, const std::vector<std::string>& seq_paths,
                 const std::string& format, const std::string& out_path) {
  const DiscreteLevyMeasure target = load_measure(target_path);
  std::vector<DiscreteLevyMeasure> seq;
  seq.reserve(seq_paths.size());
  for (const auto& p : seq_paths) seq.push_back(load_measure(p));
  const ConvergenceReport rep = lambda_convergence_report(seq, target);

  std::string out;
  if (format == "csv") {
    out = "n,w_lambda,second_moment_gap,battery_defect\n";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      out += std::to_string(i + 1) + "," + format_double(r.w_lambda) + "," +
             format_double(r.second_moment_gap) + "," + format_double(r.battery_defect) +
             "\n";
    }
    out += std::string("# co_trending,") + (rep.co_trending ? "true" : "false") + "\n";
  } else {
    out = "{\"rows\":[";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      if (i) out += ',';
      const auto& r = rep.rows[i];
      out += "{\"w_lambda\":" + format_double(r.w_lambda) +
             ",\"second_moment_gap\":" + format_double(r.second_moment_gap) +
             ",\"battery_defect\":" + format_double(r.battery_defect) + "}";
    }
    out += std::string("],\"co_trending\":") + (rep.co_trending ? "true" : "false") + "}";
  }
  emit(out_path, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal Markovian couplings of Levy triplets: transport distances, "
               "coupling construction, certification and simulation"};
  app.require_subcommand(1);

  std::string a_path, b_path, out_path, coupled_path, target_path, path_csv;
  std::string t_csv = "0.25,1,4";
  std::string format = "json";
  std::vector<std::string> seq_paths;
  double T = 1.0;
  double tol_gap = levyot::tol::gap;
  int n_paths = 1000;
  int n_grid = 64;
  std::uint64_t seed = 1;
  bool sup_mode = false;

  auto add_pair = [&](CLI::App* cmd) {
    cmd->add_option("--a", a_path, "first input (triplet or measure JSON)")->required();
    cmd->add_option("--b", b_path, "second input")->required();
    cmd->add_option("--out", out_path, "output file (default stdout)");
  };

  auto* dist = app.add_subcommand("dist", "distance report between two inputs");
  add_pair(dist);

  auto* couple = app.add_subcommand("couple", "build the optimal coupling");
  add_pair(couple);

  auto* certify = app.add_subcommand("certify", "certify optimality and marginals");
  add_pair(certify);
  certify->add_option("--coupled", coupled_path, "coupled triplet JSON to validate");
  certify->add_option("--tol-gap", tol_gap, "duality gap tolerance (relative)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo growth/sup estimates (CSV)");
  add_pair(simulate);
  simulate->add_option("--t", t_csv, "comma-separated evaluation times");
  simulate->add_option("--T", T, "horizon for --path-csv export");
  simulate->add_option("--paths", n_paths, "number of Monte Carlo paths");
  simulate->add_option("--grid", n_grid, "uniform monitoring grid size");
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_flag("--sup", sup_mode, "estimate running sup instead of the growth curve");
  simulate->add_option("--path-csv", path_csv, "also export one path sample as CSV");

  auto* converge = app.add_subcommand("converge", "convergence diagnostics for a sequence");
  converge->add_option("--target", target_path, "target measure JSON")->required();
  converge->add_option("seq", seq_paths, "measure sequence JSON files")->required();
  converge->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  converge->add_option("--out", out_path, "output file (default stdout)");

  auto* classical = app.add_subcommand("classical", "classical equal-mass transport");
  add_pair(classical);

  CLI11_PARSE(app, argc, argv);

  try {
    if (dist->parsed()) return run_dist(a_path, b_path, out_path);
    if (couple->parsed()) return run_couple(a_path, b_path, out_path);
    if (certify->parsed())
      return run_certify(a_path, b_path, coupled_path, tol_gap, out_path);
    if (simulate->parsed())
      return run_simulate(a_path, b_path, t_csv, T, n_paths, n_grid, seed, sup_mode,
                          path_csv, out_path);
    if (converge->parsed()) return run_converge(target_path, seq_paths, format, out_path);
    if (classical->parsed()) return run_classical(a_path, b_path, out_path);
  } catch (const levyot::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const levyot::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
