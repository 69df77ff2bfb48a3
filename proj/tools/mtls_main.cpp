// mtls: command-line front end for the MTLS solver, condition numbers,
// perturbation trials, and the canned experiment tables.
//
// Exit codes: 0 success; 2 rank/genericity precondition failed; 3 the system
// is consistent (zero residual, condition numbers degenerate); 4 bad input
// (files, shapes, size caps, usage); 1 unexpected failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtls/mtls.hpp"

namespace {

struct ProblemArgs {
  std::string matrix_path;
  std::string rhs_path;
  mtls::Index n1 = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("-A,--matrix", matrix_path,
                    "Data matrix file (MatrixMarket or CSV)")
        ->required();
    cmd->add_option("-b,--rhs", rhs_path, "Right-hand side file (one value per line)")
        ->required();
    cmd->add_option("--n1", n1, "Number of leading exact columns (default 0: TLS)")
        ->check(CLI::NonNegativeNumber);
  }

  mtls::MtlsProblem load() const {
    mtls::MtlsProblem prob;
    prob.a = mtls::read_matrix_file(matrix_path);
    prob.b = mtls::read_vector_file(rhs_path);
    prob.n1 = n1;
    prob.validate();
    return prob;
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw mtls::IoError("cannot write " + out_path);
  os << text;
  if (!text.empty() && text.back() != '\n') os << "\n";
}

std::string solution_text(const mtls::MtlsSolution& sol) {
  std::ostringstream os;
  os.precision(17);
  os << "m " << sol.m() << "  n " << sol.n() << "  n1 " << sol.n1() << "\n";
  os << "x:";
  for (mtls::Index i = 0; i < sol.x.size(); ++i) os << " " << sol.x(i) + 0.0;
  os << "\nsigma " << std::sqrt(sol.sigma2) << "\nresidual_norm " << sol.r.norm()
     << "\ngap " << sol.gap << "\n";
  return os.str();
}

std::string condition_text(const mtls::ConditionReport& rep,
                           const std::optional<mtls::StructuredReport>& srep) {
  std::ostringstream os;
  os.precision(10);
  os << "kappa_rel " << rep.kappa_rel << "\nkappa_abs " << rep.kappa_abs << "\n";
  for (const auto& [key, value] : rep.variants)
    os << "  " << key << " " << value << "\n";
  os << "kappa_a " << rep.kappa_a << "  kappa_b " << rep.kappa_b << "\n";
  os << "mixed_upper " << rep.mixed_upper << "\ncompw_upper " << rep.compw_upper;
  if (rep.compw_infinite) os << " (some components infinite)";
  os << "\n";
  if (rep.mixed) os << "mixed " << *rep.mixed << "\ncompw " << *rep.compw << "\n";
  if (srep) {
    os << "kappa_s " << srep->kappa_s << "\nmixed_s " << srep->mixed_s
       << "\ncompw_s " << srep->compw_s;
    if (srep->compw_infinite) os << " (some components infinite)";
    os << "\n";
  }
  return os.str();
}

std::string trial_text(const mtls::TrialRecord& rec) {
  std::ostringstream os;
  os.precision(10);
  if (rec.skipped) {
    os << "skipped: " << rec.skip_reason << "\n";
    return os.str();
  }
  os << "epsilon " << rec.epsilon << "\neps1 " << rec.eps1 << "\neps2 " << rec.eps2;
  if (rec.eps1_s) os << "\neps1_s " << *rec.eps1_s << "\neps2_s " << *rec.eps2_s;
  os << "\ndx_rel_2 " << rec.dx_rel_2 << "\ndx_rel_inf " << rec.dx_rel_inf
     << "\ndx_compw " << rec.dx_compw;
  if (rec.dx_compw_infinite) os << " (some components infinite)";
  os << "\n";
  for (const auto& [key, value] : rec.bounds) os << key << " " << value << "\n";
  os << "bounds_ok " << (rec.bounds_ok ? "yes" : "no") << "\n";
  return os.str();
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Mixed LS-TLS solver, condition numbers and experiments"};
  app.require_subcommand(1);

  std::string format = "text";
  std::string out_path;
  app.add_option("--format", format, "Output format: text or json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--out", out_path, "Write output to a file instead of stdout");

  auto* solve_cmd = app.add_subcommand("solve", "Solve one MTLS problem");
  solve_cmd->fallthrough();
  ProblemArgs solve_args;
  solve_args.attach(solve_cmd);

  auto* cond_cmd = app.add_subcommand("cond", "Condition numbers and bounds");
  cond_cmd->fallthrough();
  ProblemArgs cond_args;
  cond_args.attach(cond_cmd);
  bool full_k = false;
  std::string cond_structure;
  cond_cmd->add_flag("--full-k", full_k,
                     "Also build the explicit first-order map (dense cap applies)");
  cond_cmd->add_option("--structure", cond_structure,
                       "Structure basis file; adds structured condition numbers");

  auto* perturb_cmd =
      app.add_subcommand("perturb", "One perturbation trial with bounds");
  perturb_cmd->fallthrough();
  ProblemArgs perturb_args;
  perturb_args.attach(perturb_cmd);
  double eps = 1e-8;
  std::uint64_t seed = 1;
  std::vector<mtls::Index> mask_cols;
  std::string perturb_structure;
  perturb_cmd->add_option("--eps", eps, "Perturbation scale (default 1e-8)");
  perturb_cmd->add_option("--seed", seed, "Random seed (default 1)");
  perturb_cmd->add_option("--mask-cols", mask_cols,
                          "Columns of A to keep exact (0-based)");
  perturb_cmd->add_option("--structure", perturb_structure,
                          "Structure basis file; draw respects the structure");

  auto* exp_cmd = app.add_subcommand("experiment", "Run a canned table");
  exp_cmd->fallthrough();
  std::string table_name;
  std::uint64_t exp_seed = 20250819;
  exp_cmd->add_option("--table", table_name,
                      "first_order | normwise | componentwise | structured")
      ->required()
      ->check(CLI::IsMember({"first_order", "normwise", "componentwise",
                             "structured", "1", "2", "3", "4"}));
  exp_cmd->add_option("--seed", exp_seed, "Random seed");

  auto* oracle_cmd = app.add_subcommand(
      "oracle", "Cross-check the first-order map against finite differences");
  auto* fd_cmd = oracle_cmd->add_subcommand("fd", "Central finite differences");
  oracle_cmd->fallthrough();
  fd_cmd->fallthrough();
  ProblemArgs fd_args;
  fd_args.attach(fd_cmd);
  double fd_h = 1e-6;
  fd_cmd->add_option("--step", fd_h, "Relative step (default 1e-6)");
  oracle_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;  // help is fine; anything else is a usage error
  }

  if (*solve_cmd) {
    const mtls::MtlsSolution sol = mtls::solve(solve_args.load());
    emit(format == "json" ? mtls::solution_json(sol).dump(2) : solution_text(sol),
         out_path);
    return 0;
  }

  if (*cond_cmd) {
    const mtls::MtlsSolution sol = mtls::solve(cond_args.load());
    const mtls::ConditionReport rep = mtls::condition_report(sol, full_k);
    std::optional<mtls::StructuredReport> srep;
    if (!cond_structure.empty()) {
      mtls::StructureBasis basis = mtls::read_basis_file(cond_structure);
      basis.alpha = mtls::project_alpha(basis, sol.problem.a);
      srep = mtls::structured_condition_numbers(sol, basis);
    }
    if (format == "json") {
      mtls::Json j = mtls::condition_json(rep);
      if (srep) j["structured"] = mtls::structured_json(*srep);
      emit(j.dump(2), out_path);
    } else {
      emit(condition_text(rep, srep), out_path);
    }
    return 0;
  }

  if (*perturb_cmd) {
    const mtls::MtlsProblem prob = perturb_args.load();
    mtls::TrialRecord rec;
    if (!perturb_structure.empty()) {
      mtls::StructureBasis basis = mtls::read_basis_file(perturb_structure);
      basis.alpha = mtls::project_alpha(basis, prob.a);
      rec = mtls::run_bound_trial(prob, eps, seed, {}, &basis);
    } else {
      rec = mtls::run_bound_trial(prob, eps, seed, mask_cols);
    }
    // A degenerate draw is a real result for experiment runs, but for a
    // single requested trial it is a failed precondition: map it back.
    if (rec.skip_kind == mtls::SkipKind::kConsistent)
      throw mtls::ConsistentSystem(rec.skip_reason);
    if (rec.skipped) throw mtls::NonGeneric(rec.skip_reason);
    emit(format == "json" ? mtls::trial_json(rec).dump(2) : trial_text(rec),
         out_path);
    return 0;
  }

  if (*exp_cmd) {
    mtls::TableReport table;
    if (table_name == "first_order" || table_name == "1")
      table = mtls::table1(exp_seed);
    else if (table_name == "normwise" || table_name == "2")
      table = mtls::table2(exp_seed);
    else if (table_name == "componentwise" || table_name == "3")
      table = mtls::table3(exp_seed);
    else
      table = mtls::table4(exp_seed);
    emit(format == "json" ? mtls::table_json(table).dump(2)
                          : mtls::render_table_text(table),
         out_path);
    return 0;
  }

  // oracle fd
  const mtls::MtlsProblem prob = fd_args.load();
  const mtls::MtlsSolution sol = mtls::solve(prob);
  const mtls::JacobianMatrix jac = mtls::jacobian(sol);
  const mtls::Matrix fd = mtls::finite_difference_jacobian(prob, fd_h);
  const double dev = (jac.k - fd).norm() / std::max(1.0, jac.k.norm());
  std::ostringstream os;
  os.precision(10);
  os << "fd_rel_deviation " << dev << "\n";
  if (format == "json") {
    mtls::Json j{{"fd_rel_deviation", mtls::json_num(dev)}, {"h", fd_h}};
    emit(j.dump(2), out_path);
  } else {
    emit(os.str(), out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const mtls::ConsistentSystem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mtls::RankDeficient& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mtls::NonGeneric& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mtls::SizeOverflow& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const mtls::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const mtls::DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
