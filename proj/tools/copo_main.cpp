#include "copo/benders.hpp"
#include "copo/envelope.hpp"
#include "copo/fixtures.hpp"
#include "copo/generator.hpp"
#include "copo/quadratic_dual.hpp"
#include "copo/serialization.hpp"
#include "copo/surface.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace copo;

Vector parse_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    vals.push_back(std::stod(item));
  }
  Vector v(static_cast<Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Index>(i)) = vals[i];
  return v;
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << content;
}

ordered_json certificate_to_json(const QuadraticCertificate& cert) {
  ordered_json doc;
  doc["nu"] = cert.nu;
  ordered_json lam = ordered_json::array();
  for (Index i = 0; i < cert.lambda.size(); ++i) lam.push_back(cert.lambda(i));
  doc["lambda"] = std::move(lam);
  ordered_json w = ordered_json::array();
  for (Index i = 0; i < cert.w.size(); ++i) w.push_back(cert.w(i));
  doc["w"] = std::move(w);
  ordered_json W = ordered_json::array();
  for (Index i = 0; i < cert.W.rows(); ++i)
    for (Index j = 0; j < cert.W.cols(); ++j) W.push_back(cert.W(i, j));
  doc["W"] = std::move(W);
  return doc;
}

// Block i of an instance as a lifted program with no inner variables: all
// coordinates are parameters, so quadratic duals underestimate
// x -> x'A_i x + indicator(F_i).
LiftedProgram block_lifted_program(const BlockQcqpInstance& inst, Index i) {
  Matrix Qhat = Matrix::Zero(inst.n + 1, inst.n + 1);
  Qhat.bottomRightCorner(inst.n, inst.n) = inst.blocks[i].A;
  return make_lifted_program(Qhat, {}, inst.blocks[i].F, inst.n);
}

const char* dual_status_name(DualStatusKind kind) {
  switch (kind) {
    case DualStatusKind::Value: return "value";
    case DualStatusKind::Unbounded: return "unbounded";
    case DualStatusKind::Infeasible: return "infeasible";
    default: return "failed";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Copositive-dual underestimators of block QCQP value functions"};
  app.require_subcommand(1);

  // ---- generate ----
  auto* gen = app.add_subcommand("generate", "Draw a random block instance");
  GeneratorConfig gen_cfg;
  std::string gen_out;
  gen->add_option("--S", gen_cfg.S, "number of blocks");
  gen->add_option("--n", gen_cfg.n, "block dimension");
  gen->add_option("--m", gen_cfg.m, "equality constraints per block");
  gen->add_option("--seed", gen_cfg.seed, "rng seed");
  gen->add_flag("--negate-blocks", gen_cfg.negate_blocks, "flip block matrices");
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "Run the Benders decomposition");
  std::string solve_instance, solve_out, solve_cuts_out, solve_format = "csv";
  BendersConfig bcfg;
  solve->add_option("--instance", solve_instance, "instance file")->required();
  solve->add_option("--epsilon", bcfg.epsilon, "subproblem regularisation");
  solve->add_option("--tol", bcfg.cop_tol, "copositivity tolerance");
  solve->add_option("--max-iter", bcfg.max_iters, "master iterations");
  solve->add_option("--stop-rel", bcfg.stop_rel, "relative stopping tolerance");
  solve->add_option("--jobs", bcfg.jobs, "parallel subproblem evaluations");
  solve->add_option("--time-limit", bcfg.time_limit_s, "wall clock limit in seconds");
  solve->add_option("--seed", bcfg.seed, "rng seed for engine seeding");
  solve->add_option("--out", solve_out, "report file (default stdout)");
  solve->add_option("--cuts-out", solve_cuts_out, "write pooled cuts to this file");
  solve->add_option("--format", solve_format, "report format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  // ---- envelope ----
  auto* env = app.add_subcommand("envelope", "Evaluate a block envelope at points");
  std::string env_instance;
  Index env_block = 0;
  std::vector<std::string> env_points;
  double env_eps = 0.05, env_tol = 1e-6;
  int env_max_iter = 200;
  env->add_option("--instance", env_instance, "instance file")->required();
  env->add_option("--block", env_block, "block index");
  env->add_option("--at", env_points, "point, comma separated (repeatable)")->required();
  env->add_option("--epsilon", env_eps, "regularisation weight");
  env->add_option("--tol", env_tol, "copositivity tolerance");
  env->add_option("--max-iter", env_max_iter, "cutting plane budget");

  // ---- quad-cut ----
  auto* qc = app.add_subcommand("quad-cut", "Extract a quadratic dual certificate");
  std::string qc_instance, qc_fixture, qc_out;
  Index qc_block = 0;
  double qc_B = 0.0, qc_C = 1.0, qc_tol = 1e-6;
  int qc_max_iter = 200;
  std::string qc_at, qc_x2;
  bool qc_convex = false;
  qc->add_option("--instance", qc_instance, "instance file (block mode)");
  qc->add_option("--block", qc_block, "block index (instance mode)");
  qc->add_option("--fixture", qc_fixture, "quad-1d or quad-2d")
      ->check(CLI::IsMember({"quad-1d", "quad-2d"}));
  qc->add_option("--B", qc_B, "quad-1d bilinear coefficient");
  qc->add_option("--C", qc_C, "quad-1d quadratic coefficient");
  qc->add_option("--at", qc_at, "evaluation point x")->required();
  qc->add_option("--x2", qc_x2, "curvature direction for the convex search");
  qc->add_flag("--convex", qc_convex, "search a convex certificate pinned to the envelope");
  qc->add_option("--tol", qc_tol, "copositivity tolerance");
  qc->add_option("--max-iter", qc_max_iter, "cutting plane budget");
  qc->add_option("--out", qc_out, "output file (default stdout)");

  // ---- surface ----
  auto* surf = app.add_subcommand("surface", "Sample phi and its underestimators on a grid");
  std::string surf_fixture = "quad-1d", surf_out, surf_qhat_at;
  double surf_b = -1.0, surf_B = 0.0, surf_C = 1.0;
  SurfaceOptions sopts;
  surf->add_option("--fixture", surf_fixture, "env-simplex, quad-1d, or quad-2d")
      ->check(CLI::IsMember({"env-simplex", "quad-1d", "quad-2d"}));
  surf->add_option("--b", surf_b, "env-simplex curvature");
  surf->add_option("--B", surf_B, "quad-1d bilinear coefficient");
  surf->add_option("--C", surf_C, "quad-1d quadratic coefficient");
  surf->add_option("--grid", sopts.grid, "points per axis");
  surf->add_option("--epsilon", sopts.epsilon, "envelope regularisation");
  surf->add_option("--tol", sopts.tol, "copositivity tolerance");
  surf->add_option("--max-iter", sopts.max_iter, "cutting plane budget");
  surf->add_option("--qhat-at", surf_qhat_at, "also emit a quadratic certificate built at x");
  surf->add_option("--out", surf_out, "output file (default stdout)");

  // ---- audit-cuts ----
  auto* audit = app.add_subcommand("audit-cuts", "Replay pooled cuts against block samples");
  std::string audit_instance, audit_cuts_file;
  int audit_samples = 200;
  double audit_tol = 1e-5;
  std::uint64_t audit_seed = 20250814;
  audit->add_option("--instance", audit_instance, "instance file")->required();
  audit->add_option("--cuts", audit_cuts_file, "cuts file from solve --cuts-out")->required();
  audit->add_option("--samples", audit_samples, "feasible samples per block");
  audit->add_option("--tol", audit_tol, "slack tolerance");
  audit->add_option("--seed", audit_seed, "sampling seed");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    const BlockQcqpInstance inst = generate_instance(gen_cfg);
    write_output(gen_out, serialize_instance(inst));
    return 0;
  }

  if (solve->parsed()) {
    const BlockQcqpInstance inst = load_instance(solve_instance);
    const BendersResult res = run_benders(inst, bcfg);
    write_output(solve_out, solve_format == "json" ? benders_report_json(res).dump(2) + "\n"
                                                   : benders_report_csv(res));
    if (!solve_cuts_out.empty())
      write_output(solve_cuts_out, cuts_to_json(inst, res.opt_cuts, res.feas_cuts).dump(2) + "\n");
    std::cerr << "converged=" << (res.converged ? "yes" : "no")
              << " LB=" << format_double(res.lower_bound)
              << " UB=" << format_double(res.upper_bound);
    if (!res.note.empty()) std::cerr << " note=" << res.note;
    std::cerr << "\n";
    return res.converged ? 0 : 2;
  }

  if (env->parsed()) {
    const BlockQcqpInstance inst = load_instance(env_instance);
    if (env_block < 0 || env_block >= inst.S) throw std::runtime_error("block index out of range");
    EnvelopeConfig ec;
    ec.tol = env_tol;
    ec.max_iter = env_max_iter;
    ec.witness = inst.blocks[env_block].witness;
    EnvelopeEngine engine(inst.blocks[env_block].A, inst.blocks[env_block].F, ec);
    std::ostringstream out;
    out << "x,value,status\n";
    bool ok = true;
    for (const std::string& text : env_points) {
      const Vector x = parse_point(text);
      if (x.size() != inst.n) throw std::runtime_error("point dimension mismatch: " + text);
      const EnvelopeOutcome res = engine.evaluate(x, env_eps);
      out << text << ',';
      if (res.kind == EnvelopeStatusKind::Value)
        out << format_double(res.value) << ",ok\n";
      else if (res.kind == EnvelopeStatusKind::UnboundedRay)
        out << "inf,unbounded\n";
      else {
        out << "na,failed\n";
        ok = false;
      }
    }
    std::cout << out.str();
    return ok ? 0 : 2;
  }

  if (qc->parsed()) {
    LiftedProgram lp;
    if (!qc_fixture.empty()) {
      lp = qc_fixture == "quad-1d" ? make_quad_1d(qc_B, qc_C) : make_quad_2d();
    } else if (!qc_instance.empty()) {
      const BlockQcqpInstance inst = load_instance(qc_instance);
      if (qc_block < 0 || qc_block >= inst.S)
        throw std::runtime_error("block index out of range");
      lp = block_lifted_program(inst, qc_block);
    } else {
      throw std::runtime_error("quad-cut needs --fixture or --instance");
    }
    const Vector x = parse_point(qc_at);
    if (x.size() != lp.n_x) throw std::runtime_error("point dimension mismatch");
    QuadraticDualOutcome out;
    ordered_json doc;
    if (qc_convex) {
      const AffineDualOutcome env_out = evaluate_lifted_envelope(lp, x, qc_tol, qc_max_iter);
      if (env_out.kind != DualStatusKind::Value)
        throw std::runtime_error(std::string("envelope evaluation at x1 ") +
                                 dual_status_name(env_out.kind));
      const Vector x2 = qc_x2.empty() ? Vector(2.0 * x) : parse_point(qc_x2);
      out = search_convex_quadratic(lp, x, env_out.value, x2, qc_tol, qc_max_iter);
      doc["pinned_value"] = env_out.value;
    } else {
      out = solve_quadratic_dual(lp, x, qc_tol, qc_max_iter);
    }
    doc["status"] = dual_status_name(out.kind);
    if (out.kind == DualStatusKind::Value) {
      doc["value"] = out.value;
      doc["certificate"] = certificate_to_json(out.cert);
    } else if (!out.note.empty()) {
      doc["note"] = out.note;
    }
    write_output(qc_out, doc.dump(2) + "\n");
    return out.kind == DualStatusKind::Value ? 0 : 2;
  }

  if (surf->parsed()) {
    SurfaceTable table;
    if (surf_fixture == "env-simplex") {
      table = sample_surface_env_simplex(make_env_simplex(surf_b), sopts);
    } else {
      std::optional<QuadraticCertificate> cert;
      if (!surf_qhat_at.empty()) {
        const LiftedProgram lp =
            surf_fixture == "quad-1d" ? make_quad_1d(surf_B, surf_C) : make_quad_2d();
        const Vector at = parse_point(surf_qhat_at);
        if (at.size() != lp.n_x) throw std::runtime_error("--qhat-at dimension mismatch");
        const QuadraticDualOutcome out = solve_quadratic_dual(lp, at, sopts.tol, sopts.max_iter);
        if (out.kind != DualStatusKind::Value)
          throw std::runtime_error(std::string("quadratic dual ") + dual_status_name(out.kind));
        cert = out.cert;
      }
      const QuadraticCertificate* cp = cert ? &*cert : nullptr;
      table = surf_fixture == "quad-1d" ? sample_surface_quad_1d(surf_B, surf_C, sopts, cp)
                                        : sample_surface_quad_2d(sopts, cp);
    }
    write_output(surf_out, surface_to_csv(table));
    return 0;
  }

  if (audit->parsed()) {
    const BlockQcqpInstance inst = load_instance(audit_instance);
    std::ifstream in(audit_cuts_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + audit_cuts_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto [opt_cuts, feas_cuts] = cuts_from_json(ordered_json::parse(ss.str()));
    const CutAudit res = audit_cuts(inst, opt_cuts, feas_cuts, audit_samples, audit_tol,
                                    audit_seed);
    std::cout << "checked=" << res.checked << " violations=" << res.violations
              << " worst_slack=" << format_double(res.worst_slack) << "\n";
    return res.violations == 0 ? 0 : 2;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
