// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: generate, precondition, solve, lsir, experiment, bounds.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "sketchir/harness.hpp"

using namespace sketchir;

namespace
{

// Every flag has a config key; values given on the command line win.
struct Settings
{
  std::string us = "double";
  std::string uqr;  // empty: same as u
  std::string u = "double";
  std::string ur;  // empty: u^2
  std::string ua;  // empty: u
  std::string ul;
  std::string uxr;
  std::uint64_t seed = 1;
  std::string sketch = "gaussian";
  std::string convention = "paper";
  double s_factor = 4.0;
  int zeta = 8;
  bool scale = false;

  std::size_t m = 1000;
  std::size_t n = 100;
  double kappa = 1e2;
  std::string a_path;
  std::string b_path;

  double lsqr_factor = 2.0;
  std::optional<double> tol;
  int fgmres_max = 50;
  int escalated_max = 80;
  int lsir_max = 30;
  bool no_escalate = false;

  int seeds = 1;
  int jobs = 1;
  std::string out;
};

struct Binding
{
  CLI::Option *opt;
  std::function<void(const std::string &)> set;
  std::vector<std::string> keys;
};

class Cli
{
public:
  Cli() : app_("Mixed-precision sketch-and-precondition least-squares solver")
  {
    app_.require_subcommand(1);
    app_.fallthrough();
    app_.add_option("--config", config_, "TOML-style config file applied before flags");
    bind_string("--us", s_.us, "Sketch precision", {"precision.us", "us"});
    bind_string("--uqr", s_.uqr, "QR precision (default: u)", {"precision.uqr", "uqr"});
    bind_string("--u", s_.u, "Working precision", {"precision.u", "u"});
    bind_string("--ur", s_.ur, "Residual precision (default: u^2)", {"precision.ur", "ur"});
    bind_string("--ua", s_.ua, "FGMRES operator precision", {"fgmres.precisions.a", "ua"});
    bind_string("--ul", s_.ul, "FGMRES left preconditioner precision",
                {"fgmres.precisions.l", "ul"});
    bind_string("--uxr", s_.uxr, "FGMRES right preconditioner precision",
                {"fgmres.precisions.r", "uxr"});
    bind_value("--seed", s_.seed, "Random seed", {"sketch.seed", "problem.seed", "seed"});
    bind_string("--sketch", s_.sketch, "gaussian | sparse | identity", {"sketch.kind", "sketch"});
    bind_string("--convention", s_.convention, "Gaussian scaling: paper | theory",
                {"sketch.convention"});
    bind_value("--s-factor", s_.s_factor, "Sketch rows per column of A",
               {"sketch.s_factor", "s_factor"});
    bind_value("--zeta", s_.zeta, "Nonzeros per column of a sparse sign sketch",
               {"sketch.zeta", "zeta"});
    bind_flag("--scale", s_.scale, "Scale columns before sketching", {"sketch.scale", "scale"});
    bind_value("--m", s_.m, "Rows of the generated problem", {"problem.m", "m"});
    bind_value("--n", s_.n, "Columns of the generated problem", {"problem.n", "n"});
    bind_value("--kappa", s_.kappa, "Condition number of the generated problem",
               {"problem.kappa", "kappa"});
    bind_string("--a", s_.a_path, "Matrix Market file for A", {"problem.a", "a"});
    bind_string("--b", s_.b_path, "Right-hand side file", {"problem.b", "b"});
    bind_value("--lsqr-factor", s_.lsqr_factor, "LSQR iteration limit as a multiple of n",
               {"lsqr.max_factor", "lsqr_factor"});
    bind_value("--tol", s_.tol, "LSQR and FGMRES tolerance", {"lsqr.tol", "fgmres.tol", "tol"});
    bind_value("--fgmres-max", s_.fgmres_max, "FGMRES iteration limit",
               {"fgmres.max_iters", "fgmres_max"});
    bind_value("--escalated-max", s_.escalated_max, "FGMRES limit after escalation",
               {"fgmres.escalated_max_iters", "escalated_max"});
    bind_value("--lsir-max", s_.lsir_max, "Refinement step limit", {"lsir.max_iters", "lsir_max"});
    bind_flag("--no-escalate", s_.no_escalate, "Never raise FGMRES internal precisions",
              {"lsir.no_escalate", "no_escalate"});
    bind_value("--seeds", s_.seeds, "Number of seeds (seed, seed+1, ...)",
               {"experiment.seeds", "seeds"});
    bind_value("--jobs", s_.jobs, "Worker threads", {"experiment.jobs", "jobs"});
    bind_string("--out", s_.out, "Output path", {"output.path", "out"});

    gen_ = app_.add_subcommand("generate", "Write a randsvd problem as Matrix Market files");
    gen_->add_option("--out-a", out_a_, "Path for A")->required();
    gen_->add_option("--out-b", out_b_, "Path for b")->required();
    pre_ = app_.add_subcommand("precondition", "Build the sketched preconditioner");
    solve_ = app_.add_subcommand("solve", "Sketch-and-solve followed by preconditioned LSQR");
    lsir_ = app_.add_subcommand("lsir", "Full iterative refinement");
    lsir_->add_flag("--trace", trace_, "Print per-step errors");
    exp_ = app_.add_subcommand("experiment", "Run a built-in experiment");
    exp_->add_option("name", exp_name_, "Experiment name")
        ->required()
        ->check(CLI::IsMember(builtin_spec_names()));
    bounds_ = app_.add_subcommand("bounds", "Evaluate preconditioner bounds");
    bounds_->add_flag("--json", json_, "Print JSON instead of CSV");
  }

  int run(int argc, char **argv)
  {
    try
    {
      app_.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
      return app_.exit(e);
    }
    if (!config_.empty())
    {
      apply_config(load_config(config_));
    }
    if (gen_->parsed())
    {
      return generate();
    }
    if (exp_->parsed())
    {
      return experiment();
    }
    const ProblemInstance prob = problem();
    if (pre_->parsed())
    {
      return precondition(prob);
    }
    if (solve_->parsed())
    {
      return solve(prob);
    }
    if (lsir_->parsed())
    {
      return lsir(prob);
    }
    return bounds(prob);
  }

private:
  void bind_string(const std::string &flag, std::string &target, const std::string &help,
                   std::vector<std::string> keys)
  {
    CLI::Option *o = app_.add_option(flag, target, help);
    bindings_.push_back({o, [&target](const std::string &v) { target = v; }, std::move(keys)});
  }

  template <class T>
  void bind_value(const std::string &flag, T &target, const std::string &help,
                  std::vector<std::string> keys)
  {
    CLI::Option *o = app_.add_option(flag, target, help);
    bindings_.push_back({o,
                         [&target, flag](const std::string &v) {
                           using V = std::remove_cvref_t<decltype(target)>;
                           if constexpr (std::is_same_v<V, std::optional<double>>)
                           {
                             target = parse_number(v);
                           }
                           else
                           {
                             if (!CLI::detail::lexical_cast(v, target))
                             {
                               throw Error(ErrorCode::ParseError,
                                           "config value '" + v + "' is invalid for " + flag);
                             }
                           }
                         },
                         std::move(keys)});
  }

  void bind_flag(const std::string &flag, bool &target, const std::string &help,
                 std::vector<std::string> keys)
  {
    CLI::Option *o = app_.add_flag(flag, target, help);
    bindings_.push_back({o,
                         [&target](const std::string &v) {
                           target = v == "true" || v == "1" || v == "yes" || v == "on";
                         },
                         std::move(keys)});
  }

  void apply_config(const std::map<std::string, std::string> &cfg)
  {
    for (const auto &[key, value] : cfg)
    {
      bool known = false;
      for (const auto &b : bindings_)
      {
        if (std::find(b.keys.begin(), b.keys.end(), key) == b.keys.end())
        {
          continue;
        }
        known = true;
        if (b.opt->count() == 0)
        {
          b.set(value);
        }
      }
      if (!known)
      {
        throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
      }
    }
  }

  Format u() const { return parse_format(s_.u); }
  Format u_s() const { return parse_format(s_.us); }
  Format u_qr() const { return s_.uqr.empty() ? u() : parse_format(s_.uqr); }

  ProblemInstance problem() const
  {
    if (!s_.a_path.empty() || !s_.b_path.empty())
    {
      if (s_.a_path.empty() || s_.b_path.empty())
      {
        throw Error(ErrorCode::InvalidArgument, "--a and --b must be given together");
      }
      return load_problem(s_.a_path, s_.b_path);
    }
    return make_problem(s_.m, s_.n, s_.kappa, s_.seed);
  }

  std::shared_ptr<const SketchOperator> sketch(std::size_t m, std::size_t n) const
  {
    const SketchKind kind = parse_sketch_kind(s_.sketch);
    const auto s = static_cast<std::size_t>(std::llround(s_.s_factor * static_cast<double>(n)));
    switch (kind)
    {
      case SketchKind::Identity:
        return std::make_shared<SketchOperator>(make_identity(m));
      case SketchKind::SparseSign:
        return std::make_shared<SketchOperator>(make_sparse_sign(s, m, s_.zeta, s_.seed));
      case SketchKind::Gaussian:
        break;
    }
    return std::make_shared<SketchOperator>(
        make_gaussian(s, m, s_.seed, parse_convention(s_.convention), n));
  }

  std::ostream &out()
  {
    if (s_.out.empty())
    {
      return std::cout;
    }
    file_.open(s_.out);
    if (!file_)
    {
      throw Error(ErrorCode::IoError, "cannot open '" + s_.out + "' for writing");
    }
    return file_;
  }

  ExperimentSpec spec_from_flags(ExperimentSpec spec) const
  {
    auto given = [this](const std::string &flag) { return app_.get_option(flag)->count() > 0; };
    auto opt_format = [](const std::string &v) -> std::optional<Format> {
      return v.empty() ? std::nullopt : std::optional<Format>(parse_format(v));
    };
    if (given("--us"))
    {
      spec.u_s_list = {u_s()};
    }
    if (given("--u"))
    {
      spec.u = u();
    }
    if (!s_.uqr.empty())
    {
      spec.u_qr = u_qr();
    }
    spec.u_r = opt_format(s_.ur);
    spec.u_a = opt_format(s_.ua);
    spec.u_l = opt_format(s_.ul);
    spec.u_rp = opt_format(s_.uxr);
    if (given("--sketch"))
    {
      spec.sketch.kind = parse_sketch_kind(s_.sketch);
    }
    spec.sketch.convention = parse_convention(s_.convention);
    spec.sketch.s_factor = s_.s_factor;
    spec.sketch.zeta = s_.zeta;
    spec.scale = spec.scale || s_.scale;
    if (given("--m"))
    {
      spec.m = s_.m;
    }
    if (given("--n"))
    {
      spec.n = s_.n;
    }
    if (given("--kappa"))
    {
      spec.kappa_list = {s_.kappa};
    }
    spec.lsqr_factor = s_.lsqr_factor;
    spec.fgmres_max = s_.fgmres_max;
    if (given("--escalated-max"))
    {
      spec.escalated_fgmres_max = s_.escalated_max;
    }
    spec.lsir_max = s_.lsir_max;
    spec.escalate = !s_.no_escalate;
    spec.seeds.clear();
    for (int k = 0; k < s_.seeds; ++k)
    {
      spec.seeds.push_back(s_.seed + static_cast<std::uint64_t>(k));
    }
    spec.jobs = s_.jobs;
    spec.output = s_.out;
    return spec;
  }

  LSIRConfig lsir_config(std::size_t n) const
  {
    LSIRConfig cfg = default_lsir_config(u(), n);
    if (!s_.ur.empty())
    {
      cfg.u_r = parse_format(s_.ur);
    }
    cfg.fgmres.u_a = s_.ua.empty() ? u() : parse_format(s_.ua);
    cfg.fgmres.u_l = s_.ul.empty() ? u() : parse_format(s_.ul);
    cfg.fgmres.u_r = s_.uxr.empty() ? u() : parse_format(s_.uxr);
    cfg.fgmres.max_iters = s_.fgmres_max;
    cfg.escalated_max_iters = s_.escalated_max;
    cfg.escalate_on_stall = !s_.no_escalate;
    cfg.max_refinement_iters = s_.lsir_max;
    cfg.lsqr_max_iters = static_cast<int>(std::llround(s_.lsqr_factor * static_cast<double>(n)));
    if (s_.tol)
    {
      cfg.lsqr_tol = *s_.tol;
      cfg.fgmres.tol = *s_.tol;
    }
    return cfg;
  }

  int generate()
  {
    const ProblemInstance p = make_problem(s_.m, s_.n, s_.kappa, s_.seed);
    save_matrix_market(p.A, out_a_);
    const DenseMatrix b(p.b.size(), 1, p.b, Format::Double);
    save_matrix_market(b, out_b_);
    return 0;
  }

  int precondition(const ProblemInstance &prob)
  {
    const PreconditionerBundle bundle =
        build_preconditioner(prob.A, sketch(prob.A.rows(), prob.A.cols()), u_s(), u_qr(), s_.scale);
    if (!s_.out.empty())
    {
      save_matrix_market(bundle.effective_r(), s_.out);
    }
    const SingularValues sv =
        svd_values(right_tri_solve(prob.A, bundle.effective_r(), Format::Quad));
    CsvTable t;
    t.header = {"u_s", "u_qr", "scaled", "norm_arhat", "pinv_arhat", "cond_arhat"};
    t.rows.push_back({std::string(to_string(u_s())), std::string(to_string(u_qr())),
                      s_.scale ? "1" : "0", format_number(sv.max()),
                      format_number(sv.pinv_norm()), format_number(sv.cond())});
    write_csv(std::cout, t);
    return 0;
  }

  int solve(const ProblemInstance &prob)
  {
    const Format w = u();
    const DenseMatrix A = round_matrix(prob.A, w, nullptr, true);
    const Vector b = round_vector(prob.b, w);
    const ReferenceSolution ref = reference_solution(A, b, false);
    const PreconditionerBundle bundle =
        build_preconditioner(A, sketch(A.rows(), A.cols()), u_s(), u_qr(), s_.scale);
    const Vector xs = sketch_and_solve_init(bundle, b, w);
    KrylovConfig kc;
    kc.u = w;
    kc.tol = s_.tol.value_or(default_lsir_config(w, A.cols()).lsqr_tol);
    kc.max_iters = static_cast<int>(std::llround(s_.lsqr_factor * static_cast<double>(A.cols())));
    const LsqrResult ls = lsqr_right_precond(A, b, bundle, xs, kc);
    const Vector r = sub(b, matvec(A, ls.x, w), w);
    CsvTable t;
    t.header = {"u_s", "u_qr", "u", "lsqr_iters", "termination", "init_fe_x", "fe_x", "fe_r"};
    t.rows.push_back({std::string(to_string(u_s())), std::string(to_string(u_qr())),
                      std::string(to_string(w)), std::to_string(ls.trace.iterations),
                      std::string(to_string(ls.trace.termination)),
                      format_number(relative_error(xs, ref.x_star)),
                      format_number(relative_error(ls.x, ref.x_star)),
                      format_number(relative_error(r, ref.r_star))});
    write_csv(out(), t);
    return 0;
  }

  int lsir(const ProblemInstance &prob)
  {
    const Format w = u();
    const DenseMatrix A = round_matrix(prob.A, w, nullptr, true);
    const Vector b = round_vector(prob.b, w);
    const ReferenceSolution ref = reference_solution(A, b, false);
    const LSIRConfig cfg = lsir_config(A.cols());
    const LSIRTrace tr = lsir_run(A, b, sketch(A.rows(), A.cols()), u_s(), u_qr(), cfg, ref,
                                  prob.meta.kappa_target, s_.scale);
    std::ostream &os = out();
    if (trace_)
    {
      CsvTable t;
      t.header = {"step", "fe_x", "fe_r", "fgmres_iters", "escalated", "termination"};
      for (const auto &s : tr.steps)
      {
        t.rows.push_back({std::to_string(s.step), format_number(s.fe_x), format_number(s.fe_r),
                          std::to_string(s.fgmres_iters), s.escalated ? "1" : "0",
                          std::string(to_string(s.termination))});
      }
      write_csv(os, t);
      return tr.outcome == LSIROutcome::Converged ? 0 : 2;
    }
    CsvTable t;
    t.header = lsir_csv_header();
    t.rows.push_back({std::to_string(s_.seed), format_number(prob.meta.kappa_target),
                      std::string(to_string(u_s())), std::string(to_string(u_qr())),
                      std::string(to_string(w)), std::string(to_string(cfg.u_r)),
                      std::to_string(tr.lsir_iters), std::to_string(tr.total_fgmres_iters),
                      tr.outcome == LSIROutcome::Converged ? "1" : "0", tr.escalated ? "1" : "0",
                      format_number(tr.fe_x), format_number(tr.fe_r)});
    write_csv(os, t);
    return tr.outcome == LSIROutcome::Converged ? 0 : 2;
  }

  int experiment()
  {
    const ExperimentSpec spec = spec_from_flags(builtin_spec(exp_name_));
    const ExperimentResult res = run_experiment(spec, &std::cerr);
    if (spec.output.empty())
    {
      write_csv(std::cout, res.table);
    }
    if (res.failures > 0)
    {
      std::cerr << res.failures << " row(s) failed\n";
      return 2;
    }
    return 0;
  }

  int bounds(const ProblemInstance &prob)
  {
    const PreconditionerBundle bundle =
        build_preconditioner(prob.A, sketch(prob.A.rows(), prob.A.cols()), u_s(), u_qr(), s_.scale);
    const BoundReport rep = evaluate_bounds(prob.A, bundle, BoundOptions{});
    std::ostream &os = out();
    if (json_)
    {
      os << to_json(rep) << '\n';
      return 0;
    }
    CsvTable t;
    t.header = bound_report_header();
    t.rows.push_back(bound_report_row(rep));
    write_csv(os, t);
    return 0;
  }

  CLI::App app_;
  Settings s_;
  std::vector<Binding> bindings_;
  std::string config_;
  CLI::App *gen_ = nullptr;
  CLI::App *pre_ = nullptr;
  CLI::App *solve_ = nullptr;
  CLI::App *lsir_ = nullptr;
  CLI::App *exp_ = nullptr;
  CLI::App *bounds_ = nullptr;
  std::string out_a_;
  std::string out_b_;
  std::string exp_name_;
  bool trace_ = false;
  bool json_ = false;
  std::ofstream file_;
};

}  // namespace

int main(int argc, char **argv)
{
  try
  {
    Cli cli;
    return cli.run(argc, argv);
  }
  catch (const Error &e)
  {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  }
}
