// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#include "sketchir/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sketchir/random.hpp"

namespace sketchir
{

namespace
{

DenseMatrix gaussian_q(std::size_t rows, std::size_t cols, std::uint64_t seed, StreamKind kind)
{
  std::vector<Real> g(rows * cols);
  for (std::size_t j = 0; j < cols; ++j)
  {
    RandomStream rng(seed, kind, j);
    for (std::size_t i = 0; i < rows; ++i)
    {
      g[i + j * rows] = Real(rng.normal());
    }
  }
  const DenseMatrix G = DenseMatrix::adopt(rows, cols, std::move(g), Format::Double);
  return explicit_q(householder_qr(G, Format::Quad), Format::Quad);
}

std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string &what)
{
  throw Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

// Splits a line into (column, token) pairs; columns are 1-based.
std::vector<std::pair<std::size_t, std::string>> tokens(const std::string &line)
{
  std::vector<std::pair<std::size_t, std::string>> out;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
    {
      ++i;
    }
    if (i >= line.size())
    {
      break;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
    {
      ++i;
    }
    out.emplace_back(start + 1, line.substr(start, i - start));
  }
  return out;
}

double token_number(const std::pair<std::size_t, std::string> &tok, std::size_t line)
{
  try
  {
    return parse_number(tok.second);
  }
  catch (const Error &)
  {
    parse_fail(line, tok.first, "expected a number, found '" + tok.second + "'");
  }
}

std::size_t token_index(const std::pair<std::size_t, std::string> &tok, std::size_t line)
{
  const double v = token_number(tok, line);
  if (v < 0 || v != std::floor(v))
  {
    parse_fail(line, tok.first, "expected a nonnegative integer, found '" + tok.second + "'");
  }
  return static_cast<std::size_t>(v);
}

std::string fmt_num(double x) { return format_number(x); }

double median(std::vector<double> v)
{
  if (v.empty())
  {
    return std::nan("");
  }
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::vector<std::string> header_for(ExperimentKind kind)
{
  switch (kind)
  {
    case ExperimentKind::Lsqr:
      return {"seed",       "kappa",      "u_s",  "u_qr", "u",    "lsqr_iters",
              "termination", "init_fe_x", "fe_x", "fe_r", "status"};
    case ExperimentKind::Lsir:
    {
      auto h = lsir_csv_header();
      h.insert(h.end(), {"lsqr_iters", "lsqr_fe_x", "lsqr_fe_r", "status"});
      return h;
    }
    case ExperimentKind::Bounds:
    {
      std::vector<std::string> h{"seed", "kappa"};
      const auto b = bound_report_header();
      h.insert(h.end(), b.begin(), b.end());
      h.push_back("status");
      return h;
    }
    case ExperimentKind::Regularization:
      break;
  }
  return {"seed",       "kappa",      "u_s",       "u_qr",  "pinv_arhat",
          "norm_arhat", "cond_arhat", "cond_cast", "bound", "status"};
}

struct Cell
{
  double kappa;
  std::uint64_t seed;
};

std::vector<std::vector<std::string>> run_cell(const ExperimentSpec &spec, const Cell &cell,
                                               int &failures)
{
  const auto header = header_for(spec.kind);
  std::vector<std::vector<std::string>> rows;
  ProblemInstance prob;
  std::optional<ReferenceSolution> ref;
  std::string setup_error;
  const Format u = spec.u;
  const Format u_qr = spec.u_qr.value_or(u);
  try
  {
    prob = make_problem(spec.m, spec.n, cell.kappa, cell.seed);
    if (spec.kind == ExperimentKind::Lsqr || spec.kind == ExperimentKind::Lsir)
    {
      // Data live in the working precision.
      prob.A = round_matrix(prob.A, u, nullptr, true);
      prob.b = round_vector(prob.b, u);
      ref = reference_solution(prob.A, prob.b, false);
    }
  }
  catch (const Error &e)
  {
    setup_error = std::string(to_string(e.code()));
  }

  for (const Format u_s : spec.u_s_list)
  {
    std::vector<std::string> row;
    auto fail_row = [&](const std::string &status) {
      ++failures;
      row.assign(header.size(), "nan");
      row[0] = std::to_string(cell.seed);
      row[1] = fmt_num(cell.kappa);
      row.back() = status;
    };
    if (!setup_error.empty())
    {
      fail_row(setup_error);
      rows.push_back(row);
      continue;
    }
    try
    {
      const std::size_t s =
          static_cast<std::size_t>(std::llround(spec.sketch.s_factor * static_cast<double>(spec.n)));
      std::shared_ptr<const SketchOperator> omega;
      if (spec.kind == ExperimentKind::Regularization || spec.sketch.kind == SketchKind::Identity)
      {
        omega = std::make_shared<SketchOperator>(make_identity(spec.m));
      }
      else if (spec.sketch.kind == SketchKind::SparseSign)
      {
        omega = std::make_shared<SketchOperator>(
            make_sparse_sign(s, spec.m, spec.sketch.zeta, cell.seed));
      }
      else
      {
        omega = std::make_shared<SketchOperator>(
            make_gaussian(s, spec.m, cell.seed, spec.sketch.convention, spec.n));
      }
      const std::string seed = std::to_string(cell.seed);
      const std::string kap = fmt_num(cell.kappa);
      switch (spec.kind)
      {
        case ExperimentKind::Lsqr:
        {
          const PreconditionerBundle bundle =
              build_preconditioner(prob.A, omega, u_s, u_qr, spec.scale);
          const Vector xs = sketch_and_solve_init(bundle, prob.b, u);
          KrylovConfig kc;
          kc.u = u;
          kc.tol = default_lsir_config(u, spec.n).lsqr_tol;
          kc.max_iters = static_cast<int>(std::llround(spec.lsqr_factor * spec.n));
          const LsqrResult ls = lsqr_right_precond(prob.A, prob.b, bundle, xs, kc);
          const Vector r = sub(prob.b, matvec(prob.A, ls.x, u), u);
          row = {seed,
                 kap,
                 std::string(to_string(u_s)),
                 std::string(to_string(u_qr)),
                 std::string(to_string(u)),
                 std::to_string(ls.trace.iterations),
                 std::string(to_string(ls.trace.termination)),
                 fmt_num(relative_error(xs, ref->x_star)),
                 fmt_num(relative_error(ls.x, ref->x_star)),
                 fmt_num(relative_error(r, ref->r_star)),
                 "ok"};
          break;
        }
        case ExperimentKind::Lsir:
        {
          LSIRConfig cfg = default_lsir_config(u, spec.n);
          cfg.u_r = spec.u_r.value_or(squared(u));
          cfg.fgmres.u_a = spec.u_a.value_or(u);
          cfg.fgmres.u_l = spec.u_l.value_or(u);
          cfg.fgmres.u_r = spec.u_rp.value_or(u);
          cfg.fgmres.max_iters = spec.fgmres_max;
          cfg.escalated_max_iters = spec.escalated_fgmres_max;
          cfg.escalate_on_stall = spec.escalate;
          cfg.max_refinement_iters = spec.lsir_max;
          cfg.lsqr_max_iters = static_cast<int>(std::llround(spec.lsqr_factor * spec.n));
          const LSIRTrace tr = lsir_run(prob.A, prob.b, omega, u_s, u_qr, cfg, *ref,
                                        prob.meta.kappa_target, spec.scale);
          row = {seed,
                 kap,
                 std::string(to_string(u_s)),
                 std::string(to_string(u_qr)),
                 std::string(to_string(u)),
                 std::string(to_string(cfg.u_r)),
                 std::to_string(tr.lsir_iters),
                 std::to_string(tr.total_fgmres_iters),
                 tr.outcome == LSIROutcome::Converged ? "1" : "0",
                 tr.escalated ? "1" : "0",
                 fmt_num(tr.fe_x),
                 fmt_num(tr.fe_r),
                 std::to_string(tr.lsqr_iters),
                 fmt_num(tr.lsqr_fe_x),
                 fmt_num(tr.lsqr_fe_r),
                 "ok"};
          break;
        }
        case ExperimentKind::Bounds:
        {
          const PreconditionerBundle bundle =
              build_preconditioner(prob.A, omega, u_s, u_qr, spec.scale);
          BoundOptions opts;
          opts.explicit_limit = spec.explicit_limit;
          const BoundReport rep = evaluate_bounds(prob.A, bundle, opts);
          row = {seed, kap};
          const auto b = bound_report_row(rep);
          row.insert(row.end(), b.begin(), b.end());
          row.push_back("ok");
          break;
        }
        case ExperimentKind::Regularization:
        {
          const PreconditionerBundle bundle = build_preconditioner(prob.A, omega, u_s, u_qr, false);
          const SingularValues sv =
              svd_values(right_tri_solve(prob.A, bundle.effective_r(), Format::Quad));
          const double cast_cond = svd_values(bundle.sketched).cond();
          const double bound =
              1.0 + std::sqrt(static_cast<double>(spec.n)) * unit_roundoff(u_s) * cell.kappa;
          row = {seed,
                 kap,
                 std::string(to_string(u_s)),
                 std::string(to_string(u_qr)),
                 fmt_num(sv.pinv_norm()),
                 fmt_num(sv.max()),
                 fmt_num(sv.cond()),
                 fmt_num(cast_cond),
                 fmt_num(bound),
                 "ok"};
          break;
        }
      }
    }
    catch (const Error &e)
    {
      fail_row(std::string(to_string(e.code())));
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> decades(int lo, int hi, int step = 1)
{
  std::vector<double> k;
  for (int e = lo; e <= hi; e += step)
  {
    k.push_back(std::pow(10.0, e));
  }
  return k;
}

}  // namespace

DenseMatrix gen_randsvd(std::size_t m, std::size_t n, double kappa, std::uint64_t seed)
{
  if (!(kappa >= 1.0) || n == 0 || m < n)
  {
    throw Error(ErrorCode::InvalidArgument, "randsvd needs kappa >= 1 and m >= n >= 1");
  }
  const DenseMatrix U = gaussian_q(m, n, seed, StreamKind::RandsvdLeft);
  const DenseMatrix V = gaussian_q(n, n, seed, StreamKind::RandsvdRight);
  std::vector<Real> us(m * n);
  for (std::size_t j = 0; j < n; ++j)
  {
    const double e = n == 1 ? 0.0 : -static_cast<double>(j) / static_cast<double>(n - 1);
    const Real sigma(std::pow(kappa, e));
    for (std::size_t i = 0; i < m; ++i)
    {
      us[i + j * m] = U(i, j) * sigma;
    }
  }
  const DenseMatrix US = DenseMatrix::adopt(m, n, std::move(us), Format::Quad);
  const DenseMatrix A = matmul(US, V.transpose(), Format::Quad);
  return round_matrix(A, Format::Double);
}

Vector gen_rhs(std::size_t m, std::uint64_t seed)
{
  if (m == 0)
  {
    throw Error(ErrorCode::InvalidArgument, "right-hand side length must be positive");
  }
  RandomStream rng(seed, StreamKind::RightHandSide, 0);
  Vector b(m);
  for (auto &x : b)
  {
    x = Real(rng.uniform());
  }
  const Real nb = nrm2(b, Format::Quad);
  for (auto &x : b)
  {
    x = round_scalar(x / nb, Format::Double);
  }
  return b;
}

ProblemInstance make_problem(std::size_t m, std::size_t n, double kappa, std::uint64_t seed)
{
  ProblemInstance p;
  p.A = gen_randsvd(m, n, kappa, seed);
  p.b = gen_rhs(m, seed);
  p.meta = {kappa, seed, "randsvd"};
  return p;
}

DenseMatrix read_matrix_market(std::istream &is)
{
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line))
  {
    throw Error(ErrorCode::ParseError, "line 1, column 1: empty input");
  }
  ++lineno;
  const auto head = tokens(line);
  if (head.size() < 5 || lower(head[0].second) != "%%matrixmarket" ||
      lower(head[1].second) != "matrix")
  {
    parse_fail(1, head.empty() ? 1 : head[0].first,
               "expected '%%MatrixMarket matrix' header, found '" +
                   (head.empty() ? std::string() : head[0].second) + "'");
  }
  const std::string layout = lower(head[2].second);
  if (layout != "array" && layout != "coordinate")
  {
    parse_fail(1, head[2].first, "unsupported layout '" + head[2].second + "'");
  }
  if (lower(head[3].second) != "real" && lower(head[3].second) != "integer")
  {
    parse_fail(1, head[3].first, "unsupported field '" + head[3].second + "'");
  }
  if (lower(head[4].second) != "general")
  {
    parse_fail(1, head[4].first, "unsupported symmetry '" + head[4].second + "'");
  }
  std::vector<std::pair<std::size_t, std::string>> size;
  while (std::getline(is, line))
  {
    ++lineno;
    if (line.empty() || line[0] == '%')
    {
      continue;
    }
    size = tokens(line);
    if (!size.empty())
    {
      break;
    }
  }
  const bool dense = layout == "array";
  if (size.size() != (dense ? 2u : 3u))
  {
    parse_fail(lineno, 1, "malformed size line");
  }
  const std::size_t m = token_index(size[0], lineno);
  const std::size_t n = token_index(size[1], lineno);
  const std::size_t nnz = dense ? m * n : token_index(size[2], lineno);
  std::vector<Real> data(m * n);
  std::size_t count = 0;
  while (count < nnz && std::getline(is, line))
  {
    ++lineno;
    if (line.empty() || line[0] == '%')
    {
      continue;
    }
    const auto tok = tokens(line);
    if (tok.empty())
    {
      continue;
    }
    if (dense)
    {
      for (const auto &t : tok)
      {
        if (count >= nnz)
        {
          parse_fail(lineno, t.first, "too many entries");
        }
        data[count++] = Real(token_number(t, lineno));
      }
    }
    else
    {
      if (tok.size() != 3)
      {
        parse_fail(lineno, tok[0].first, "expected 'row col value'");
      }
      const std::size_t i = token_index(tok[0], lineno);
      const std::size_t j = token_index(tok[1], lineno);
      if (i < 1 || i > m || j < 1 || j > n)
      {
        parse_fail(lineno, tok[0].first, "index out of range");
      }
      data[(i - 1) + (j - 1) * m] = Real(token_number(tok[2], lineno));
      ++count;
    }
  }
  if (count != nnz)
  {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(nnz) + " entries, found " + std::to_string(count));
  }
  return DenseMatrix(m, n, std::move(data), Format::Double);
}

DenseMatrix load_matrix_market(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  return read_matrix_market(is);
}

void write_matrix_market(std::ostream &os, const DenseMatrix &M)
{
  os << "%%MatrixMarket matrix array real general\n";
  os << M.rows() << ' ' << M.cols() << '\n';
  for (const auto &x : M.data())
  {
    os << format_number(to_double(x)) << '\n';
  }
}

void save_matrix_market(const DenseMatrix &M, const std::string &path)
{
  std::ofstream os(path);
  if (!os)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  }
  write_matrix_market(os, M);
}

Vector load_vector(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  if (is.peek() == '%')
  {
    const DenseMatrix M = read_matrix_market(is);
    if (M.cols() != 1)
    {
      throw Error(ErrorCode::DimensionMismatch, "right-hand side must have one column");
    }
    return Vector(M.data().begin(), M.data().end());
  }
  Vector b;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    for (const auto &t : tokens(line))
    {
      b.emplace_back(token_number(t, lineno));
    }
  }
  return b;
}

ProblemInstance load_problem(const std::string &a_path, const std::string &b_path)
{
  ProblemInstance p;
  p.A = load_matrix_market(a_path);
  p.b = load_vector(b_path);
  if (p.b.size() != p.A.rows())
  {
    throw Error(ErrorCode::DimensionMismatch, "b has " + std::to_string(p.b.size()) +
                                                  " entries, A has " +
                                                  std::to_string(p.A.rows()) + " rows");
  }
  p.meta.generator = "file";
  p.meta.kappa_target = svd_values(p.A).cond();
  return p;
}

std::map<std::string, std::string> read_config(std::istream &is)
{
  std::map<std::string, std::string> out;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty())
    {
      continue;
    }
    if (body.front() == '[')
    {
      if (body.back() != ']')
      {
        parse_fail(lineno, 1, "unterminated section header '" + body + "'");
      }
      section = trim(body.substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
    {
      parse_fail(lineno, 1, "expected 'key = value', found '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front())
    {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty())
    {
      parse_fail(lineno, 1, "empty key");
    }
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

std::map<std::string, std::string> load_config(const std::string &path)
{
  std::ifstream is(path);
  if (!is)
  {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  return read_config(is);
}

void ExperimentSpec::validate() const
{
  if (kappa_list.empty() || u_s_list.empty() || seeds.empty())
  {
    throw Error(ErrorCode::InvalidArgument, "experiment needs kappas, sketch precisions and seeds");
  }
  for (double k : kappa_list)
  {
    if (!(k >= 1.0))
    {
      throw Error(ErrorCode::InvalidArgument, "kappa must be >= 1");
    }
  }
  if (m < n || n == 0)
  {
    throw Error(ErrorCode::InvalidArgument, "experiment needs m >= n >= 1");
  }
  if (jobs < 1 || fgmres_max < 1 || lsir_max < 0 || lsqr_factor <= 0.0)
  {
    throw Error(ErrorCode::InvalidArgument, "invalid budget");
  }
}

std::vector<std::string> builtin_spec_names()
{
  return {"table1", "table2", "table3", "table4", "fig1", "fig2", "fig3"};
}

ExperimentSpec builtin_spec(const std::string &name)
{
  ExperimentSpec s;
  s.name = name;
  std::vector<double> wide = decades(2, 14, 2);
  wide.push_back(1e15);
  if (name == "table1")
  {
    s.kind = ExperimentKind::Lsqr;
    s.kappa_list = decades(0, 7);
    s.u_s_list = {Format::Half, Format::Single};
    s.u = Format::Single;
  }
  else if (name == "table2")
  {
    s.kind = ExperimentKind::Lsqr;
    s.kappa_list = wide;
    s.u_s_list = {Format::Half, Format::Single, Format::Double};
    s.u = Format::Double;
  }
  else if (name == "table3")
  {
    s.kind = ExperimentKind::Lsir;
    s.kappa_list = decades(0, 7);
    s.u_s_list = {Format::Half, Format::Single};
    s.u = Format::Single;
    s.escalated_fgmres_max = std::nullopt;
  }
  else if (name == "table4")
  {
    s.kind = ExperimentKind::Lsir;
    s.kappa_list = wide;
    s.u_s_list = {Format::Half, Format::Single, Format::Double};
    s.u = Format::Double;
    s.escalated_fgmres_max = 80;
  }
  else if (name == "fig1")
  {
    s.kind = ExperimentKind::Regularization;
    s.m = 400;
    s.n = 10;
    s.kappa_list = decades(0, 16);
    s.u_s_list = {Format::Single, Format::Half};
    s.u_qr = Format::Double;
    s.sketch.kind = SketchKind::Identity;
  }
  else if (name == "fig2")
  {
    s.kind = ExperimentKind::Bounds;
    s.kappa_list = wide;
    s.u_s_list = {Format::Half, Format::Single};
    s.u_qr = Format::Single;
  }
  else if (name == "fig3")
  {
    s.kind = ExperimentKind::Bounds;
    s.kappa_list = wide;
    s.u_s_list = {Format::Half, Format::Single, Format::Double};
    s.u_qr = Format::Double;
  }
  else
  {
    throw Error(ErrorCode::InvalidArgument, "unknown experiment '" + name + "'");
  }
  return s;
}

ExperimentResult run_experiment(const ExperimentSpec &spec, std::ostream *log)
{
  spec.validate();
  std::vector<Cell> cells;
  for (double k : spec.kappa_list)
  {
    for (std::uint64_t seed : spec.seeds)
    {
      cells.push_back({k, seed});
    }
  }
  std::vector<std::vector<std::vector<std::string>>> results(cells.size());
  std::vector<int> failures(cells.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++)
    {
      results[i] = run_cell(spec, cells[i], failures[i]);
      if (log != nullptr)
      {
        const std::lock_guard<std::mutex> lock(log_mutex);
        *log << spec.name << ": kappa " << format_number(cells[i].kappa) << " seed "
             << cells[i].seed << " done\n";
      }
    }
  };
  const int jobs = std::min<int>(spec.jobs, static_cast<int>(cells.size()));
  if (jobs <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < jobs; ++t)
    {
      pool.emplace_back(worker);
    }
  }
  ExperimentResult out;
  out.table.header = header_for(spec.kind);
  for (std::size_t i = 0; i < cells.size(); ++i)
  {
    out.failures += failures[i];
    for (auto &row : results[i])
    {
      out.table.rows.push_back(std::move(row));
    }
  }
  if (spec.seeds.size() > 1)
  {
    append_medians(out.table);
  }
  if (!spec.output.empty())
  {
    save_csv(out.table, spec.output);
  }
  return out;
}

void append_medians(CsvTable &table)
{
  const std::size_t seed_col = table.column("seed");
  const std::size_t kappa_col = table.column("kappa");
  const std::size_t us_col = table.column("u_s");
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto &row : table.rows)
  {
    if (row[seed_col] == "median")
    {
      continue;
    }
    const std::pair<std::string, std::string> key{row[kappa_col], row[us_col]};
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
    {
      keys.push_back(key);
    }
  }
  std::vector<std::vector<std::string>> extra;
  for (const auto &key : keys)
  {
    std::vector<const std::vector<std::string> *> group;
    for (const auto &row : table.rows)
    {
      if (row[seed_col] != "median" && row[kappa_col] == key.first && row[us_col] == key.second)
      {
        group.push_back(&row);
      }
    }
    std::vector<std::string> med(table.header.size());
    for (std::size_t c = 0; c < table.header.size(); ++c)
    {
      std::vector<double> vals;
      bool numeric = true;
      for (const auto *row : group)
      {
        try
        {
          vals.push_back(parse_number((*row)[c]));
        }
        catch (const Error &)
        {
          numeric = false;
        }
      }
      med[c] = numeric ? format_number(median(vals)) : (*group.front())[c];
    }
    med[seed_col] = "median";
    med[kappa_col] = key.first;
    med[us_col] = key.second;
    extra.push_back(std::move(med));
  }
  table.rows.insert(table.rows.end(), extra.begin(), extra.end());
}

}  // namespace sketchir
