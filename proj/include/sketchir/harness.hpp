// Copyright (c) sketchir contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sketchir/csv.hpp"
#include "sketchir/lsir.hpp"

namespace sketchir
{

// A = U diag(sigma) V^T with sigma_i = kappa^{-(i-1)/(n-1)}; U and V are the
// Q factors of seeded Gaussian matrices, all at Quad, rounded to Double.
DenseMatrix gen_randsvd(std::size_t m, std::size_t n, double kappa, std::uint64_t seed);

// Uniform(0, 1) entries scaled to unit 2-norm, stored at Double.
Vector gen_rhs(std::size_t m, std::uint64_t seed);

struct ProblemMetadata
{
  double kappa_target = 1.0;
  std::uint64_t seed = 0;
  std::string generator;
};

struct ProblemInstance
{
  DenseMatrix A;
  Vector b;
  ProblemMetadata meta;
};

ProblemInstance make_problem(std::size_t m, std::size_t n, double kappa, std::uint64_t seed);

// Matrix Market: "array" or "coordinate", real, general.
DenseMatrix read_matrix_market(std::istream &is);
DenseMatrix load_matrix_market(const std::string &path);
void write_matrix_market(std::ostream &os, const DenseMatrix &M);
void save_matrix_market(const DenseMatrix &M, const std::string &path);

// Right-hand side: Matrix Market array (m x 1) or whitespace-separated numbers.
Vector load_vector(const std::string &path);
ProblemInstance load_problem(const std::string &a_path, const std::string &b_path);

// Flat "section.key" -> value map from a TOML-style file: [section] headers,
// key = value lines, '#' comments, optional quotes around values.
std::map<std::string, std::string> read_config(std::istream &is);
std::map<std::string, std::string> load_config(const std::string &path);

enum class ExperimentKind
{
  Lsqr,            // warm start + LSQR only
  Lsir,            // full refinement
  Bounds,          // preconditioner diagnostics
  Regularization,  // identity sketch, cast-and-factor probe
};

struct SketchSpec
{
  SketchKind kind = SketchKind::Gaussian;
  double s_factor = 4.0;
  int zeta = 8;
  GaussianConvention convention = GaussianConvention::Paper;
};

struct ExperimentSpec
{
  std::string name;
  ExperimentKind kind = ExperimentKind::Lsir;
  std::size_t m = 1000;
  std::size_t n = 100;
  std::vector<double> kappa_list;
  std::vector<Format> u_s_list;
  std::optional<Format> u_qr;  // unset: u_qr = u
  Format u = Format::Double;
  std::optional<Format> u_r;  // unset: u^2
  std::optional<Format> u_a;  // unset: u
  std::optional<Format> u_l;
  std::optional<Format> u_rp;
  SketchSpec sketch;
  std::vector<std::uint64_t> seeds{1};
  double lsqr_factor = 2.0;
  int fgmres_max = 50;
  std::optional<int> escalated_fgmres_max = 80;
  int lsir_max = 30;
  bool escalate = true;
  bool scale = false;
  std::size_t explicit_limit = 2000;
  std::string output;  // CSV path, empty for none
  int jobs = 1;

  void validate() const;
};

// Built-in protocols: table1..table4, fig1..fig3.
ExperimentSpec builtin_spec(const std::string &name);
std::vector<std::string> builtin_spec_names();

struct ExperimentResult
{
  CsvTable table;
  int failures = 0;
};

ExperimentResult run_experiment(const ExperimentSpec &spec, std::ostream *log = nullptr);

// Appends one row per numeric column holding the median over seeds of each
// (kappa, u_s) cell; the seed column reads "median".
void append_medians(CsvTable &table);

}  // namespace sketchir
