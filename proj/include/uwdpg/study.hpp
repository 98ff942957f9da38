// Convergence-study harness: configuration parsing, the refine loop around
// the solver, bulk marking, and CSV reporting.
#pragma once

#include "uwdpg/dpg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace uwdpg {

enum class RefineMode { Uniform, Adaptive };
enum class MarkingMeasure { Squared, Linear };
enum class LoadKind { Half, Cos1 };

struct StudyConfig {
  // "interval:ax,ay,bx,by" or "polygon:x1,y1;x2,y2;..." (>= 3 vertices).
  std::string curve = "interval:-1,0,1,0";
  int n0 = 4; // initial elements per interval / per polygon edge
  int p = 0;
  RefineMode mode = RefineMode::Uniform;
  int steps = 8;
  double theta = 0.5;
  int quad_order = 2; // far-field extra Gauss points; near pairs add 4 more
  int enrich_solve = 1;
  int enrich_error = 2;
  MarkingMeasure marking_measure = MarkingMeasure::Squared;
  LoadKind load = LoadKind::Half;
  std::string out; // CSV path; empty writes to stdout

  bool help = false; // --help was given; help_text carries the usage page
  std::string help_text;
};

// NaN fields encode "empty" (unknown reference, or no previous row for EOC).
struct ConvergenceRow {
  int step = 0;
  int dim = 0; // trial dimension 2 * fields + nodes
  int elements = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  double err_L2_phi = 0.0;
  double err_L2_sigma = 0.0;
  double err_nodes_scaled = 0.0;
  double err_energy = 0.0;
  double eoc_L2 = 0.0;
  double eoc_energy = 0.0;
};

struct StudyResult {
  std::vector<ConvergenceRow> rows;
  bool converged = false; // all indicators vanished before the last step
};

// Throws std::invalid_argument naming the offending key.
void validate(const StudyConfig& cfg);

// Initial mesh from the curve description and n0.
MeshPtr initial_mesh(const StudyConfig& cfg);

// Load field; cos1 is the first angular harmonic cos(2 pi s / length),
// mean-zero on closed curves.
ScalarField make_load(const StudyConfig& cfg, double total_length);

// True when the run has a known exact solution (the canonical length-2
// interval with the constant load 1/2).
bool has_exact_reference(const StudyConfig& cfg, const Mesh& mesh);

// Greedy bulk marking: sort by the chosen measure of the indicators
// (descending, ties by lower index), accumulate until theta * total is
// reached.  Zero indicators are never marked; all-zero input gives {}.
std::vector<int> mark_elements(const Eigen::VectorXd& indicators, double theta,
                               MarkingMeasure measure = MarkingMeasure::Squared);

StudyResult run_study(const StudyConfig& cfg);

// Header plus one line per row, >= 12 significant digits, NaN as empty field.
void write_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os);
void write_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);

// Flags plus optional --config file (key=value lines, # comments; flags
// override the file).  Throws std::invalid_argument naming the offending key.
StudyConfig parse_config(const std::vector<std::string>& args);

// Least-squares slope of log(err) against log(dim), sign-flipped so that
// err ~ dim^(-eoc) gives a positive value.
double fitted_eoc(const std::vector<double>& dims, const std::vector<double>& errs);

} // namespace uwdpg
