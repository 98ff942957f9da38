#include "uwdpg/study.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace uwdpg {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> parse_numbers(const std::string& text, char sep) {
  std::vector<double> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, sep)) {
    size_t used = 0;
    const double value = std::stod(item, &used);
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
      ++used;
    if (used != item.size()) throw std::invalid_argument("trailing characters");
    out.push_back(value);
  }
  return out;
}

// EOC between two rows, measured against the trial dimension.
double eoc_between(double err_prev, double err, int dim_prev, int dim) {
  if (!(err_prev > 0.0) || !(err > 0.0) || dim <= dim_prev) return kNaN;
  return std::log(err_prev / err) / std::log(double(dim) / double(dim_prev));
}

void append_field(std::ostream& os, double value) {
  if (std::isnan(value)) return; // empty field
  os << std::setprecision(14) << value;
}

} // namespace

void validate(const StudyConfig& cfg) {
  if (cfg.n0 < 1) throw std::invalid_argument("n0: must be >= 1");
  if (cfg.p < 0 || cfg.p > 10) throw std::invalid_argument("p: must lie in [0, 10]");
  if (cfg.steps < 1 || cfg.steps > 99)
    throw std::invalid_argument("steps: must lie in [1, 99]");
  if (!(cfg.theta > 0.0) || cfg.theta > 1.0)
    throw std::invalid_argument("theta: must lie in (0, 1]");
  if (cfg.quad_order < 0 || cfg.quad_order > 64)
    throw std::invalid_argument("quad-order: must lie in [0, 64]");
  if (cfg.enrich_solve < 1 || cfg.enrich_solve > 10)
    throw std::invalid_argument("enrich-solve: must lie in [1, 10]");
  if (cfg.enrich_error < 1 || cfg.enrich_error > 10)
    throw std::invalid_argument("enrich-error: must lie in [1, 10]");
  initial_mesh(cfg); // throws on a malformed curve
}

MeshPtr initial_mesh(const StudyConfig& cfg) {
  const auto fail = []() {
    throw std::invalid_argument(
        "curve: expected 'interval:ax,ay,bx,by' or 'polygon:x1,y1;x2,y2;...'");
  };
  const size_t colon = cfg.curve.find(':');
  if (colon == std::string::npos) fail();
  const std::string kind = cfg.curve.substr(0, colon);
  const std::string body = cfg.curve.substr(colon + 1);
  try {
    if (kind == "interval") {
      const std::vector<double> c = parse_numbers(body, ',');
      if (c.size() != 4) fail();
      return build_interval_mesh(Eigen::Vector2d(c[0], c[1]), Eigen::Vector2d(c[2], c[3]),
                                 cfg.n0);
    }
    if (kind == "polygon") {
      std::vector<Eigen::Vector2d> vertices;
      std::stringstream stream(body);
      std::string pair;
      while (std::getline(stream, pair, ';')) {
        const std::vector<double> c = parse_numbers(pair, ',');
        if (c.size() != 2) fail();
        vertices.emplace_back(c[0], c[1]);
      }
      return build_polygon_mesh(vertices, cfg.n0);
    }
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("curve: ") + e.what());
  }
  fail();
  return nullptr; // unreachable
}

ScalarField make_load(const StudyConfig& cfg, double total_length) {
  if (cfg.load == LoadKind::Half)
    return [](const Eigen::Vector2d&, double) { return 0.5; };
  const double L = total_length;
  return [L](const Eigen::Vector2d&, double s) { return std::cos(2.0 * M_PI * s / L); };
}

bool has_exact_reference(const StudyConfig& cfg, const Mesh& mesh) {
  return cfg.load == LoadKind::Half && mesh.kind() == CurveKind::OpenInterval &&
         std::abs(mesh.total_length() - 2.0) <= 1e-12;
}

std::vector<int> mark_elements(const Eigen::VectorXd& indicators, double theta,
                               MarkingMeasure measure) {
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("theta: must lie in (0, 1]");
  const int n = static_cast<int>(indicators.size());
  Eigen::VectorXd weight(n);
  for (int e = 0; e < n; ++e) {
    const double eta = indicators[e];
    if (eta < 0.0) throw std::invalid_argument("mark_elements: negative indicator");
    weight[e] = measure == MarkingMeasure::Squared ? eta * eta : eta;
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (weight[a] != weight[b]) return weight[a] > weight[b];
    return a < b;
  });

  const double target = theta * weight.sum();
  std::vector<int> marked;
  double running = 0.0;
  for (const int e : order) {
    if (weight[e] <= 0.0) break;
    marked.push_back(e);
    running += weight[e];
    if (running >= target) break;
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

StudyResult run_study(const StudyConfig& cfg) {
  validate(cfg);
  MeshPtr mesh = initial_mesh(cfg);
  const ScalarField f = make_load(cfg, mesh->total_length());
  const bool with_reference = has_exact_reference(cfg, *mesh);

  const ScalarField phi_ref = [](const Eigen::Vector2d&, double s) {
    return std::sqrt(std::max(s * (2.0 - s), 0.0));
  };
  const ScalarField sigma_ref = [](const Eigen::Vector2d&, double s) {
    return -(s - 1.0) / 2.0;
  };

  DpgOptions opt;
  opt.enrich_solve = cfg.enrich_solve;
  opt.enrich_error = cfg.enrich_error;
  opt.quad.far_extra = cfg.quad_order;
  opt.quad.touch_extra = cfg.quad_order + 4;

  StudyResult result;
  for (int step = 1; step <= cfg.steps; ++step) {
    const DpgSolver solver(make_space(mesh, cfg.p), opt);
    const TrialFunction u = solver.solve(f);
    const ErrorReport report = solver.energy_error(u, f);

    ConvergenceRow row;
    row.step = step;
    row.dim = solver.layout().dim();
    row.elements = mesh->element_count();
    row.h_min = mesh->h_min();
    row.h_max = mesh->h_max();
    row.err_energy = report.energy_total;
    if (with_reference) {
      Eigen::VectorXd hat_ref(mesh->node_count());
      for (int j = 0; j < mesh->node_count(); ++j)
        hat_ref[j] = -(mesh->node_arclength(j) - 1.0) / 2.0;
      const L2Errors errs = l2_errors(u, phi_ref, sigma_ref, hat_ref);
      row.err_L2_phi = errs.phi;
      row.err_L2_sigma = errs.sigma;
      row.err_nodes_scaled = errs.nodes_scaled;
    } else {
      row.err_L2_phi = row.err_L2_sigma = row.err_nodes_scaled = kNaN;
    }

    if (result.rows.empty()) {
      row.eoc_L2 = row.eoc_energy = kNaN;
    } else {
      const ConvergenceRow& prev = result.rows.back();
      row.eoc_L2 = eoc_between(prev.err_L2_phi + prev.err_L2_sigma,
                               row.err_L2_phi + row.err_L2_sigma, prev.dim, row.dim);
      row.eoc_energy = eoc_between(prev.err_energy, row.err_energy, prev.dim, row.dim);
    }
    result.rows.push_back(row);
    if (step == cfg.steps) break;

    std::vector<int> marked;
    if (cfg.mode == RefineMode::Uniform) {
      marked.resize(mesh->element_count());
      std::iota(marked.begin(), marked.end(), 0);
    } else {
      marked = mark_elements(report.indicators, cfg.theta, cfg.marking_measure);
      if (marked.empty()) {
        result.converged = true;
        break;
      }
    }
    mesh = refine_halve(*mesh, marked);
  }
  return result;
}

void write_csv(const std::vector<ConvergenceRow>& rows, std::ostream& os) {
  os << "step,dim,elements,h_min,h_max,err_L2_phi,err_L2_sigma,err_nodes_scaled,"
        "err_energy,eoc_L2,eoc_energy\n";
  for (const ConvergenceRow& row : rows) {
    os << row.step << ',' << row.dim << ',' << row.elements << ',';
    append_field(os, row.h_min);
    os << ',';
    append_field(os, row.h_max);
    os << ',';
    append_field(os, row.err_L2_phi);
    os << ',';
    append_field(os, row.err_L2_sigma);
    os << ',';
    append_field(os, row.err_nodes_scaled);
    os << ',';
    append_field(os, row.err_energy);
    os << ',';
    append_field(os, row.eoc_L2);
    os << ',';
    append_field(os, row.eoc_energy);
    os << '\n';
  }
}

void write_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("write_csv: cannot open " + path);
  write_csv(rows, file);
  if (!file.good()) throw std::runtime_error("write_csv: write to " + path + " failed");
}

StudyConfig parse_config(const std::vector<std::string>& args) {
  StudyConfig cfg;
  CLI::App app{"Convergence studies for a first-kind hypersingular boundary equation"};
  app.option_defaults()->configurable();

  std::string mode = "uniform", measure = "squared", load = "half";
  app.add_option("--curve", cfg.curve,
                 "interval:ax,ay,bx,by or polygon:x1,y1;x2,y2;... (>= 3 vertices)")
      ->capture_default_str();
  app.add_option("--n0", cfg.n0, "initial elements per interval / polygon edge")
      ->capture_default_str();
  app.add_option("--p", cfg.p, "trial polynomial degree")->capture_default_str();
  app.add_option("--mode", mode, "uniform or adaptive")
      ->check(CLI::IsMember({"uniform", "adaptive"}))
      ->capture_default_str();
  app.add_option("--steps", cfg.steps, "number of study steps (rows)")
      ->capture_default_str();
  app.add_option("--theta", cfg.theta, "bulk marking fraction in (0, 1]")
      ->capture_default_str();
  app.add_option("--out", cfg.out, "CSV output path (default: stdout)")
      ->capture_default_str();
  app.add_option("--quad-order", cfg.quad_order, "extra Gauss points per element pair")
      ->capture_default_str();
  app.add_option("--enrich-solve", cfg.enrich_solve, "test-space degree increment")
      ->capture_default_str();
  app.add_option("--enrich-error", cfg.enrich_error, "error-space degree increment")
      ->capture_default_str();
  app.add_option("--marking-measure", measure, "squared or linear indicator mass")
      ->check(CLI::IsMember({"squared", "linear"}))
      ->capture_default_str();
  app.add_option("--f", load, "load: half (constant 1/2) or cos1 (first harmonic)")
      ->check(CLI::IsMember({"half", "cos1"}))
      ->capture_default_str();
  app.set_config("--config", "", "key=value file, # comments; flags override")
      ->configurable(false);
  app.allow_config_extras(false);

  std::vector<const char*> argv;
  argv.push_back("uwdpg_study");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    cfg.help = true;
    cfg.help_text = app.help();
    return cfg;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  cfg.mode = mode == "uniform" ? RefineMode::Uniform : RefineMode::Adaptive;
  cfg.marking_measure =
      measure == "squared" ? MarkingMeasure::Squared : MarkingMeasure::Linear;
  cfg.load = load == "half" ? LoadKind::Half : LoadKind::Cos1;
  validate(cfg);
  return cfg;
}

double fitted_eoc(const std::vector<double>& dims, const std::vector<double>& errs) {
  if (dims.size() != errs.size() || dims.size() < 2)
    throw std::invalid_argument("fitted_eoc: need two or more matching samples");
  const int n = static_cast<int>(dims.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    if (!(dims[i] > 0.0) || !(errs[i] > 0.0))
      throw std::invalid_argument("fitted_eoc: samples must be positive");
    x[i] = std::log(dims[i]);
    y[i] = std::log(errs[i]);
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fitted_eoc: dimensions are constant");
  return -sxy / sxx;
}

} // namespace uwdpg
