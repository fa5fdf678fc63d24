#include "vqrate/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "vqrate/bounds.hpp"
#include "vqrate/csv.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/hessian.hpp"
#include "vqrate/parallel.hpp"
#include "vqrate/wasserstein.hpp"

namespace vqrate {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kExperiments = {"consistency",    "perf-vs-n",      "thm21-slack",
                                               "thm22-distance", "thm42-gaussian", "uniform-closed-form"};

constexpr std::uint64_t kReferenceTag = 0x7265665fULL;
constexpr std::uint64_t kRadiiTag = 0x72616469ULL;
constexpr std::uint64_t kEvalTag = 0x6576616cULL;
constexpr std::size_t kEvalSamples = 100000;

template <class T>
std::vector<T> scalar_or_list(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("config is missing '") + key + "'");
  const auto& v = j.at(key);
  std::vector<T> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.get<T>());
  } else {
    out.push_back(v.get<T>());
  }
  return out;
}

// Distance between grids; d >= 2 grids are matched by optimal assignment.
double grid_distance(const Quantizer& a, const Quantizer& b) {
  if (a.K() != b.K() || a.dim() != b.dim()) throw DomainError("grid_distance: shape mismatch");
  if (a.dim() == 1) return (a.points() - b.points()).norm();
  Eigen::MatrixXd C(a.K(), a.K());
  for (int i = 0; i < a.K(); ++i)
    for (int j = 0; j < a.K(); ++j) C(i, j) = (a.points().row(i) - b.points().row(j)).squaredNorm();
  return std::sqrt(std::max(0.0, min_cost_assignment(C)));
}

struct Reference {
  Quantizer grid;
  double distortion;
  double e_star;
  double rho;
  double lambda_star;  // NaN unless 1D analytic
};

Method evaluation_method(const Measure& mu, std::uint64_t base_seed) {
  if (mu.dim() == 1) return method::Exact1d{};
  method::MonteCarlo mc;
  mc.samples = kEvalSamples;
  mc.stream = Stream(base_seed).split(kEvalTag);
  return mc;
}

Reference make_reference(const ExperimentConfig& cfg, const Measure& mu, int K) {
  const Method eval = evaluation_method(mu, cfg.base_seed);
  std::optional<Quantizer> grid;
  if (cfg.experiment == "uniform-closed-form") {
    const auto& u = std::get<Measure::Uniform1d>(mu.kind());
    std::vector<double> v(K);
    for (int i = 0; i < K; ++i) v[i] = u.lo + (u.hi - u.lo) * (2.0 * i + 1.0) / (2.0 * K);
    grid = Quantizer::from_values(v);
  } else {
    SolverConfig rc;
    rc.workers = cfg.workers;
    if (mu.dim() == 1) {
      rc.kind = SolverKind::Newton;
      rc.init = InitStrategy::Quantile;
    } else {
      rc.kind = SolverKind::Lloyd;
      rc.init = InitStrategy::SamplePP;
    }
    const Stream s = Stream(cfg.base_seed).split(kReferenceTag).split(static_cast<std::uint64_t>(K));
    grid = best_of(mu, K, cfg.reference_restarts, rc, s).best.quantizer;
  }
  const double D = distortion(*grid, mu, eval).value;
  double lambda = std::numeric_limits<double>::quiet_NaN();
  if (mu.dim() == 1) lambda = lambda_star_for_bound(hessian_1d(*grid, mu));
  return {*grid, D, std::sqrt(std::max(0.0, D)), grid->max_norm(), lambda};
}

struct CellKey {
  int K;
  std::size_t n;
  int seed;
};

}  // namespace

Stream cell_stream(std::uint64_t base_seed, int K, std::size_t n, int seed) {
  const std::uint64_t h =
      mix64(mix64(mix64(static_cast<std::uint64_t>(K)) ^ static_cast<std::uint64_t>(n)) ^ static_cast<std::uint64_t>(seed));
  return Stream(base_seed).split(h);
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    cfg.experiment = j.at("experiment").get<std::string>();
    cfg.distribution = j.at("distribution").get<std::string>();
    cfg.K = scalar_or_list<int>(j, "K");
    for (auto v : scalar_or_list<long long>(j, "n")) {
      if (v < 1) throw ParseError("n values must be positive");
      cfg.n.push_back(static_cast<std::size_t>(v));
    }
    cfg.seeds = j.value("seeds", 1);
    cfg.base_seed = j.value("base_seed", std::uint64_t{0});
    cfg.reference_restarts = j.value("reference_restarts", 10);
    cfg.scale_reps = j.value("scale_reps", 200);
    cfg.workers = j.value("workers", 1);
    cfg.cell_time_budget_s = j.value("cell_time_budget_s", 60.0);
    cfg.output = j.value("output", std::string());
    cfg.timing = j.value("timing", false);
    const Measure mu = parse_distribution(cfg.distribution);
    cfg.solver.init = mu.dim() == 1 ? InitStrategy::Quantile : InitStrategy::SamplePP;
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      if (s.contains("method")) cfg.solver.kind = parse_solver_kind(s.at("method").get<std::string>());
      if (s.contains("init")) cfg.solver.init = parse_init_strategy(s.at("init").get<std::string>());
      cfg.solver.tol = s.value("tol", -1.0);
      cfg.solver.max_iter = s.value("max_iter", kDefaultMaxIter);
      cfg.solver.clvq_steps = s.value("clvq_steps", std::size_t{100000});
      if (s.contains("schedule")) {
        cfg.solver.schedule.a = s.at("schedule").value("a", 1.0);
        cfg.solver.schedule.b = s.at("schedule").value("b", 100.0);
      }
      cfg.restarts = s.value("restarts", 1);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad config field: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end())
    throw ParseError("unknown experiment '" + cfg.experiment + "'");
  if (cfg.K.empty() || cfg.n.empty()) throw ParseError("K and n lists must be nonempty");
  for (int k : cfg.K)
    if (k < 1) throw ParseError("K values must be positive");
  for (std::size_t i = 1; i < cfg.n.size(); ++i)
    if (!(cfg.n[i] > cfg.n[i - 1])) throw ParseError("n values must be strictly increasing");
  if (*std::max_element(cfg.K.begin(), cfg.K.end()) > static_cast<int>(cfg.n.front()))
    throw ParseError("every n must be at least the largest K");
  if (cfg.seeds < 1) throw ParseError("seeds must be at least 1");
  if (cfg.reference_restarts < 1 || cfg.restarts < 1) throw ParseError("restarts must be at least 1");
  if (cfg.workers < 1) throw ParseError("workers must be at least 1");
  if (!(cfg.cell_time_budget_s > 0.0)) throw ParseError("cell_time_budget_s must be positive");
  Measure mu = Measure::uniform(0, 1);
  try {
    mu = parse_distribution(cfg.distribution);
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
  if (!mu.is_analytic()) throw ParseError("experiments need an analytic distribution");
  if (cfg.solver.kind == SolverKind::Newton) throw ParseError("newton cannot solve empirical measures; use lloyd or clvq");
  if (mu.dim() > 1) {
    if (cfg.solver.init == InitStrategy::Quantile) throw ParseError("quantile initialisation needs a 1D distribution");
    if (cfg.n.back() > kAssignmentLimit) throw ParseError("d >= 2 experiments need n <= 512 for the W2 surrogate");
  }
  if (cfg.solver.init == InitStrategy::Given) throw ParseError("init 'given' is not available in experiments");
  if (cfg.experiment == "thm22-distance" && mu.dim() != 1)
    throw ParseError("thm22-distance needs a 1D distribution");
  if (cfg.experiment == "uniform-closed-form" && !std::holds_alternative<Measure::Uniform1d>(mu.kind()))
    throw ParseError("uniform-closed-form needs a uniform distribution");
  if (cfg.experiment == "thm42-gaussian" && !mu.is_gaussian())
    throw ParseError("thm42-gaussian needs a Gaussian distribution");
  if (cfg.experiment == "thm42-gaussian" && cfg.scale_reps < 2) throw ParseError("scale_reps must be at least 2");
}

double ResultRow::field(const std::string& name) const {
  if (name == "K") return K;
  if (name == "n") return static_cast<double>(n);
  if (name == "seed") return seed;
  if (name == "performance") return performance;
  if (name == "w2") return w2;
  if (name == "bound") return bound;
  if (name == "slack") return slack;
  if (name == "quantizer_distance") return quantizer_distance;
  if (name == "wall_time_s") return wall_time_s;
  throw DomainError("unknown result field '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Measure mu = parse_distribution(cfg.distribution);
  const Method eval = evaluation_method(mu, cfg.base_seed);

  std::map<int, Reference> refs;
  for (int K : cfg.K)
    if (!refs.count(K)) refs.emplace(K, make_reference(cfg, mu, K));

  std::map<std::pair<int, std::size_t>, double> thm42a;
  if (cfg.experiment == "thm42-gaussian") {
    for (int K : cfg.K)
      for (std::size_t n : cfg.n) {
        const Stream s = Stream(cfg.base_seed).split(kRadiiTag).split(static_cast<std::uint64_t>(n));
        const auto r = sample_radii(mu, n, cfg.scale_reps, s, cfg.workers);
        thm42a[{K, n}] = clustering_bound_thm42a({K, static_cast<double>(n), r.r1, r.r2n, refs.at(K).rho});
      }
  }

  std::vector<CellKey> cells;
  for (int K : cfg.K)
    for (std::size_t n : cfg.n)
      for (int seed = 0; seed < cfg.seeds; ++seed) cells.push_back({K, n, seed});
  std::sort(cells.begin(), cells.end(), [](const CellKey& a, const CellKey& b) {
    return std::tie(a.K, a.n, a.seed) < std::tie(b.K, b.n, b.seed);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const CellKey& a, const CellKey& b) {
                            return a.K == b.K && a.n == b.n && a.seed == b.seed;
                          }),
              cells.end());

  std::vector<ResultRow> rows(cells.size());
  parallel_for(cells.size(), cfg.workers, [&](std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    const CellKey c = cells[idx];
    const Reference& ref = refs.at(c.K);
    Stream s = cell_stream(cfg.base_seed, c.K, c.n, c.seed);
    const Measure mun = Measure::empirical(mu.sample(c.n, s));
    SolverConfig sc = cfg.solver;
    sc.workers = 1;
    const auto sol = best_of(mun, c.K, cfg.restarts, sc, s.split(1));
    const Quantizer& xn = sol.best.quantizer;

    ResultRow row;
    row.experiment = cfg.experiment;
    row.distribution = cfg.distribution;
    row.K = c.K;
    row.n = c.n;
    row.seed = c.seed;
    row.performance = distortion(xn, mu, eval).value - ref.distortion;
    row.w2 = mu.dim() == 1 ? w_p_1d(mun, mu, 2).distance : w2_surrogate(mun, mu, s.split(2)).distance;
    row.quantizer_distance = grid_distance(xn, ref.grid);
    if (cfg.experiment == "thm22-distance") {
      row.bound = quantizer_bound_thm22(ref.lambda_star, ref.e_star, row.w2);
      row.slack = row.bound - row.quantizer_distance * row.quantizer_distance;
    } else if (cfg.experiment == "thm42-gaussian") {
      row.bound = thm42a.at({c.K, c.n});
      row.slack = row.bound - row.performance;
    } else {
      row.bound = perf_bound_thm21(ref.e_star, row.w2);
      row.slack = row.bound - row.performance;
    }
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (row.wall_time_s > cfg.cell_time_budget_s) row.status = "timeout";
    rows[idx] = std::move(row);
  });

  ExperimentResult out;
  out.rows = std::move(rows);
  out.timeouts = static_cast<int>(
      std::count_if(out.rows.begin(), out.rows.end(), [](const ResultRow& r) { return r.status == "timeout"; }));
  return out;
}

void write_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  os << "schema_version,experiment,distribution,K,n,seed,status,performance,w2,bound,slack,quantizer_distance";
  if (cfg.timing) os << ",wall_time_s";
  os << "\r\n";
  for (const auto& r : rows) {
    os << kCsvSchemaVersion << ',' << csv::quote(r.experiment) << ',' << csv::quote(r.distribution) << ',' << r.K
       << ',' << r.n << ',' << r.seed << ',' << r.status << ',' << csv::format_double(r.performance) << ','
       << csv::format_double(r.w2) << ',' << csv::format_double(r.bound) << ',' << csv::format_double(r.slack) << ','
       << csv::format_double(r.quantizer_distance);
    if (cfg.timing) os << ',' << csv::format_double(r.wall_time_s);
    os << "\r\n";
  }
}

std::string to_csv(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_csv(os, cfg, rows);
  return os.str();
}

RateFit fit_rate(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("fit_rate: x and y differ in length");
  std::map<double, std::pair<long double, int>> groups;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto& g = groups[x[i]];
    g.first += y[i];
    g.second += 1;
  }
  if (groups.size() < 3) throw DomainError("fit_rate needs at least 3 distinct x values");
  std::vector<double> lx, ly;
  for (const auto& [xv, g] : groups) {
    const double mean = static_cast<double>(g.first / g.second);
    if (!(xv > 0.0) || !(mean > 0.0)) throw DomainError("fit_rate needs positive x and positive mean y");
    lx.push_back(std::log(xv));
    ly.push_back(std::log(mean));
  }
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

RateFit fit_rate(const std::vector<ResultRow>& rows, const std::string& x_field, const std::string& y_field) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    x.push_back(r.field(x_field));
    y.push_back(r.field(y_field));
  }
  return fit_rate(x, y);
}

}  // namespace vqrate
