#include "vqrate/bounds.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "vqrate/errors.hpp"
#include "vqrate/parallel.hpp"

namespace vqrate {

namespace {

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be a finite nonnegative number");
}

void require_pos(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

double get(const std::map<std::string, double>& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw DomainError("missing parameter '" + key + "'");
  return it->second;
}

double get_or(const std::map<std::string, double>& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int as_int(double v, const char* what) {
  if (v != std::floor(v) || std::abs(v) > 1e9) throw DomainError(std::string(what) + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

double perf_bound_thm21(double e_star, double w2) {
  require_nonneg(e_star, "e_star");
  require_nonneg(w2, "w2");
  return 4.0 * e_star * w2 + 4.0 * w2 * w2;
}

double quantizer_bound_thm22(double lambda_star, double e_star, double w2) {
  if (!(lambda_star > 0.0)) throw NotApplicable("quantizer distance bound needs lambda_star > 0");
  require_nonneg(e_star, "e_star");
  require_nonneg(w2, "w2");
  return 8.0 / lambda_star * (e_star * w2 + w2 * w2);
}

double empirical_rate_prop41(int d, double q, double n) {
  if (d < 1) throw DomainError("dimension must be at least 1");
  if (!(q > 2.0)) throw NotApplicable("rate needs q > 2");
  if (!(n > 1.0)) throw NotApplicable("rate needs n > 1");
  const double moment_term = std::pow(n, -(q - 2.0) / (2.0 * q));
  if (d < 4) {
    if (near(q, 4.0)) throw NotApplicable("q = 4 is excluded for d <= 4");
    return std::pow(n, -0.25) + moment_term;
  }
  if (d == 4) {
    if (near(q, 4.0)) throw NotApplicable("q = 4 is excluded for d <= 4");
    return std::pow(n, -0.25) * std::sqrt(std::log1p(n)) + moment_term;
  }
  if (near(q, static_cast<double>(d) / (d - 2.0))) throw NotApplicable("q = d/(d-2) is excluded for d > 4");
  return std::pow(n, -1.0 / d) + moment_term;
}

double clustering_bound_thm42a(const Thm42aParams& p) {
  if (p.K < 1) throw DomainError("K must be at least 1");
  require_pos(p.n, "n");
  require_nonneg(p.r1, "r1");
  require_nonneg(p.r2n, "r2n");
  require_nonneg(p.rho, "rho");
  return 2.0 * p.K / std::sqrt(p.n) * (p.r2n * p.r2n + p.rho * p.rho + 2.0 * p.r1 * (p.r2n + p.rho));
}

double clustering_bound_thm42b(const Thm42bParams& p) {
  if (p.K < 1 || p.d < 1) throw DomainError("K and d must be at least 1");
  require_pos(p.n, "n");
  require_pos(p.C, "C");
  if (!(p.p > 2.0)) throw NotApplicable("polynomial-tail bound needs p > 2");
  if (!(p.c > p.d + p.p)) throw NotApplicable("polynomial-tail bound needs c > d + p");
  const double expo = 2.0 * (p.p + p.d) / (p.d * (p.c - p.p - p.d)) * p.gamma;
  return p.K / std::sqrt(p.n) * (p.C * std::pow(p.n, 2.0 / p.p) + 6.0 * std::pow(static_cast<double>(p.K), expo));
}

double clustering_bound_thm42c(const Thm42cParams& p) {
  if (p.K < 1 || p.d < 1) throw DomainError("K and d must be at least 1");
  require_pos(p.n, "n");
  require_pos(p.C, "C");
  if (!(p.kappa >= 2.0)) throw NotApplicable("hyper-exponential bound needs kappa >= 2");
  const double e = 2.0 / p.kappa;
  const double logn = std::log(p.n), logK = std::log(static_cast<double>(p.K));
  return p.C * p.K / std::sqrt(p.n) *
         (1.0 + std::pow(logn, e) + p.gamma * std::pow(logK, e) * std::pow(1.0 + 2.0 / p.d, e));
}

double gaussian_performance_constant(int d) {
  if (d < 1) throw DomainError("dimension must be at least 1");
  return 24.0 * std::max(1.0, (1.0 + 0.5 * d) * std::numbers::ln2);
}

double gaussian_performance_constant(const Measure& g) {
  if (!g.is_gaussian()) throw UnsupportedOperation("gaussian_performance_constant needs a Gaussian measure");
  // E exp(t|X|^2) = det(I - 2t S)^{-1/2} exp(t m' (I - 2t S)^{-1} m) at t = 1/4
  const Eigen::MatrixXd S = g.covariance();
  const Eigen::VectorXd m = g.mean();
  const auto d = S.rows();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d) - 0.5 * S;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.eigenvalues().minCoeff() <= 0.0) throw NotApplicable("E exp(|X|^2/4) is infinite for this covariance");
  const double log_mgf = -0.5 * es.eigenvalues().array().log().sum() + 0.25 * m.dot(A.ldlt().solve(m));
  return 24.0 * std::max(1.0, std::numbers::ln2 + log_mgf);
}

double zador_upper(double C, double sigma, int d, double K) {
  require_pos(C, "C");
  require_pos(sigma, "sigma");
  if (d < 1) throw DomainError("dimension must be at least 1");
  require_pos(K, "K");
  return C * sigma * std::pow(K, -1.0 / d);
}

RadiusBound radius_bounds(const TailDescriptor& tail, int d, double K, double p) {
  if (d < 1) throw DomainError("dimension must be at least 1");
  if (!(K >= 2.0)) throw DomainError("radius bounds need K >= 2");
  RadiusBound r;
  if (const auto* h = std::get_if<HyperExponentialTail>(&tail)) {
    if (!(h->theta > 0.0 && h->kappa > 0.0)) throw DomainError("hyper-exponential tail needs theta, kappa > 0");
    if (!(h->c > -d)) throw DomainError("hyper-exponential tail needs c > -d");
    r.kind = "hyper-exponential";
    r.value = 2.0 * std::pow(h->theta, -1.0 / h->kappa) * std::pow(1.0 + 2.0 / d, 1.0 / h->kappa) *
              std::pow(std::log(K), 1.0 / h->kappa);
    if (d == 1) r.exact_1d_factor = std::pow(3.0 / h->theta, 1.0 / h->kappa);
    return r;
  }
  const auto& pt = std::get<PolynomialTail>(tail);
  if (!(p >= 2.0)) throw DomainError("polynomial tail exponent needs p >= 2");
  if (!(pt.c > d + p)) throw DomainError("polynomial tail needs c > d + p");
  r.kind = "polynomial";
  r.value = (p + d) / (d * (pt.c - p - d));
  return r;
}

ScaleEstimates sample_radii(const Measure& m, std::size_t n, int reps, const Stream& stream, int workers) {
  if (n < 1 || reps < 2) throw DomainError("radius estimates need n >= 1 and reps >= 2");
  const std::size_t r = static_cast<std::size_t>(reps);
  std::vector<double> s1(r), sn(r), s2n(r);
  parallel_for(r, workers, [&](std::size_t k) {
    Stream s = stream.split(k);
    const Eigen::MatrixXd X = m.sample(2 * n, s);
    const Eigen::VectorXd sq = X.rowwise().squaredNorm();
    s1[k] = sq(0);
    sn[k] = sq.head(static_cast<Eigen::Index>(n)).maxCoeff();
    s2n[k] = sq.maxCoeff();
  });
  auto summarise = [&](const std::vector<double>& v, double& value, double& se) {
    long double mean = 0.0L, sq = 0.0L;
    for (double x : v) mean += x;
    mean /= static_cast<long double>(r);
    for (double x : v) sq += (x - mean) * (x - mean);
    const double var = static_cast<double>(sq / static_cast<long double>(r - 1));
    value = std::sqrt(static_cast<double>(mean));
    // delta method for the square root
    se = value > 0.0 ? std::sqrt(var / static_cast<double>(r)) / (2.0 * value) : 0.0;
  };
  ScaleEstimates e;
  summarise(s1, e.r1, e.r1_se);
  summarise(sn, e.rn, e.rn_se);
  summarise(s2n, e.r2n, e.r2n_se);
  return e;
}

ScaleEstimates scale_estimates(const Measure& m, std::size_t n, int reps, int K, const Stream& stream,
                               const ScaleOptions& opt) {
  ScaleEstimates e = sample_radii(m, n, reps, stream, opt.solver.workers);
  const auto best = best_of(m, K, opt.restarts, opt.solver, stream.split(0xb0));
  e.rho_hat = best.rho_hat;
  e.e_star_hat = best.e_star_hat;
  e.m2 = std::sqrt(m.second_moment());
  e.q = opt.q;
  e.M_q = m.abs_moment(opt.q);
  e.sigma_q = m.sigma(opt.q);
  return e;
}

std::string to_string(Applicability a) {
  switch (a) {
    case Applicability::Yes:
      return "yes";
    case Applicability::No:
      return "no";
    default:
      return "asymptotic";
  }
}

BoundReport evaluate_bound(const std::string& name, const std::map<std::string, double>& params) {
  BoundReport rep;
  rep.name = name;
  rep.inputs = params;
  try {
    if (name == "thm21") {
      rep.bound = perf_bound_thm21(get(params, "e_star"), get(params, "w2"));
    } else if (name == "thm22") {
      rep.bound = quantizer_bound_thm22(get(params, "lambda_star"), get(params, "e_star"), get(params, "w2"));
      rep.note = "squared grid distance; distance bound " + std::to_string(std::sqrt(rep.bound));
    } else if (name == "prop41") {
      rep.bound = empirical_rate_prop41(as_int(get(params, "d"), "d"), get(params, "q"), get(params, "n"));
      rep.applicable = Applicability::Asymptotic;
      rep.note = "rate factor without the constant C_{d,q,mu,K}";
    } else if (name == "thm42a") {
      rep.bound = clustering_bound_thm42a({as_int(get(params, "K"), "K"), get(params, "n"), get(params, "r1"),
                                           get(params, "r2n"), get(params, "rho")});
    } else if (name == "thm42b") {
      Thm42bParams p;
      p.K = as_int(get(params, "K"), "K");
      p.n = get(params, "n");
      p.C = get_or(params, "C", 1.0);
      p.p = get(params, "p");
      p.c = get(params, "c");
      p.d = as_int(get(params, "d"), "d");
      p.gamma = get_or(params, "gamma", 1.0);
      rep.bound = clustering_bound_thm42b(p);
      rep.applicable = Applicability::Asymptotic;
    } else if (name == "thm42c") {
      Thm42cParams p;
      p.K = as_int(get(params, "K"), "K");
      p.n = get(params, "n");
      p.d = as_int(get(params, "d"), "d");
      p.kappa = get_or(params, "kappa", 2.0);
      p.gamma = get_or(params, "gamma", 1.0);
      if (get_or(params, "gaussian", 0.0) != 0.0) {
        p.kappa = 2.0;
        p.C = gaussian_performance_constant(p.d);
        rep.note = "standard Gaussian constant 24(1+d/2)log 2";
      } else {
        p.C = get_or(params, "C", 1.0);
      }
      rep.inputs["C"] = p.C;
      rep.bound = clustering_bound_thm42c(p);
      rep.applicable = Applicability::Asymptotic;
    } else if (name == "zador") {
      rep.bound = zador_upper(get_or(params, "C", 1.0), get(params, "sigma"), as_int(get(params, "d"), "d"),
                              get(params, "K"));
    } else if (name == "radius") {
      const int d = as_int(get(params, "d"), "d");
      const double K = get(params, "K");
      RadiusBound r;
      if (params.count("theta")) {
        HyperExponentialTail h;
        h.theta = get(params, "theta");
        h.kappa = get(params, "kappa");
        h.c = get_or(params, "c", 0.0);
        r = radius_bounds(h, d, K);
      } else {
        PolynomialTail t;
        t.c = get(params, "c");
        r = radius_bounds(t, d, K, get(params, "p"));
      }
      rep.bound = r.value;
      rep.applicable = Applicability::Asymptotic;
      rep.note = r.kind;
      if (r.exact_1d_factor) rep.inputs["exact_1d_factor"] = *r.exact_1d_factor;
    } else {
      throw DomainError("unknown bound '" + name + "'");
    }
  } catch (const NotApplicable& e) {
    rep.applicable = Applicability::No;
    rep.note = e.what();
    rep.bound = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  if (const auto it = params.find("measured"); it != params.end()) {
    rep.measured = it->second;
    rep.measured_se = get_or(params, "measured_se", 0.0);
    rep.slack = rep.bound - it->second;
  }
  return rep;
}

std::map<std::string, double> parse_params(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(start, end - start);
    start = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double v = 0.0;
    if (val == "e") {
      v = std::numbers::e;
    } else {
      auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc() || ptr != val.data() + val.size()) throw ParseError("bad number for '" + key + "'");
    }
    out[key] = v;
  }
  return out;
}

}  // namespace vqrate
