#include "vqrate/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "vqrate/csv.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/quadrature.hpp"
#include "vqrate/special.hpp"

namespace vqrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Moments of the standard normal on (alpha, beta].
CellMoments std_normal_moments(double alpha, double beta) {
  CellMoments c;
  const double pa = special::normal_pdf(alpha);
  const double pb = special::normal_pdf(beta);
  c.mass = special::normal_interval(alpha, beta);
  c.first = pa - pb;
  const double ta = std::isinf(alpha) ? 0.0 : alpha * pa;
  const double tb = std::isinf(beta) ? 0.0 : beta * pb;
  c.second = c.mass + ta - tb;
  return c;
}

// e^{-t} P_k(t) with P_0 = 1, P_1 = t + 1, P_2 = t^2 + 2t + 2, i.e. the
// antiderivative tails of t^k e^{-t}; zero at +inf.
double exp_tail(int k, double t) {
  if (t == kInf) return 0.0;
  const double e = std::exp(-t);
  switch (k) {
    case 0:
      return e;
    case 1:
      return e * (t + 1.0);
    default:
      return e * (t * t + 2.0 * t + 2.0);
  }
}

// Integral of t^k e^{-t} over [u, v] with 0 <= u <= v.
CellMoments gamma_moments(double u, double v) {
  CellMoments c;
  if (!(u < v)) return c;
  c.mass = exp_tail(0, u) - exp_tail(0, v);
  c.first = exp_tail(1, u) - exp_tail(1, v);
  c.second = exp_tail(2, u) - exp_tail(2, v);
  if (u == 0.0 && v != kInf) c.mass = -std::expm1(-v);
  return c;
}

// Moments of X = shift + scale * T given moments of T.
CellMoments affine(const CellMoments& t, double shift, double scale) {
  CellMoments c;
  c.mass = t.mass;
  c.first = shift * t.mass + scale * t.first;
  c.second = shift * shift * t.mass + 2.0 * shift * scale * t.first + scale * scale * t.second;
  return c;
}

double parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError("not a number: '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_list(std::string_view s, char sep = ',') {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(parse_number(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Measure Measure::uniform(double lo, double hi) {
  require_finite(lo, "uniform lower end");
  require_finite(hi, "uniform upper end");
  if (!(lo < hi)) throw DomainError("uniform: need lo < hi");
  return Measure(Uniform1d{lo, hi}, 1);
}

Measure Measure::gaussian(double mean, double sigma) {
  require_finite(mean, "gaussian mean");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("gaussian: sigma must be positive");
  return Measure(Gaussian1d{mean, sigma}, 1);
}

Measure Measure::laplace(double loc, double scale) {
  require_finite(loc, "laplace location");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("laplace: scale must be positive");
  return Measure(Laplace1d{loc, scale}, 1);
}

Measure Measure::exponential(double rate, double shift) {
  require_finite(shift, "exponential shift");
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError("exponential: rate must be positive");
  return Measure(Exponential1d{rate, shift}, 1);
}

Measure Measure::gaussian_nd(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  const auto d = mean.size();
  if (d < 1) throw DomainError("gaussianNd: empty mean");
  if (cov.rows() != d || cov.cols() != d) throw DomainError("gaussianNd: covariance must be d x d");
  if (!mean.allFinite() || !cov.allFinite()) throw DomainError("gaussianNd: non-finite parameters");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("gaussianNd: covariance is not symmetric");
  if (d == 1) {
    if (!(cov(0, 0) > 0.0)) throw DomainError("gaussianNd: covariance is not positive definite");
    return gaussian(mean(0), std::sqrt(cov(0, 0)));
  }
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) throw DomainError("gaussianNd: covariance is not positive definite");
  Eigen::MatrixXd L = llt.matrixL();
  if ((L.diagonal().array() <= 0.0).any()) throw DomainError("gaussianNd: covariance is not positive definite");
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const double log_norm = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
  return Measure(GaussianNd{std::move(mean), std::move(sym), std::move(L), log_norm}, static_cast<int>(d));
}

Measure Measure::uniform_box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() < 1 || lo.size() != hi.size()) throw DomainError("uniformBox: lo and hi must have equal positive length");
  if (!lo.allFinite() || !hi.allFinite()) throw DomainError("uniformBox: non-finite bounds");
  if (((hi - lo).array() <= 0.0).any()) throw DomainError("uniformBox: need lo < hi in every coordinate");
  if (lo.size() == 1) return uniform(lo(0), hi(0));
  const int d = static_cast<int>(lo.size());
  return Measure(UniformBox{std::move(lo), std::move(hi)}, d);
}

Measure Measure::empirical(Eigen::MatrixXd points) {
  if (points.rows() < 1 || points.cols() < 1) throw DomainError("empirical: need at least one point");
  if (!points.allFinite()) throw DomainError("empirical: non-finite coordinates");
  Empirical e;
  const int d = static_cast<int>(points.cols());
  if (d == 1) {
    auto sorted = std::make_shared<std::vector<double>>(points.data(), points.data() + points.rows());
    std::sort(sorted->begin(), sorted->end());
    auto p1 = std::make_shared<std::vector<long double>>(sorted->size() + 1, 0.0L);
    auto p2 = std::make_shared<std::vector<long double>>(sorted->size() + 1, 0.0L);
    for (std::size_t i = 0; i < sorted->size(); ++i) {
      const long double v = (*sorted)[i];
      (*p1)[i + 1] = (*p1)[i] + v;
      (*p2)[i + 1] = (*p2)[i] + v * v;
    }
    e.sorted = std::move(sorted);
    e.prefix1 = std::move(p1);
    e.prefix2 = std::move(p2);
  }
  e.points = std::make_shared<const Eigen::MatrixXd>(std::move(points));
  return Measure(std::move(e), d);
}

Measure Measure::empirical(const std::vector<double>& atoms) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(atoms.size()), 1);
  for (std::size_t i = 0; i < atoms.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = atoms[i];
  return empirical(std::move(m));
}

std::string Measure::kind_name() const {
  return std::visit(overloaded{[](const Uniform1d&) { return std::string("uniform1d"); },
                               [](const Gaussian1d&) { return std::string("gaussian1d"); },
                               [](const Laplace1d&) { return std::string("laplace1d"); },
                               [](const Exponential1d&) { return std::string("exponential1d"); },
                               [](const GaussianNd&) { return std::string("gaussianNd"); },
                               [](const UniformBox&) { return std::string("uniformBox"); },
                               [](const Empirical&) { return std::string("empirical"); }},
                    kind_);
}

double Measure::pdf(double xi) const {
  if (dim_ != 1) throw UnsupportedOperation("pdf(double) needs a 1D measure");
  return std::visit(
      overloaded{[&](const Uniform1d& u) { return (xi >= u.lo && xi <= u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                 [&](const Gaussian1d& g) { return special::normal_pdf((xi - g.mean) / g.sigma) / g.sigma; },
                 [&](const Laplace1d& l) { return 0.5 / l.scale * std::exp(-std::abs(xi - l.loc) / l.scale); },
                 [&](const Exponential1d& e) {
                   return xi < e.shift ? 0.0 : e.rate * std::exp(-e.rate * (xi - e.shift));
                 },
                 [&](const GaussianNd&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const UniformBox&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const Empirical&) -> double {
                   throw UnsupportedOperation("pdf is not defined for an empirical measure");
                 }},
      kind_);
}

double Measure::pdf(const Eigen::Ref<const Eigen::VectorXd>& xi) const {
  if (xi.size() != dim_) throw DomainError("pdf: point dimension mismatch");
  if (is_empirical()) throw UnsupportedOperation("pdf is not defined for an empirical measure");
  if (dim_ == 1) return pdf(xi(0));
  if (const auto* g = std::get_if<GaussianNd>(&kind_)) {
    const Eigen::VectorXd z = g->chol.triangularView<Eigen::Lower>().solve(xi - g->mean);
    return std::exp(g->log_norm - 0.5 * z.squaredNorm());
  }
  const auto& b = std::get<UniformBox>(kind_);
  if ((xi.array() < b.lo.array()).any() || (xi.array() > b.hi.array()).any()) return 0.0;
  return 1.0 / (b.hi - b.lo).prod();
}

double Measure::cdf(double x) const {
  if (dim_ != 1) throw UnsupportedOperation("cdf needs a 1D measure");
  if (std::isnan(x)) throw DomainError("cdf: NaN argument");
  return std::visit(
      overloaded{[&](const Uniform1d& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
                 [&](const Gaussian1d& g) { return special::normal_cdf((x - g.mean) / g.sigma); },
                 [&](const Laplace1d& l) {
                   const double t = (x - l.loc) / l.scale;
                   return t < 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
                 },
                 [&](const Exponential1d& e) { return x <= e.shift ? 0.0 : -std::expm1(-e.rate * (x - e.shift)); },
                 [&](const GaussianNd&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const UniformBox&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const Empirical& e) {
                   const auto& s = *e.sorted;
                   const auto k = std::upper_bound(s.begin(), s.end(), x) - s.begin();
                   return static_cast<double>(k) / static_cast<double>(s.size());
                 }},
      kind_);
}

double Measure::quantile(double p) const {
  if (dim_ != 1) throw UnsupportedOperation("quantile needs a 1D measure");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0,1)");
  return std::visit(
      overloaded{[&](const Uniform1d& u) { return u.lo + p * (u.hi - u.lo); },
                 [&](const Gaussian1d& g) { return g.mean + g.sigma * special::normal_quantile(p); },
                 [&](const Laplace1d& l) {
                   return p < 0.5 ? l.loc + l.scale * std::log(2.0 * p) : l.loc - l.scale * std::log(2.0 * (1.0 - p));
                 },
                 [&](const Exponential1d& e) { return e.shift - std::log1p(-p) / e.rate; },
                 [&](const GaussianNd&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const UniformBox&) -> double { throw UnsupportedOperation("unreachable"); },
                 [&](const Empirical& e) {
                   const auto& s = *e.sorted;
                   const double n = static_cast<double>(s.size());
                   auto k = static_cast<std::size_t>(std::ceil(p * n));
                   // smallest k with k/n >= p, guarding the rounding of p*n
                   if (k > 1 && static_cast<double>(k - 1) / n >= p) --k;
                   if (k < s.size() && static_cast<double>(k) / n < p) ++k;
                   k = std::clamp<std::size_t>(k, 1, s.size());
                   return s[k - 1];
                 }},
      kind_);
}

void Measure::draw(Stream& stream, double* out) const {
  std::visit(overloaded{[&](const Uniform1d& u) { out[0] = u.lo + (u.hi - u.lo) * stream.uniform(); },
                        [&](const Gaussian1d& g) { out[0] = g.mean + g.sigma * stream.normal(); },
                        [&](const Laplace1d& l) {
                          const double u = stream.uniform();
                          out[0] = u < 0.5 ? l.loc + l.scale * std::log(2.0 * u)
                                           : l.loc - l.scale * std::log(2.0 * (1.0 - u));
                        },
                        [&](const Exponential1d& e) { out[0] = e.shift - std::log(stream.uniform()) / e.rate; },
                        [&](const GaussianNd& g) {
                          const auto d = g.mean.size();
                          Eigen::VectorXd z(d);
                          for (Eigen::Index k = 0; k < d; ++k) z(k) = stream.normal();
                          Eigen::Map<Eigen::VectorXd>(out, d) = g.mean + g.chol.triangularView<Eigen::Lower>() * z;
                        },
                        [&](const UniformBox& b) {
                          for (Eigen::Index k = 0; k < b.lo.size(); ++k)
                            out[k] = b.lo(k) + (b.hi(k) - b.lo(k)) * stream.uniform();
                        },
                        [&](const Empirical& e) {
                          const auto& P = *e.points;
                          const auto i = static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(P.rows())));
                          for (Eigen::Index k = 0; k < P.cols(); ++k) out[k] = P(i, k);
                        }},
             kind_);
}

Eigen::MatrixXd Measure::sample(std::size_t n, Stream& stream) const {
  if (n < 1) throw DomainError("sample: n must be at least 1");
  // Row-major scratch so each draw is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(static_cast<Eigen::Index>(n), dim_);
  for (std::size_t i = 0; i < n; ++i) draw(stream, out.data() + i * static_cast<std::size_t>(dim_));
  return out;
}

CellMoments Measure::cell_moments(double a, double b) const {
  if (dim_ != 1) throw UnsupportedOperation("cell_moments needs a 1D measure");
  if (std::isnan(a) || std::isnan(b)) throw DomainError("cell_moments: NaN bound");
  if (a > b) throw DomainError("cell_moments: need a <= b");
  if (a == b) return {};
  return std::visit(
      overloaded{[&](const Uniform1d& u) {
                   CellMoments c;
                   const double lo = std::clamp(a, u.lo, u.hi);
                   const double hi = std::clamp(b, u.lo, u.hi);
                   if (!(lo < hi)) return c;
                   const double w = u.hi - u.lo;
                   c.mass = (hi - lo) / w;
                   c.first = (hi - lo) * (hi + lo) / (2.0 * w);
                   c.second = (hi - lo) * (hi * hi + hi * lo + lo * lo) / (3.0 * w);
                   return c;
                 },
                 [&](const Gaussian1d& g) {
                   return affine(std_normal_moments((a - g.mean) / g.sigma, (b - g.mean) / g.sigma), g.mean, g.sigma);
                 },
                 [&](const Laplace1d& l) {
                   const double alpha = (a - l.loc) / l.scale;
                   const double beta = (b - l.loc) / l.scale;
                   CellMoments t;
                   if (beta > 0.0) {
                     const auto pos = gamma_moments(std::max(alpha, 0.0), beta);
                     t.mass += 0.5 * pos.mass;
                     t.first += 0.5 * pos.first;
                     t.second += 0.5 * pos.second;
                   }
                   if (alpha < 0.0) {
                     // reflect the negative half onto [−beta, −alpha]
                     const auto neg = gamma_moments(std::max(-beta, 0.0), -alpha);
                     t.mass += 0.5 * neg.mass;
                     t.first -= 0.5 * neg.first;
                     t.second += 0.5 * neg.second;
                   }
                   return affine(t, l.loc, l.scale);
                 },
                 [&](const Exponential1d& e) {
                   const double u = std::max(e.rate * (a - e.shift), 0.0);
                   const double v = e.rate * (b - e.shift);
                   if (!(v > u)) return CellMoments{};
                   return affine(gamma_moments(u, v), e.shift, 1.0 / e.rate);
                 },
                 [&](const GaussianNd&) -> CellMoments { throw UnsupportedOperation("unreachable"); },
                 [&](const UniformBox&) -> CellMoments { throw UnsupportedOperation("unreachable"); },
                 [&](const Empirical& e) {
                   const auto& s = *e.sorted;
                   const auto lo = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), a) - s.begin());
                   const auto hi = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), b) - s.begin());
                   const long double n = static_cast<long double>(s.size());
                   CellMoments c;
                   c.mass = static_cast<double>(static_cast<long double>(hi - lo) / n);
                   c.first = static_cast<double>(((*e.prefix1)[hi] - (*e.prefix1)[lo]) / n);
                   c.second = static_cast<double>(((*e.prefix2)[hi] - (*e.prefix2)[lo]) / n);
                   return c;
                 }},
      kind_);
}

Eigen::VectorXd Measure::mean() const {
  return std::visit(overloaded{[](const Uniform1d& u) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, 0.5 * (u.lo + u.hi)); },
                               [](const Gaussian1d& g) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, g.mean); },
                               [](const Laplace1d& l) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, l.loc); },
                               [](const Exponential1d& e) -> Eigen::VectorXd {
                                 return Eigen::VectorXd::Constant(1, e.shift + 1.0 / e.rate);
                               },
                               [](const GaussianNd& g) -> Eigen::VectorXd { return g.mean; },
                               [](const UniformBox& b) -> Eigen::VectorXd { return 0.5 * (b.lo + b.hi); },
                               [](const Empirical& e) -> Eigen::VectorXd {
                                 return e.points->colwise().mean().transpose();
                               }},
                    kind_);
}

Eigen::MatrixXd Measure::covariance() const {
  return std::visit(
      overloaded{[](const Uniform1d& u) -> Eigen::MatrixXd {
                   const double w = u.hi - u.lo;
                   return Eigen::MatrixXd::Constant(1, 1, w * w / 12.0);
                 },
                 [](const Gaussian1d& g) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, g.sigma * g.sigma); },
                 [](const Laplace1d& l) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, 2.0 * l.scale * l.scale); },
                 [](const Exponential1d& e) -> Eigen::MatrixXd { return Eigen::MatrixXd::Constant(1, 1, 1.0 / (e.rate * e.rate)); },
                 [](const GaussianNd& g) -> Eigen::MatrixXd { return g.cov; },
                 [](const UniformBox& b) -> Eigen::MatrixXd {
                   Eigen::VectorXd w = b.hi - b.lo;
                   return (w.array().square() / 12.0).matrix().asDiagonal();
                 },
                 [](const Empirical& e) -> Eigen::MatrixXd {
                   const Eigen::MatrixXd c = e.points->rowwise() - e.points->colwise().mean();
                   return (c.transpose() * c) / static_cast<double>(e.points->rows());
                 }},
      kind_);
}

namespace {

// Quadrature breaks for 1D moments: the effective support plus, on unbounded
// sides, an outer panel four support widths long that picks up the tail mass
// beyond the 1e-12 quantiles.
std::vector<double> moment_breaks(const Measure& m) {
  const auto [lo, hi] = m.effective_support();
  const double w = hi - lo;
  const bool bounded_below = std::holds_alternative<Measure::Uniform1d>(m.kind()) ||
                             std::holds_alternative<Measure::Exponential1d>(m.kind());
  const bool bounded_above = std::holds_alternative<Measure::Uniform1d>(m.kind());
  std::vector<double> b;
  if (!bounded_below) b.push_back(lo - 4.0 * w);
  b.push_back(lo);
  b.push_back(hi);
  if (!bounded_above) b.push_back(hi + 4.0 * w);
  return b;
}

}  // namespace

double Measure::second_moment() const {
  if (const auto* e = std::get_if<Empirical>(&kind_)) return e->points->rowwise().squaredNorm().mean();
  return mean().squaredNorm() + covariance().trace();
}

double Measure::abs_moment(double q) const {
  if (!(q > 0.0)) throw DomainError("abs_moment: q must be positive");
  if (q == 2.0) return second_moment();
  if (const auto* e = std::get_if<Empirical>(&kind_))
    return e->points->rowwise().norm().array().pow(q).mean();
  if (dim_ == 1) {
    std::vector<double> breaks = moment_breaks(*this);
    const auto [lo, hi] = std::pair(breaks.front(), breaks.back());
    if (lo < 0.0 && hi > 0.0) breaks.push_back(0.0);
    const double c = mean()(0);
    if (c > lo && c < hi && c != 0.0) breaks.push_back(c);
    std::sort(breaks.begin(), breaks.end());
    QuadratureOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-12;
    return integrate_pieces([&](double x) { return std::pow(std::abs(x), q) * pdf(x); }, breaks, opt).value;
  }
  if (const auto* g = std::get_if<GaussianNd>(&kind_)) {
    const double s2 = g->cov(0, 0);
    const Eigen::MatrixXd iso = s2 * Eigen::MatrixXd::Identity(dim_, dim_);
    if (g->mean.isZero(0.0) && (g->cov - iso).isZero(0.0)) {
      // E|X|^q = s^q 2^{q/2} Gamma((d+q)/2) / Gamma(d/2)
      const double d = dim_;
      return std::exp(0.5 * q * std::log(2.0 * s2) + std::lgamma(0.5 * (d + q)) - std::lgamma(0.5 * d));
    }
  }
  // Fixed-stream Monte Carlo for the remaining cases.
  Stream s(0x5eedULL, 0xab5ULL);
  constexpr std::size_t n = 1 << 18;
  std::vector<double> buf(static_cast<std::size_t>(dim_));
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    draw(s, buf.data());
    acc += std::pow(Eigen::Map<Eigen::VectorXd>(buf.data(), dim_).norm(), q);
  }
  return static_cast<double>(acc / n);
}

double Measure::sigma(double q) const {
  if (!(q > 0.0)) throw DomainError("sigma: q must be positive");
  if (q == 2.0) return std::sqrt(covariance().trace());
  const bool symmetric = std::holds_alternative<Uniform1d>(kind_) || std::holds_alternative<Gaussian1d>(kind_) ||
                         std::holds_alternative<Laplace1d>(kind_) || std::holds_alternative<GaussianNd>(kind_) ||
                         std::holds_alternative<UniformBox>(kind_);
  auto centred = [&](double a) {
    if (const auto* e = std::get_if<Empirical>(&kind_))
      return (e->points->array() - a).abs().pow(q).mean();
    std::vector<double> breaks = moment_breaks(*this);
    if (a > breaks.front() && a < breaks.back()) breaks.push_back(a);
    std::sort(breaks.begin(), breaks.end());
    QuadratureOptions opt;
    opt.abs_tol = 1e-14;
    opt.rel_tol = 1e-12;
    return integrate_pieces([&](double x) { return std::pow(std::abs(x - a), q) * pdf(x); }, breaks, opt).value;
  };
  if (dim_ == 1) {
    if (symmetric) return std::pow(centred(mean()(0)), 1.0 / q);
    // E|X-a|^q is convex in a; golden-section search over the support.
    auto [lo, hi] = effective_support();
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = centred(x1), f2 = centred(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = centred(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = centred(x2);
      }
    }
    return std::pow(std::min(f1, f2), 1.0 / q);
  }
  if (const auto* e = std::get_if<Empirical>(&kind_)) {
    // Iteratively reweighted centroid for the L^q centre.
    const auto& P = *e->points;
    Eigen::RowVectorXd a = P.colwise().mean();
    for (int it = 0; it < 500; ++it) {
      const Eigen::ArrayXd r = (P.rowwise() - a).rowwise().norm().array();
      const Eigen::ArrayXd w = (r.max(1e-300)).pow(q - 2.0);
      Eigen::RowVectorXd next = (P.array().colwise() * w).colwise().sum().matrix() / w.sum();
      if ((next - a).norm() <= 1e-14 * (1.0 + a.norm())) {
        a = next;
        break;
      }
      a = next;
    }
    return std::pow((P.rowwise() - a).rowwise().norm().array().pow(q).mean(), 1.0 / q);
  }
  // Symmetric d-dimensional laws are centred at their mean.
  const Eigen::VectorXd c = mean();
  Stream s(0x5eedULL, 0x5195ULL);
  constexpr std::size_t n = 1 << 18;
  Eigen::VectorXd buf(dim_);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    draw(s, buf.data());
    acc += std::pow((buf - c).norm(), q);
  }
  return std::pow(static_cast<double>(acc / n), 1.0 / q);
}

std::pair<double, double> Measure::effective_support() const {
  if (dim_ != 1) throw UnsupportedOperation("effective_support needs a 1D measure");
  if (const auto* u = std::get_if<Uniform1d>(&kind_)) return {u->lo, u->hi};
  // Upper quantiles from the survival function; 1 - 1e-12 itself is not representable.
  if (const auto* e = std::get_if<Exponential1d>(&kind_))
    return {e->shift, e->shift - std::log(kTailQuantile) / e->rate};
  if (const auto* e = std::get_if<Empirical>(&kind_)) return {e->sorted->front(), e->sorted->back()};
  if (const auto* l = std::get_if<Laplace1d>(&kind_)) {
    const double r = -l->scale * std::log(2.0 * kTailQuantile);
    return {l->loc - r, l->loc + r};
  }
  const auto& g = std::get<Gaussian1d>(kind_);
  const double r = -g.sigma * special::normal_quantile(kTailQuantile);
  return {g.mean - r, g.mean + r};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> Measure::effective_box() const {
  if (dim_ == 1) {
    const auto [lo, hi] = effective_support();
    return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
  }
  if (const auto* b = std::get_if<UniformBox>(&kind_)) return {b->lo, b->hi};
  if (const auto* e = std::get_if<Empirical>(&kind_))
    return {e->points->colwise().minCoeff().transpose(), e->points->colwise().maxCoeff().transpose()};
  const auto& g = std::get<GaussianNd>(kind_);
  // Union bound over 2d coordinate tails.
  const double z = -special::normal_quantile(kTailQuantile / (2.0 * dim_));
  const Eigen::VectorXd half = z * g.cov.diagonal().cwiseSqrt();
  return {g.mean - half, g.mean + half};
}

const Eigen::MatrixXd& Measure::points() const {
  const auto* e = std::get_if<Empirical>(&kind_);
  if (!e) throw UnsupportedOperation("points() needs an empirical measure");
  return *e->points;
}

std::size_t Measure::size() const { return static_cast<std::size_t>(points().rows()); }

const std::vector<double>& Measure::sorted_atoms() const {
  const auto* e = std::get_if<Empirical>(&kind_);
  if (!e || dim_ != 1) throw UnsupportedOperation("sorted_atoms() needs a 1D empirical measure");
  return *e->sorted;
}

std::size_t Measure::distinct_atoms() const {
  const auto* e = std::get_if<Empirical>(&kind_);
  if (!e) throw UnsupportedOperation("distinct_atoms() needs an empirical measure");
  if (dim_ == 1) {
    const auto& s = *e->sorted;
    std::size_t count = 1;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] != s[i - 1]) ++count;
    return count;
  }
  const auto& P = *e->points;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(P.rows()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < P.cols(); ++k)
      if (P(a, k) != P(b, k)) return P(a, k) < P(b, k);
    return false;
  };
  std::sort(idx.begin(), idx.end(), less);
  std::size_t count = idx.empty() ? 0 : 1;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (less(idx[i - 1], idx[i])) ++count;
  return count;
}

Measure Measure::with_tail(TailDescriptor tail) const {
  std::visit(overloaded{[](const HyperExponentialTail& h) {
                          if (!(h.theta > 0.0 && h.kappa > 0.0 && h.tau > 0.0 && h.A > 0.0))
                            throw DomainError("hyper-exponential tail needs theta, kappa, tau, A > 0");
                        },
                        [&](const PolynomialTail& p) {
                          if (!(p.c > dim_ && p.tau > 0.0 && p.A > 0.0))
                            throw DomainError("polynomial tail needs c > d and tau, A > 0");
                        }},
             tail);
  Measure m = *this;
  m.tail_ = tail;
  return m;
}

Measure parse_distribution(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw ParseError("distribution spec needs 'kind:params': " + std::string(spec));
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  auto expect = [&](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (v.size() < lo || v.size() > hi) throw ParseError("wrong number of parameters in '" + std::string(spec) + "'");
  };
  auto split_semicolon = [&]() {
    const auto semi = rest.find(';');
    if (semi == std::string_view::npos) throw ParseError("expected ';' in '" + std::string(spec) + "'");
    return std::pair{parse_list(rest.substr(0, semi)), parse_list(rest.substr(semi + 1))};
  };
  try {
    if (kind == "uniform") {
      const auto v = parse_list(rest);
      expect(v, 2, 2);
      return Measure::uniform(v[0], v[1]);
    }
    if (kind == "gauss") {
      const auto v = parse_list(rest);
      expect(v, 2, 2);
      return Measure::gaussian(v[0], v[1]);
    }
    if (kind == "laplace") {
      const auto v = parse_list(rest);
      expect(v, 2, 2);
      return Measure::laplace(v[0], v[1]);
    }
    if (kind == "exp") {
      const auto v = parse_list(rest);
      expect(v, 1, 2);
      return Measure::exponential(v[0], v.size() > 1 ? v[1] : 0.0);
    }
    if (kind == "gaussNd") {
      auto [mean, cov] = split_semicolon();
      const std::size_t d = mean.size();
      if (cov.size() != d * d) throw ParseError("gaussNd covariance needs d*d entries");
      Eigen::MatrixXd C(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
          C(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cov[i * d + j];
      return Measure::gaussian_nd(to_vector(mean), C);
    }
    if (kind == "box") {
      auto [lo, hi] = split_semicolon();
      if (lo.size() != hi.size()) throw ParseError("box bounds must have equal length");
      return Measure::uniform_box(to_vector(lo), to_vector(hi));
    }
    if (kind == "empirical") return Measure::empirical(csv::read_matrix(std::string(rest)));
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid distribution '") + std::string(spec) + "': " + e.what());
  }
  throw ParseError("unknown distribution kind '" + std::string(kind) + "'");
}

}  // namespace vqrate
