#include "riskgraph/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace riskgraph::dist {

namespace {

constexpr double kEntropyTailMass = 1e-9;
constexpr long long kEntropyCap = 10000;
constexpr long long kQuantileCap = 1000000;

double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double safe_log(double x) {
    return std::log(std::max(x, std::numeric_limits<double>::min()));
}

}  // namespace

void validate(const ZinbParams& q) {
    if (!(q.pi >= 0.0 && q.pi <= 1.0))
        throw std::invalid_argument("zinb: pi must lie in [0,1]");
    if (!(q.n > 0.0))
        throw std::invalid_argument("zinb: n must be positive");
    if (!(q.p > 0.0 && q.p < 1.0))
        throw std::invalid_argument("zinb: p must lie in (0,1)");
}

void validate(const NbParams& q) {
    if (!(q.n > 0.0))
        throw std::invalid_argument("nb: n must be positive");
    if (!(q.p > 0.0 && q.p < 1.0))
        throw std::invalid_argument("nb: p must lie in (0,1)");
}

void validate(const GaussParams& q) {
    if (!(q.sigma >= kMinSigma))
        throw std::invalid_argument("gauss: sigma must be >= 1e-6");
    if (!std::isfinite(q.mu))
        throw std::invalid_argument("gauss: mu must be finite");
}

double nb_log_pmf(double n, double p, long long x) {
    const double xd = static_cast<double>(x);
    return std::lgamma(xd + n) - std::lgamma(xd + 1.0) - std::lgamma(n) +
           xd * std::log1p(-p) + n * std::log(p);
}

double zinb_pmf(const ZinbParams& q, long long x) {
    const double nb = (1.0 - q.pi) * std::exp(nb_log_pmf(q.n, q.p, x));
    return x == 0 ? q.pi + nb : nb;
}

double zinb_loglik(const ZinbParams& q, long long y, Y0Form form) {
    if (y == 0) {
        const double log_nb0 = safe_log(1.0 - q.pi) + q.n * std::log(q.p);
        if (form == Y0Form::paper_literal)
            return safe_log(q.pi) + log_nb0;
        return logaddexp(safe_log(q.pi), log_nb0);
    }
    return safe_log(1.0 - q.pi) + nb_log_pmf(q.n, q.p, y);
}

double zinb_nll(const ZinbParams& q, long long y, Y0Form form) {
    return -zinb_loglik(q, y, form);
}

ZinbGrad zinb_nll_grad(const ZinbParams& q, long long y, Y0Form form) {
    ZinbGrad g;
    const double yd = static_cast<double>(y);
    if (y == 0) {
        if (form == Y0Form::paper_literal) {
            // -d/d(.) of log(pi) + log(1-pi) + n log p
            g.dpi = -1.0 / q.pi + 1.0 / (1.0 - q.pi);
            g.dn = -std::log(q.p);
            g.dp = -q.n / q.p;
            return g;
        }
        // S = pi + (1-pi) p^n, computed with an underflow floor; for any
        // parameters the loss can see, S >= pi > 0 or p^n > 0.
        const double pn = std::exp(q.n * std::log(q.p));
        const double s = std::max(q.pi + (1.0 - q.pi) * pn, std::numeric_limits<double>::min());
        g.dpi = -(1.0 - pn) / s;
        g.dn = -(1.0 - q.pi) * pn * std::log(q.p) / s;
        g.dp = -(1.0 - q.pi) * q.n * pn / (q.p * s);
        return g;
    }
    g.dpi = 1.0 / (1.0 - q.pi);
    g.dn = -(boost::math::digamma(q.n + yd) - boost::math::digamma(q.n) + std::log(q.p));
    g.dp = -(q.n / q.p - yd / (1.0 - q.p));
    return g;
}

double zinb_mean(const ZinbParams& q) {
    return (1.0 - q.pi) * q.n * (1.0 - q.p) / q.p;
}

double zinb_variance(const ZinbParams& q) {
    const double m = q.n * (1.0 - q.p) / q.p;
    const double v = q.n * (1.0 - q.p) / (q.p * q.p);
    return (1.0 - q.pi) * v + q.pi * (1.0 - q.pi) * m * m;
}

double zinb_p_zero(const ZinbParams& q) {
    return q.pi + (1.0 - q.pi) * std::exp(q.n * std::log(q.p));
}

double zinb_entropy(const ZinbParams& q) {
    double h = 0.0;
    double cdf = 0.0;
    // Incremental NB pmf: f(0) = p^n, f(x+1) = f(x) (x+n)/(x+1) (1-p).
    double nb = std::exp(q.n * std::log(q.p));
    for (long long x = 0; x <= kEntropyCap; ++x) {
        const double f = (x == 0 ? q.pi + (1.0 - q.pi) * nb : (1.0 - q.pi) * nb);
        if (f > 0.0)
            h -= f * std::log(f);
        cdf += f;
        if (cdf > 1.0 - kEntropyTailMass)
            break;
        nb *= (static_cast<double>(x) + q.n) / (static_cast<double>(x) + 1.0) * (1.0 - q.p);
    }
    return std::max(h, 0.0);
}

long long zinb_quantile(const ZinbParams& q, double quantile) {
    if (!(quantile > 0.0 && quantile < 1.0))
        throw std::invalid_argument("quantile must lie in (0,1)");
    double cdf = 0.0;
    double nb = std::exp(q.n * std::log(q.p));
    for (long long x = 0; x <= kQuantileCap; ++x) {
        cdf += (x == 0 ? q.pi + (1.0 - q.pi) * nb : (1.0 - q.pi) * nb);
        if (cdf >= quantile)
            return x;
        nb *= (static_cast<double>(x) + q.n) / (static_cast<double>(x) + 1.0) * (1.0 - q.p);
    }
    return kQuantileCap;
}

std::pair<long long, long long> confidence_interval(const ZinbParams& q, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence level must lie in (0,1)");
    const double tail = (1.0 - level) / 2.0;
    return {zinb_quantile(q, tail), zinb_quantile(q, 1.0 - tail)};
}

double nb_loglik(const NbParams& q, long long y) {
    return nb_log_pmf(q.n, q.p, y);
}

NbGrad nb_nll_grad(const NbParams& q, long long y) {
    NbGrad g;
    const double yd = static_cast<double>(y);
    g.dn = -(boost::math::digamma(q.n + yd) - boost::math::digamma(q.n) + std::log(q.p));
    g.dp = -(q.n / q.p - yd / (1.0 - q.p));
    return g;
}

double nb_mean(const NbParams& q) {
    return q.n * (1.0 - q.p) / q.p;
}

double nb_variance(const NbParams& q) {
    return q.n * (1.0 - q.p) / (q.p * q.p);
}

double gauss_loglik(const GaussParams& q, double y) {
    const double z = (y - q.mu) / q.sigma;
    return -0.5 * std::log(2.0 * 3.14159265358979323846) - std::log(q.sigma) - 0.5 * z * z;
}

GaussGrad gauss_nll_grad(const GaussParams& q, double y) {
    GaussGrad g;
    const double d = y - q.mu;
    g.dmu = -d / (q.sigma * q.sigma);
    g.dsigma = 1.0 / q.sigma - d * d / (q.sigma * q.sigma * q.sigma);
    return g;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("normal quantile argument must lie in (0,1)");
    return std::sqrt(2.0) * boost::math::erf_inv(2.0 * q - 1.0);
}

double gauss_p_zero(const GaussParams& q) {
    return normal_cdf((0.5 - q.mu) / q.sigma) - normal_cdf((-0.5 - q.mu) / q.sigma);
}

double gauss_entropy_discrete(const GaussParams& q) {
    // Integer bins x cover (x-0.5, x+0.5]; sweep +-10 sigma around mu.
    const long long lo = static_cast<long long>(std::floor(q.mu - 10.0 * q.sigma)) - 1;
    const long long hi = static_cast<long long>(std::ceil(q.mu + 10.0 * q.sigma)) + 1;
    double h = 0.0;
    for (long long x = lo; x <= hi; ++x) {
        const double xd = static_cast<double>(x);
        const double m = normal_cdf((xd + 0.5 - q.mu) / q.sigma) -
                         normal_cdf((xd - 0.5 - q.mu) / q.sigma);
        if (m > 0.0)
            h -= m * std::log(m);
    }
    return std::max(h, 0.0);
}

double kl_histogram(std::span<const double> p_counts, std::span<const double> q_counts,
                    double epsilon) {
    if (p_counts.empty() || q_counts.empty())
        throw std::invalid_argument("kl_histogram: empty histogram");
    if (p_counts.size() != q_counts.size())
        throw std::invalid_argument("kl_histogram: histograms must share a support");
    if (!(epsilon > 0.0))
        throw std::invalid_argument("kl_histogram: epsilon must be positive");

    double p_total = 0.0, q_total = 0.0;
    for (const double c : p_counts) p_total += c;
    for (const double c : q_counts) q_total += c;
    const double bins = static_cast<double>(p_counts.size());
    const double pz = p_total + epsilon * bins;
    const double qz = q_total + epsilon * bins;

    double kl = 0.0;
    for (std::size_t i = 0; i < p_counts.size(); ++i) {
        const double p = (p_counts[i] + epsilon) / pz;
        const double q = (q_counts[i] + epsilon) / qz;
        kl += p * std::log(p / q);
    }
    return std::max(kl, 0.0);
}

}  // namespace riskgraph::dist
