#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace riskgraph::dist {

// Clamping bounds shared by parameter heads and likelihoods.
inline constexpr double kMinP = 1e-6;
inline constexpr double kMaxP = 1.0 - 1e-6;
inline constexpr double kMaxPi = 1.0 - 1e-6;
inline constexpr double kMinSigma = 1e-6;
inline constexpr double kMinN = 1e-4;

/// Zero-inflated negative binomial: extra mass pi at zero on top of NB(n, p),
/// where p is the per-trial success probability and counts are failures
/// before the n-th success. n may be non-integer (gamma generalization).
struct ZinbParams {
    double pi = 0.0;
    double n = 1.0;
    double p = 0.5;
};

struct NbParams {
    double n = 1.0;
    double p = 0.5;
};

struct GaussParams {
    double mu = 0.0;
    double sigma = 1.0;
};

/// How the y=0 log-likelihood branch is computed. `exact` is
/// log(pi + (1-pi) p^n); `paper_literal` is log(pi) + log(1-pi) + n log(p),
/// which is not a normalized likelihood and breaks pmf consistency.
enum class Y0Form { exact, paper_literal };

void validate(const ZinbParams& q);
void validate(const NbParams& q);
void validate(const GaussParams& q);

double nb_log_pmf(double n, double p, long long x);

double zinb_pmf(const ZinbParams& q, long long x);
double zinb_loglik(const ZinbParams& q, long long y, Y0Form form = Y0Form::exact);
double zinb_nll(const ZinbParams& q, long long y, Y0Form form = Y0Form::exact);

struct ZinbGrad {
    double dpi = 0.0;
    double dn = 0.0;
    double dp = 0.0;
};
/// Analytic gradient of zinb_nll in (pi, n, p).
ZinbGrad zinb_nll_grad(const ZinbParams& q, long long y, Y0Form form = Y0Form::exact);

double zinb_mean(const ZinbParams& q);
double zinb_variance(const ZinbParams& q);
double zinb_p_zero(const ZinbParams& q);

/// Shannon entropy in nats over the truncated support (CDF > 1 - 1e-9,
/// capped at x = 10000).
double zinb_entropy(const ZinbParams& q);

/// Smallest x with CDF(x) >= quantile.
long long zinb_quantile(const ZinbParams& q, double quantile);
std::pair<long long, long long> confidence_interval(const ZinbParams& q, double level);

double nb_loglik(const NbParams& q, long long y);
struct NbGrad {
    double dn = 0.0;
    double dp = 0.0;
};
NbGrad nb_nll_grad(const NbParams& q, long long y);
double nb_mean(const NbParams& q);
double nb_variance(const NbParams& q);

double gauss_loglik(const GaussParams& q, double y);
struct GaussGrad {
    double dmu = 0.0;
    double dsigma = 0.0;
};
GaussGrad gauss_nll_grad(const GaussParams& q, double y);

/// Probability mass of the rounded-to-zero interval (-0.5, 0.5).
double gauss_p_zero(const GaussParams& q);
/// Entropy in nats of the integer-rounded Gaussian (mass per integer bin).
double gauss_entropy_discrete(const GaussParams& q);

double normal_cdf(double x);
double normal_quantile(double q);

/// KL(P||Q) of two count histograms over the same integer support, each
/// normalized with additive smoothing `epsilon` per bin.
double kl_histogram(std::span<const double> p_counts, std::span<const double> q_counts,
                    double epsilon);

}  // namespace riskgraph::dist
