#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hvolt/problem.hpp"

namespace hvolt {

/// Explicit constants behind the a-priori geometric bound
/// sup (u_{m+1} - u) <= C k^m.
struct ConvergenceCertificate {
    Regime regime = Regime::stochastic;
    double threshold = 0.0; // xi (stochastic) or eta (substochastic)
    double beta = 0.0;
    double beta0 = 0.0;
    double T0 = 0.0;
    // Stochastic factors.
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma_star = 0.0;
    // Substochastic factors.
    double sigma_sharp = 0.0;
    double sigma_hash = 0.0;
    double epsilon = 0.0;
    double k = 0.0;
    double C = 0.0;
    /// The contraction source used by k: sigma_star or sigma_hash.
    double sigma() const;
    /// Set when the certificate is technically valid but numerically
    /// useless (sigma below 1e-6).
    bool degraded = false;
    std::vector<double> bound_table; // C k^m for m = 0..size-1
};

/// The ratio function bounding v_2 / v_1 from below on (0, T0):
///   L(t) = [int_0^t p1(s) G(G(xi-beta+beta0) int_0^s p1 + beta0) ds]
///          / [(xi-beta) int_0^t p2(s) ds].
/// Stochastic regime only; requires t > 0 and beta0 > 0.
double l_function(const ProblemInstance& problem, double xi, double t);

/// Limit of L at t -> 0+:  G(beta0)/(xi-beta) * lim p1/p2.
double l_limit_zero(const ProblemInstance& problem, double xi);

/// Limit of L at t -> +infinity, by tail-bounded quadrature.
double l_limit_infinity(const ProblemInstance& problem, double xi);

struct SigmaStar {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma_star = 0.0;
};

/// sigma1 = 0.99 * inf of L over a dense t-grid plus both limits;
/// sigma2 by quadrature of its defining integral; sigma* = min.
SigmaStar sigma_star(const ProblemInstance& problem, double xi);

struct SigmaSharp {
    double sigma_sharp = 0.0;
    double sigma_hash = 0.0; // (lambda_minus / lambda_plus) * sigma_sharp
};

/// Substochastic contraction factors by direct formula evaluation.
SigmaSharp sigma_sharp(const ProblemInstance& problem, double eta);

/// k(epsilon) = (1 - phi(epsilon sigma)) / (1 - epsilon sigma).
/// Fails (CertificateFailure) when k leaves (0,1), e.g. for the identity
/// modulus.
double contraction_factor(const Nonlinearity& g, double sigma, double epsilon);

struct EpsilonChoice {
    double epsilon = 0.0;
    double k = 0.0;
};

/// Minimizes k over epsilon in {0.1, ..., 0.9} and records the choice.
EpsilonChoice minimize_contraction(const Nonlinearity& g, double sigma);

/// C k^m with C = (threshold - beta)(1 - sigma)/(1 - k).
double error_bound(const ConvergenceCertificate& certificate, std::size_t m);

/// Assembles the full certificate for the instance's regime. epsilon is
/// optional; when absent it is chosen by minimize_contraction.
ConvergenceCertificate make_certificate(const ProblemInstance& problem,
                                        std::optional<double> epsilon = std::nullopt,
                                        std::size_t table_size = 31);

} // namespace hvolt
