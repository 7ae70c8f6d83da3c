#include "hvolt/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hvolt/errors.hpp"
#include "hvolt/quadrature.hpp"

namespace hvolt {

double ConvergenceCertificate::sigma() const {
    return regime == Regime::stochastic ? sigma_star : sigma_hash;
}

namespace {

constexpr double kDegradedFloor = 1e-6;

void require_stochastic_rate_data(const ProblemInstance& problem) {
    if (problem.regime() != Regime::stochastic) {
        throw std::invalid_argument("L is defined in the stochastic regime");
    }
    if (!problem.weight().has_envelopes()) {
        throw std::invalid_argument("L needs the envelope functions p1, p2");
    }
    if (!(problem.source().beta0() > 0.0)) {
        throw std::invalid_argument("L needs beta0 > 0");
    }
}

// int_0^W G(A w + beta0) dw, the numerator of L after substituting
// w = int_0^s p1.
double numerator_integral(const Nonlinearity& g, double a, double beta0, double w) {
    if (w <= 0.0) {
        return 0.0;
    }
    return quad::adaptive_simpson([&](double t) { return g(a * t + beta0); }, 0.0, w,
                                  1e-13 * std::max(1.0, w));
}

double limit_ratio_or_sampled(const ProblemInstance& problem) {
    const auto& weight = problem.weight();
    if (auto limit = weight.limit_ratio0()) {
        return *limit;
    }
    // Sampled fallback at the two smallest positive grid times; they must
    // agree within 5% for the limit to be trusted.
    const auto& grid = problem.time();
    const double t1 = grid.node(1);
    const double t2 = grid.node(2);
    const double r1 = weight.p1(t1) / weight.p2(t1);
    const double r2 = weight.p1(t2) / weight.p2(t2);
    if (std::abs(r1 - r2) > 0.05 * std::max({r1, r2, 1e-300})) {
        throw CertificateFailure("p1/p2 limit samples disagree beyond 5%");
    }
    return r1;
}

} // namespace

double l_function(const ProblemInstance& problem, double xi, double t) {
    require_stochastic_rate_data(problem);
    if (!(t > 0.0)) {
        throw std::invalid_argument("L requires t > 0");
    }
    const auto& weight = problem.weight();
    const double beta = problem.source().beta();
    const double beta0 = problem.source().beta0();
    const double a = problem.nonlinearity()(xi - beta + beta0);
    const double numer = numerator_integral(problem.nonlinearity(), a, beta0, weight.P1(t));
    const double denom = (xi - beta) * weight.P2(t);
    return numer / denom;
}

double l_limit_zero(const ProblemInstance& problem, double xi) {
    require_stochastic_rate_data(problem);
    const double beta = problem.source().beta();
    const double beta0 = problem.source().beta0();
    return problem.nonlinearity()(beta0) / (xi - beta) * limit_ratio_or_sampled(problem);
}

double l_limit_infinity(const ProblemInstance& problem, double xi) {
    require_stochastic_rate_data(problem);
    const auto& weight = problem.weight();
    const double beta = problem.source().beta();
    const double beta0 = problem.source().beta0();
    const double a = problem.nonlinearity()(xi - beta + beta0);
    const double numer =
        numerator_integral(problem.nonlinearity(), a, beta0, weight.P1_total());
    return numer / ((xi - beta) * weight.P2_total());
}

SigmaStar sigma_star(const ProblemInstance& problem, double xi) {
    require_stochastic_rate_data(problem);
    const auto& weight = problem.weight();
    const auto& g = problem.nonlinearity();
    const double beta = problem.source().beta();
    const double t0 = problem.source().T0();

    const double limit0 = l_limit_zero(problem, xi);
    const double limit_inf = l_limit_infinity(problem, xi);

    double inf_l = std::min(limit0, limit_inf);
    const double t_ref = std::max({problem.time().horizon(), t0, 1.0});
    const double t_lo = 1e-4 * t_ref;
    const double t_hi = 40.0 * t_ref;
    const int samples = 257;
    for (int i = 0; i < samples; ++i) {
        const double t =
            t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (samples - 1));
        inf_l = std::min(inf_l, l_function(problem, xi, t));
    }

    SigmaStar out;
    out.sigma1 = 0.99 * inf_l;

    // sigma2 = (1/(xi-beta)) int_0^{P1(T0)} G(G(xi-beta) w) dw.
    const double g_xi_beta = g(xi - beta);
    const double w_t0 = weight.P1(t0);
    const double integral = w_t0 <= 0.0
                                ? 0.0
                                : quad::adaptive_simpson(
                                      [&](double w) { return g(g_xi_beta * w); }, 0.0,
                                      w_t0, 1e-13 * std::max(1.0, w_t0));
    out.sigma2 = integral / (xi - beta);
    out.sigma_star = std::min(out.sigma1, out.sigma2);

    if (!(out.sigma_star > 0.0) || !(out.sigma_star < 1.0)) {
        throw CertificateFailure("sigma* left (0,1); an upstream assumption is violated");
    }
    return out;
}

SigmaSharp sigma_sharp(const ProblemInstance& problem, double eta) {
    if (problem.regime() != Regime::substochastic) {
        throw std::invalid_argument("sigma_sharp is defined in the substochastic regime");
    }
    const double alpha = problem.weight().inf_h();
    const double beta = problem.source().beta();
    const double beta0 = problem.source().beta0();
    const double t0 = problem.source().T0();
    const double lm = problem.kernel().lambda_minus();
    const double lp = problem.kernel().lambda_plus();
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("sigma_sharp needs alpha = inf h > 0");
    }
    if (!(beta0 > 0.0)) {
        throw std::invalid_argument("sigma_sharp needs beta0 > 0");
    }
    if (!(lm > 0.0) || !(lp >= lm)) {
        throw std::invalid_argument("sigma_sharp needs lambda_plus >= lambda_minus > 0");
    }

    const auto& g = problem.nonlinearity();
    const double denom = (eta - beta) * lm;
    const double first = alpha * g(beta0) / denom;
    const double inner = (alpha / lp) * g(eta - beta) * (1.0 - std::exp(-t0 * lp));
    const double second = alpha / denom * g(inner);

    SigmaSharp out;
    out.sigma_sharp = std::min(first, second);
    out.sigma_hash = lm / lp * out.sigma_sharp;
    if (!(out.sigma_sharp > 0.0) || !(out.sigma_sharp < 1.0) ||
        !(out.sigma_hash > 0.0) || !(out.sigma_hash < 1.0)) {
        throw CertificateFailure("sigma# left (0,1); an upstream assumption is violated");
    }
    return out;
}

double contraction_factor(const Nonlinearity& g, double sigma, double epsilon) {
    if (!(sigma > 0.0) || !(sigma < 1.0)) {
        throw std::invalid_argument("sigma must lie in (0,1)");
    }
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) {
        throw std::invalid_argument("epsilon must lie in (0,1)");
    }
    if (!g.has_phi()) {
        throw CertificateFailure("contraction factor needs a concavity modulus");
    }
    const double es = epsilon * sigma;
    const double k = (1.0 - g.phi(es)) / (1.0 - es);
    if (!(k > 0.0) || !(k < 1.0)) {
        throw CertificateFailure("k left (0,1); the modulus yields no geometric rate");
    }
    return k;
}

EpsilonChoice minimize_contraction(const Nonlinearity& g, double sigma) {
    EpsilonChoice best{0.0, 2.0};
    for (int i = 1; i <= 9; ++i) {
        const double eps = 0.1 * static_cast<double>(i);
        const double k = contraction_factor(g, sigma, eps);
        if (k < best.k) {
            best = {eps, k};
        }
    }
    return best;
}

double error_bound(const ConvergenceCertificate& certificate, std::size_t m) {
    return certificate.C * std::pow(certificate.k, static_cast<double>(m));
}

ConvergenceCertificate make_certificate(const ProblemInstance& problem,
                                        std::optional<double> epsilon,
                                        std::size_t table_size) {
    ConvergenceCertificate cert;
    cert.regime = problem.regime();
    cert.beta = problem.source().beta();
    cert.beta0 = problem.source().beta0();
    cert.T0 = problem.source().T0();

    double sigma;
    if (cert.regime == Regime::stochastic) {
        cert.threshold = solve_xi(problem.nonlinearity(), cert.beta);
        const SigmaStar s = sigma_star(problem, cert.threshold);
        cert.sigma1 = s.sigma1;
        cert.sigma2 = s.sigma2;
        cert.sigma_star = s.sigma_star;
        sigma = s.sigma_star;
    } else {
        cert.threshold = solve_eta(problem.nonlinearity(), cert.beta,
                                   problem.weight().sup_h(),
                                   problem.kernel().lambda_minus());
        const SigmaSharp s = sigma_sharp(problem, cert.threshold);
        cert.sigma_sharp = s.sigma_sharp;
        cert.sigma_hash = s.sigma_hash;
        sigma = s.sigma_hash;
    }
    cert.degraded = sigma < kDegradedFloor;

    if (epsilon) {
        cert.epsilon = *epsilon;
        cert.k = contraction_factor(problem.nonlinearity(), sigma, *epsilon);
    } else {
        const EpsilonChoice choice = minimize_contraction(problem.nonlinearity(), sigma);
        cert.epsilon = choice.epsilon;
        cert.k = choice.k;
    }
    cert.degraded = cert.degraded || cert.k > 1.0 - 1e-9;

    cert.C = (cert.threshold - cert.beta) * (1.0 - sigma) / (1.0 - cert.k);
    cert.bound_table.resize(table_size);
    for (std::size_t m = 0; m < table_size; ++m) {
        cert.bound_table[m] = error_bound(cert, m);
    }
    return cert;
}

} // namespace hvolt
