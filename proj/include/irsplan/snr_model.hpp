// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsplan/radiomap.hpp"
#include "irsplan/scenario.hpp"

#include <Eigen/Core>

#include <string>

namespace irsplan
{

/// Fitted optimal-SNR model
///   snr(d_i, d_a) = (A d_i^-nu + B d_i^-nu/2 d_a^-mu/2 + C d_a^-mu) p_t / sigma^2.
struct SnrModel
{
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double nu = 2.0;
    double mu = 2.0;
    double fit_residual_db = 0.0; ///< RMS residual over the fitted cells
    bool converged = true;
    int iterations = 0;
};

double model_snr(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2);

/// Per-point rate r = B_w log2(1 + model_snr).
double model_rate(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2, double bandwidth_hz);

struct RateGradient
{
    double d_i = 0.0; ///< dr/dd_i [bit/s/m]
    double d_a = 0.0; ///< dr/dd_a [bit/s/m]
};

RateGradient rate_gradient(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2,
                           double bandwidth_hz);

/// Closed-form Hessian of the per-point rate in (d_i, d_a); order (d_i, d_a).
Eigen::Matrix2d rate_hessian(const SnrModel &m, double d_i, double d_a, double p_t, double sigma2,
                             double bandwidth_hz);

struct FitOptions
{
    int max_iterations = 2000; ///< per start
    double tolerance = 1e-14;  ///< relative cost change
};

/// Nonnegative nonlinear least squares of the model against the map in dB.
/// Multistart from (nu, mu) in {2, 4.5}^2 with two gain initializations each.
/// When no start meets the tolerance the best iterate is returned with converged = false.
SnrModel fit_model(const RadioMap &map, const Scenario &s, const FitOptions &opt = {});

/// Same fit on explicit samples (distances and linear SNR), used by fit_model.
SnrModel fit_samples(const Eigen::VectorXd &d_i, const Eigen::VectorXd &d_a, const Eigen::VectorXd &snr,
                     double p_t, double sigma2, const FitOptions &opt = {});

void save_model(const SnrModel &m, const std::string &path);
SnrModel load_model(const std::string &path);

} // namespace irsplan
