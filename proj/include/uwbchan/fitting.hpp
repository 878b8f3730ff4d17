// SPDX-License-Identifier: Apache-2.0
//
// uwbchan - processing and statistical modelling of double-directional channel measurements
// Copyright (C) 2026 The uwbchan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef UWBCHAN_FITTING_HPP
#define UWBCHAN_FITTING_HPP

#include "error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace uwbchan
{

struct ConfidenceInterval
{
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double width() const { return hi - lo; }
    bool operator==(const ConfidenceInterval &) const = default;
};

struct DistanceWeighting
{
    enum class Scheme
    {
        Uniform,
        LogDistanceBins
    };

    Scheme scheme = Scheme::LogDistanceBins;
    double bin_decades = 0.1;

    void validate() const
    {
        if (!(bin_decades > 0.0))
            throw ValidationError("distance weighting: bin width must be positive");
    }
};

inline std::string to_string(DistanceWeighting::Scheme s)
{
    return s == DistanceWeighting::Scheme::Uniform ? "uniform" : "logbins";
}

inline DistanceWeighting::Scheme parse_weighting(const std::string &s)
{
    if (s == "uniform")
        return DistanceWeighting::Scheme::Uniform;
    if (s == "logbins")
        return DistanceWeighting::Scheme::LogDistanceBins;
    throw ValidationError("unknown weighting '" + s + "' (expected uniform or logbins)");
}

struct DistanceSample
{
    double distance_m = 0.0;
    double value = 0.0;
};

// value = alpha + 10 beta log10(d) + eps, eps ~ N(0, sigma_shadow)
struct PowerLawFit
{
    double alpha = 0.0;
    double beta = 0.0;
    double sigma_shadow = 0.0;
    ConfidenceInterval alpha_ci;
    ConfidenceInterval beta_ci;
    ConfidenceInterval sigma_ci;
    std::size_t n_points = 0;
    double n_eff = 0.0;
    DistanceWeighting weighting;
    std::string band;
    std::string metric_id;

    double predict(double distance_m) const { return alpha + beta * 10.0 * std::log10(distance_m); }
};

struct NormalFit
{
    double mu = 0.0;
    double sigma = 0.0;
    ConfidenceInterval mu_ci;
    ConfidenceInterval sigma_ci;
    std::size_t n = 0;
    std::string band;
    std::string metric_id;
};

// Each sample is weighted by 1 / (number of samples in its log10-distance bin);
// bins are bin_decades wide and anchored at log10 of the smallest distance.
inline std::vector<double> distance_weights(std::span<const DistanceSample> samples, const DistanceWeighting &weighting)
{
    weighting.validate();
    std::vector<double> w(samples.size(), 1.0);
    if (weighting.scheme == DistanceWeighting::Scheme::Uniform || samples.empty())
        return w;
    double min_log = std::numeric_limits<double>::infinity();
    for (const auto &s : samples)
        min_log = std::min(min_log, std::log10(s.distance_m));
    std::vector<long long> bin(samples.size());
    std::map<long long, std::size_t> counts;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        bin[i] = static_cast<long long>(std::floor((std::log10(samples[i].distance_m) - min_log) / weighting.bin_decades + 1e-9));
        ++counts[bin[i]];
    }
    for (std::size_t i = 0; i < samples.size(); ++i)
        w[i] = 1.0 / double(counts[bin[i]]);
    return w;
}

// Kish effective sample size (sum w)^2 / sum w^2.
inline double effective_sample_size(std::span<const double> weights)
{
    double s = 0.0, s2 = 0.0;
    for (double w : weights)
    {
        s += w;
        s2 += w * w;
    }
    return s * s / s2;
}

// Weighted residual standard deviation with n_eff - 2 degrees of freedom.
inline double weighted_residual_sigma(std::span<const double> residuals, std::span<const double> weights)
{
    double sw = 0.0, swr2 = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i)
    {
        sw += weights[i];
        swr2 += weights[i] * residuals[i] * residuals[i];
    }
    const double n_eff = effective_sample_size(weights);
    const double dof = n_eff - 2.0;
    if (!(dof > 1e-9))
        return std::sqrt(swr2 / sw);
    return std::sqrt(swr2 / sw * n_eff / dof);
}

// Weighted least squares of value on x = 10 log10(d).
//
// The coefficient variances use the sandwich form for homoscedastic errors:
// alpha = sum c_i y_i and beta = sum d_i y_i with
//   d_i = w_i (x_i - xbar) / Sxx,  c_i = w_i / W - xbar d_i,
// so Var = sigma^2 sum c_i^2 (resp. d_i^2). With uniform weights this is the
// ordinary least-squares covariance. Intervals use Student t and chi-square
// quantiles with n_eff - 2 degrees of freedom; with no residual degrees of
// freedom left the intervals are unbounded.
inline PowerLawFit fit_power_law(std::span<const DistanceSample> samples, const DistanceWeighting &weighting)
{
    if (samples.size() < 2)
        throw ValidationError("fit_power_law: at least 2 samples are required");
    for (const auto &s : samples)
        if (!(s.distance_m > 0.0) || !std::isfinite(s.distance_m) || !std::isfinite(s.value))
            throw ValidationError("fit_power_law: distances must be positive and values finite");

    const auto w = distance_weights(samples, weighting);
    const std::size_t n = samples.size();
    std::vector<double> x(n);
    double sw = 0.0, xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        x[i] = 10.0 * std::log10(samples[i].distance_m);
        sw += w[i];
        xbar += w[i] * x[i];
        ybar += w[i] * samples[i].value;
    }
    xbar /= sw;
    ybar /= sw;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (samples[i].value - ybar);
    }
    if (!(sxx > 1e-12 * sw))
        throw ValidationError("fit_power_law: at least 2 distinct distances are required");

    PowerLawFit fit;
    fit.beta = sxy / sxx;
    fit.alpha = ybar - fit.beta * xbar;
    fit.n_points = n;
    fit.weighting = weighting;
    fit.n_eff = effective_sample_size(w);

    std::vector<double> r(n);
    double sum_c2 = 0.0, sum_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        r[i] = samples[i].value - (fit.alpha + fit.beta * x[i]);
        const double d = w[i] * (x[i] - xbar) / sxx;
        const double c = w[i] / sw - xbar * d;
        sum_c2 += c * c;
        sum_d2 += d * d;
    }
    fit.sigma_shadow = weighted_residual_sigma(r, w);

    const double dof = fit.n_eff - 2.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!(dof > 1e-9))
    {
        fit.alpha_ci = {-inf, inf};
        fit.beta_ci = {-inf, inf};
        fit.sigma_ci = {0.0, inf};
        return fit;
    }
    const boost::math::students_t t_dist(dof);
    const double t = boost::math::quantile(t_dist, 0.975);
    const double se_a = fit.sigma_shadow * std::sqrt(sum_c2);
    const double se_b = fit.sigma_shadow * std::sqrt(sum_d2);
    fit.alpha_ci = {fit.alpha - t * se_a, fit.alpha + t * se_a};
    fit.beta_ci = {fit.beta - t * se_b, fit.beta + t * se_b};

    const boost::math::chi_squared chi2(dof);
    fit.sigma_ci = {fit.sigma_shadow * std::sqrt(dof / boost::math::quantile(chi2, 0.975)),
                    fit.sigma_shadow * std::sqrt(dof / boost::math::quantile(chi2, 0.025))};
    return fit;
}

inline std::vector<double> shadowing_residuals(std::span<const DistanceSample> samples, const PowerLawFit &fit)
{
    std::vector<double> r;
    r.reserve(samples.size());
    for (const auto &s : samples)
        r.push_back(s.value - (fit.alpha + fit.beta * 10.0 * std::log10(s.distance_m)));
    return r;
}

// Sample mean and (n - 1) standard deviation with t / chi-square 95 % intervals.
inline NormalFit fit_normal(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 2)
        throw ValidationError("fit_normal: at least 2 values are required");
    double mean = 0.0;
    for (double v : values)
    {
        if (!std::isfinite(v))
            throw ValidationError("fit_normal: values must be finite");
        mean += v;
    }
    mean /= double(n);
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);

    NormalFit fit;
    fit.n = n;
    fit.mu = mean;
    fit.sigma = std::sqrt(ss / double(n - 1));

    const double dof = double(n - 1);
    const double t = boost::math::quantile(boost::math::students_t(dof), 0.975);
    const double half = t * fit.sigma / std::sqrt(double(n));
    fit.mu_ci = {mean - half, mean + half};
    const boost::math::chi_squared chi2(dof);
    fit.sigma_ci = {fit.sigma * std::sqrt(dof / boost::math::quantile(chi2, 0.975)),
                    fit.sigma * std::sqrt(dof / boost::math::quantile(chi2, 0.025))};
    return fit;
}

} // namespace uwbchan

#endif
