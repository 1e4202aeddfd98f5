#pragma once

#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace stats {

inline double chi2_pvalue(double chi2, double dof)
{
    boost::math::chi_squared const dist(dof);
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

//! Pearson chi-square p-value of observed counts against expected counts
inline double pearson_pvalue(std::vector<double> const& observed,
                             std::vector<double> const& expected,
                             int fitted_parameters = 0)
{
    double chi2 = 0;
    for (std::size_t i = 0; i < observed.size(); ++i)
    {
        double const d = observed[i] - expected[i];
        chi2 += d * d / expected[i];
    }
    auto const dof = static_cast<double>(observed.size()) - 1 - fitted_parameters;
    return chi2_pvalue(chi2, dof);
}

inline double flat_pvalue(std::vector<double> const& observed)
{
    double total = 0;
    for (double o : observed)
        total += o;
    std::vector<double> const expected(observed.size(), total / observed.size());
    return pearson_pvalue(observed, expected);
}

}  // namespace stats
