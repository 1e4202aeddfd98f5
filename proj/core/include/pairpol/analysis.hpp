#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pairpol/apparatus.hpp"

namespace pairpol {

//---------------------------------------------------------------------------//
/*!
 * Coincidence counts versus relative azimuth of the two fired counters.
 *
 * Bin j holds events with (counter1 - counter2) mod n == j, i.e. a relative
 * azimuth of j * pitch in [0, 360) deg. Counts are stored as doubles so that
 * synthetic (non-integer) model histograms can be analysed too.
 */
class AngleHistogram
{
  public:
    explicit AngleHistogram(int n_bins = 16);
    static AngleHistogram from_counts(std::vector<double> counts);

    void fill_counters(int counter1, int counter2);
    void fill_bin(int bin, double weight = 1.0);
    AngleHistogram& merge(AngleHistogram const& other);

    int size() const { return static_cast<int>(counts_.size()); }
    double pitch() const;               //!< radians
    double angle(int bin) const;        //!< bin centre [rad]
    double count(int bin) const;        //!< any integer, wrapped modulo size
    double at_angle(double phi) const;  //!< count of the bin nearest phi
    double total() const { return total_; }
    std::vector<double> const& counts() const { return counts_; }

    //! Mean of the Δφ and 360°-Δφ bins for Δφ in [0, 180]
    std::vector<double> folded() const;

    bool operator==(AngleHistogram const&) const = default;

  private:
    std::vector<double> counts_;
    double total_{0};
};

//! Named union of event classes
struct Selection
{
    std::string name;
    std::array<bool, event_class_count> classes{};

    bool contains(EventClass c) const
    {
        return classes[static_cast<std::size_t>(c)];
    }

    // "entangled", "a", "b", "c", "d", or "decoherent" (a, b, and c)
    static Selection parse(std::string_view name);
    bool operator==(Selection const&) const = default;
};

AngleHistogram build_histogram(std::span<EventRecord const> events,
                               Selection const& selection,
                               int n_counters = 16);

struct FitResult
{
    double A{};
    double B{};
    Eigen::Matrix2d cov{Eigen::Matrix2d::Zero()};
    double chi2{};
    int dof{};
    double R{};
    double sigma_R{};
    double mu{};
    double sigma_mu{};
};

// Weighted least squares of N = A - B cos(2 dphi) over all bins
FitResult fit_cosine(AngleHistogram const& hist);

// Curve value of a fit at relative angle phi [rad]
inline double fit_curve(FitResult const& fit, double phi)
{
    return fit.A - fit.B * std::cos(2 * phi);
}

struct Measurement
{
    double value{};
    double sigma{};
};

// (N(phi) - N(phi + 90)) / (N(phi) + N(phi + 90)) with Poisson error
Measurement correlation_coefficient(AngleHistogram const& hist, double phi);

// 3 E(phi) - E(3 phi); error includes shared bins
Measurement s_function(AngleHistogram const& hist, double phi);

//! Sampled correlation coefficients and S function of one histogram
struct CorrelationSet
{
    std::vector<double> e_angles;  //!< radians
    std::vector<Measurement> e_values;
    std::vector<double> s_angles;  //!< radians
    std::vector<Measurement> s_values;
    //! Full covariance of s_values; empty when unknown
    Eigen::MatrixXd s_cov;
};

// E at every bin angle and S at 0, 22.5, ..., 157.5 deg
CorrelationSet correlation_set(AngleHistogram const& hist);

struct SFit
{
    double p0{};
    double sigma_p0{};
    double chi2{};
    int dof{};
};

// Fit S = -p0 (3 cos 2phi - cos 6phi); uses s_cov when present
SFit fit_s_curve(CorrelationSet const& set);

inline double s_model(double p0, double phi)
{
    return -p0 * (3 * std::cos(2 * phi) - std::cos(6 * phi));
}

struct ChshReport
{
    double max_abs_s{};
    double max_abs_s_sigma{};
    double angle_of_max{};  //!< radians
    bool raw_violation{};   //!< max |S| > 2
    double normalized_max{};  //!< max |S| / p0
    double normalized_bound{};  //!< 2 sqrt 2
};

ChshReport chsh_report(CorrelationSet const& set, SFit const& fit);

}  // namespace pairpol
