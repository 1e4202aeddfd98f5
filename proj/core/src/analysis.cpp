#include "pairpol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "pairpol/errors.hpp"

namespace pairpol {
namespace {

int wrap(int i, int n)
{
    int r = i % n;
    return r < 0 ? r + n : r;
}

int bin_of(AngleHistogram const& hist, double phi)
{
    return wrap(static_cast<int>(std::lround(phi / hist.pitch())), hist.size());
}

//! Correlation coefficient plus its gradient with respect to the two bins
struct CorrelationTerm
{
    int bin_par;
    int bin_perp;
    double value;
    double d_par;
    double d_perp;
};

CorrelationTerm correlation_term(AngleHistogram const& hist, double phi)
{
    if (hist.size() % 4 != 0)
        throw std::invalid_argument("correlation needs a bin count divisible by 4");
    int const j = bin_of(hist, phi);
    int const k = wrap(j + hist.size() / 4, hist.size());
    double const n1 = hist.count(j);
    double const n2 = hist.count(k);
    double const sum = n1 + n2;
    if (!(sum > 0))
    {
        throw UndefinedCorrelationError(
            "no counts at " + std::to_string(j) + " and "
            + std::to_string(k) + " (correlation undefined)");
    }
    return {j, k, (n1 - n2) / sum, 2 * n2 / (sum * sum), -2 * n1 / (sum * sum)};
}

//! Gradient of S(phi) with respect to every bin
std::pair<double, Eigen::VectorXd>
s_with_gradient(AngleHistogram const& hist, double phi)
{
    CorrelationTerm const e1 = correlation_term(hist, phi);
    CorrelationTerm const e3 = correlation_term(hist, 3 * phi);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(hist.size());
    grad[e1.bin_par] += 3 * e1.d_par;
    grad[e1.bin_perp] += 3 * e1.d_perp;
    grad[e3.bin_par] -= e3.d_par;
    grad[e3.bin_perp] -= e3.d_perp;
    return {3 * e1.value - e3.value, std::move(grad)};
}

Eigen::VectorXd poisson_variances(AngleHistogram const& hist)
{
    Eigen::VectorXd v(hist.size());
    for (int b = 0; b < hist.size(); ++b)
        v[b] = hist.count(b);
    return v;
}

}  // namespace

//---------------------------------------------------------------------------//
AngleHistogram::AngleHistogram(int n_bins)
{
    if (n_bins < 1)
        throw std::invalid_argument("histogram needs at least one bin");
    counts_.assign(static_cast<std::size_t>(n_bins), 0.0);
}

AngleHistogram AngleHistogram::from_counts(std::vector<double> counts)
{
    AngleHistogram h(static_cast<int>(counts.size()));
    for (double c : counts)
    {
        if (!(c >= 0))
            throw std::invalid_argument("histogram counts must be non-negative");
    }
    h.counts_ = std::move(counts);
    for (double c : h.counts_)
        h.total_ += c;
    return h;
}

void AngleHistogram::fill_counters(int counter1, int counter2)
{
    this->fill_bin(wrap(counter1 - counter2, this->size()));
}

void AngleHistogram::fill_bin(int bin, double weight)
{
    counts_[static_cast<std::size_t>(wrap(bin, this->size()))] += weight;
    total_ += weight;
}

AngleHistogram& AngleHistogram::merge(AngleHistogram const& other)
{
    if (other.size() != this->size())
        throw std::invalid_argument("cannot merge histograms of different size");
    for (std::size_t i = 0; i < counts_.size(); ++i)
        counts_[i] += other.counts_[i];
    total_ += other.total_;
    return *this;
}

double AngleHistogram::pitch() const
{
    return 2 * pi / this->size();
}

double AngleHistogram::angle(int bin) const
{
    return bin * this->pitch();
}

double AngleHistogram::count(int bin) const
{
    return counts_[static_cast<std::size_t>(wrap(bin, this->size()))];
}

double AngleHistogram::at_angle(double phi) const
{
    return this->count(bin_of(*this, phi));
}

std::vector<double> AngleHistogram::folded() const
{
    int const n = this->size();
    std::vector<double> out(static_cast<std::size_t>(n / 2 + 1));
    for (int j = 0; j <= n / 2; ++j)
    {
        int const mirror = wrap(n - j, n);
        out[static_cast<std::size_t>(j)]
            = mirror == j ? this->count(j) : 0.5 * (this->count(j) + this->count(mirror));
    }
    return out;
}

//---------------------------------------------------------------------------//
Selection Selection::parse(std::string_view name)
{
    Selection s;
    s.name = std::string(name);
    auto set = [&s](EventClass c) { s.classes[static_cast<std::size_t>(c)] = true; };
    if (name == "entangled")
    {
        set(EventClass::entangled_candidate);
    }
    else if (name == "decoherent")
    {
        set(EventClass::a);
        set(EventClass::b);
        set(EventClass::c);
    }
    else if (name == "a" || name == "b" || name == "c" || name == "d")
    {
        set(*event_class_from_string(name));
    }
    else
    {
        throw std::invalid_argument("unknown selection '" + std::string(name) + "'");
    }
    return s;
}

AngleHistogram build_histogram(std::span<EventRecord const> events,
                               Selection const& selection,
                               int n_counters)
{
    AngleHistogram hist(n_counters);
    for (auto const& e : events)
    {
        if (selection.contains(e.class_tag))
            hist.fill_counters(e.counter1, e.counter2);
    }
    return hist;
}

//---------------------------------------------------------------------------//
FitResult fit_cosine(AngleHistogram const& hist)
{
    int const n = hist.size();
    if (!(hist.total() > 0))
        throw FitDegenerateError("cannot fit an empty histogram");

    int nonempty = 0;
    double cos_min = 2;
    double cos_max = -2;
    for (int j = 0; j < n; ++j)
    {
        if (hist.count(j) > 0)
        {
            ++nonempty;
            double const c = std::cos(2 * hist.angle(j));
            cos_min = std::min(cos_min, c);
            cos_max = std::max(cos_max, c);
        }
    }
    if (nonempty < 3 || cos_max - cos_min < 1e-12)
    {
        throw FitDegenerateError(
            "cosine fit needs at least 3 filled bins with distinct cos(2 dphi)");
    }

    Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    for (int j = 0; j < n; ++j)
    {
        Eigen::Vector2d const x(1.0, std::cos(2 * hist.angle(j)));
        double const w = 1.0 / std::max(hist.count(j), 1.0);
        normal += w * x * x.transpose();
        rhs += w * hist.count(j) * x;
    }
    Eigen::Matrix2d const inv = normal.inverse();
    Eigen::Vector2d const coef = inv * rhs;

    FitResult r;
    r.A = coef[0];
    r.B = -coef[1];
    r.cov << inv(0, 0), -inv(0, 1), -inv(1, 0), inv(1, 1);
    for (int j = 0; j < n; ++j)
    {
        double const resid = hist.count(j) - fit_curve(r, hist.angle(j));
        r.chi2 += resid * resid / std::max(hist.count(j), 1.0);
    }
    r.dof = n - 2;

    double const diff = r.A - r.B;
    r.R = (r.A + r.B) / diff;
    r.mu = r.B / r.A;
    Eigen::Vector2d const grad_r(-2 * r.B / (diff * diff), 2 * r.A / (diff * diff));
    Eigen::Vector2d const grad_mu(-r.B / (r.A * r.A), 1 / r.A);
    r.sigma_R = std::sqrt(grad_r.dot(r.cov * grad_r));
    r.sigma_mu = std::sqrt(grad_mu.dot(r.cov * grad_mu));
    return r;
}

//---------------------------------------------------------------------------//
Measurement correlation_coefficient(AngleHistogram const& hist, double phi)
{
    CorrelationTerm const t = correlation_term(hist, phi);
    double const n1 = hist.count(t.bin_par);
    double const n2 = hist.count(t.bin_perp);
    double const var = t.d_par * t.d_par * n1 + t.d_perp * t.d_perp * n2;
    return {t.value, std::sqrt(var)};
}

Measurement s_function(AngleHistogram const& hist, double phi)
{
    auto const [value, grad] = s_with_gradient(hist, phi);
    double const var = grad.dot(poisson_variances(hist).cwiseProduct(grad));
    return {value, std::sqrt(var)};
}

CorrelationSet correlation_set(AngleHistogram const& hist)
{
    CorrelationSet set;
    int const n = hist.size();
    for (int j = 0; j < n; ++j)
    {
        set.e_angles.push_back(hist.angle(j));
        set.e_values.push_back(correlation_coefficient(hist, hist.angle(j)));
    }

    int const n_s = n / 2;
    Eigen::MatrixXd grads(n_s, n);
    for (int j = 0; j < n_s; ++j)
    {
        auto const [value, grad] = s_with_gradient(hist, hist.angle(j));
        set.s_angles.push_back(hist.angle(j));
        grads.row(j) = grad.transpose();
        set.s_values.push_back({value, 0.0});
    }
    set.s_cov = grads * poisson_variances(hist).asDiagonal() * grads.transpose();
    for (int j = 0; j < n_s; ++j)
        set.s_values[static_cast<std::size_t>(j)].sigma = std::sqrt(set.s_cov(j, j));
    return set;
}

//---------------------------------------------------------------------------//
SFit fit_s_curve(CorrelationSet const& set)
{
    std::vector<int> used;
    for (std::size_t i = 0; i < set.s_values.size(); ++i)
    {
        double const s = set.s_values[i].sigma;
        if (std::isfinite(s) && s > 0 && std::isfinite(set.s_values[i].value))
            used.push_back(static_cast<int>(i));
    }
    if (used.size() < 2)
        throw FitDegenerateError("S fit needs at least 2 points with finite sigma");

    int const m = static_cast<int>(used.size());
    Eigen::VectorXd y(m);
    Eigen::VectorXd f(m);
    for (int k = 0; k < m; ++k)
    {
        auto const i = static_cast<std::size_t>(used[static_cast<std::size_t>(k)]);
        y[k] = set.s_values[i].value;
        f[k] = s_model(1.0, set.s_angles[i]);
    }
    if (f.cwiseAbs().maxCoeff() < 1e-12)
        throw FitDegenerateError("S basis vanishes at every sampled angle");

    Eigen::MatrixXd cov(m, m);
    bool const full = set.s_cov.rows() == static_cast<Eigen::Index>(set.s_values.size())
                      && set.s_cov.cols() == set.s_cov.rows();
    for (int a = 0; a < m; ++a)
    {
        for (int b = 0; b < m; ++b)
        {
            auto const ia = used[static_cast<std::size_t>(a)];
            auto const ib = used[static_cast<std::size_t>(b)];
            if (full)
                cov(a, b) = set.s_cov(ia, ib);
            else
                cov(a, b) = a == b ? std::pow(set.s_values[static_cast<std::size_t>(ia)].sigma, 2)
                                   : 0.0;
        }
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
    {
        Eigen::MatrixXd diag = cov.diagonal().asDiagonal();
        llt.compute(diag);
    }
    Eigen::VectorXd const cinv_f = llt.solve(f);
    Eigen::VectorXd const cinv_y = llt.solve(y);
    double const info = f.dot(cinv_f);

    SFit r;
    r.p0 = f.dot(cinv_y) / info;
    r.sigma_p0 = 1 / std::sqrt(info);
    Eigen::VectorXd const resid = y - r.p0 * f;
    r.chi2 = resid.dot(llt.solve(resid));
    r.dof = m - 1;
    return r;
}

ChshReport chsh_report(CorrelationSet const& set, SFit const& fit)
{
    ChshReport r;
    for (std::size_t i = 0; i < set.s_values.size(); ++i)
    {
        double const a = std::abs(set.s_values[i].value);
        if (a > r.max_abs_s)
        {
            r.max_abs_s = a;
            r.max_abs_s_sigma = set.s_values[i].sigma;
            r.angle_of_max = set.s_angles[i];
        }
    }
    r.raw_violation = r.max_abs_s > 2;
    r.normalized_max = fit.p0 != 0 ? r.max_abs_s / std::abs(fit.p0)
                                   : std::numeric_limits<double>::quiet_NaN();
    r.normalized_bound = 2 * std::sqrt(2.0);
    return r;
}

}  // namespace pairpol
