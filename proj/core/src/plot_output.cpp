#include "pairpol/plot_output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pairpol/errors.hpp"

namespace pairpol {
namespace {

constexpr double rad_to_deg = 180.0 / pi;

std::string num(double v)
{
    char buf[32];
    int const n = std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

class CsvFile
{
  public:
    CsvFile(std::filesystem::path path, char const* header)
        : path_(std::move(path)), out_(path_, std::ios::binary)
    {
        if (!out_)
            throw IoError("cannot open '" + path_.string() + "' for writing");
        out_ << header << '\n';
    }

    void row(double angle_deg, double value)
    {
        out_ << num(angle_deg) << ',' << num(value) << '\n';
    }
    void row(double angle_deg, double value, double sigma)
    {
        out_ << num(angle_deg) << ',' << num(value) << ',' << num(sigma) << '\n';
    }

    void close()
    {
        out_.close();
        if (out_.fail())
            throw IoError("failed writing '" + path_.string() + "'");
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct Point
{
    double x;
    double y;
    double sigma;
};

//! Minimal scatter-with-errors plus curve plot
std::string svg_plot(std::string const& title,
                     std::string const& y_label,
                     double x_max,
                     std::vector<Point> const& points,
                     std::vector<std::pair<double, double>> const& curve)
{
    double constexpr width = 640;
    double constexpr height = 400;
    double constexpr left = 70;
    double constexpr right = 20;
    double constexpr top = 40;
    double constexpr bottom = 50;

    double y_lo = 0;
    double y_hi = 0;
    bool first = true;
    auto extend = [&](double y) {
        if (first)
        {
            y_lo = y_hi = y;
            first = false;
        }
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    };
    for (auto const& p : points)
    {
        extend(p.y - p.sigma);
        extend(p.y + p.sigma);
    }
    for (auto const& c : curve)
        extend(c.second);
    if (first || y_hi - y_lo <= 0)
    {
        y_lo -= 1;
        y_hi += 1;
    }
    double const pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    auto sx = [&](double x) { return left + (width - left - right) * x / x_max; };
    auto sy = [&](double y) {
        return top + (height - top - bottom) * (y_hi - y) / (y_hi - y_lo);
    };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << title << "</text>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right
       << "\" height=\"" << height - top - bottom
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k)
    {
        double const x = x_max * k / 4;
        os << "<text x=\"" << num(sx(x)) << "\" y=\"" << height - bottom + 18
           << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
        double const y = y_lo + (y_hi - y_lo) * k / 4;
        os << "<text x=\"" << left - 6 << "\" y=\"" << num(sy(y) + 4)
           << "\" text-anchor=\"end\">" << num(std::round(y * 1000) / 1000) << "</text>\n";
    }
    os << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
       << "\" text-anchor=\"middle\">angle [deg]</text>\n"
       << "<text x=\"16\" y=\"" << height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << height / 2 << ")\">" << y_label << "</text>\n";
    if (!curve.empty())
    {
        os << "<polyline fill=\"none\" stroke=\"#c0392b\" points=\"";
        for (auto const& [x, y] : curve)
            os << num(sx(x)) << ',' << num(sy(y)) << ' ';
        os << "\"/>\n";
    }
    for (auto const& p : points)
    {
        os << "<line x1=\"" << num(sx(p.x)) << "\" x2=\"" << num(sx(p.x)) << "\" y1=\""
           << num(sy(p.y - p.sigma)) << "\" y2=\"" << num(sy(p.y + p.sigma))
           << "\" stroke=\"black\"/>\n"
           << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.y))
           << "\" r=\"3\" fill=\"black\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text(std::filesystem::path const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (out.fail())
        throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::vector<std::string> emit_plot_data(RunSummary const& summary,
                                        std::filesystem::path const& dir)
{
    std::vector<std::string> written;
    auto path = [&](std::string const& name) {
        written.push_back(name);
        return dir / name;
    };

    for (auto const& r : summary.selections)
    {
        std::string const& s = r.selection.name;
        bool const has_data = r.hist.total() > 0;
        AngleHistogram const& h = r.hist;

        std::vector<Point> hist_points;
        CsvFile hist(path("hist_" + s + ".csv"), "angle_deg,value,sigma");
        if (has_data)
        {
            for (int j = 0; j < h.size(); ++j)
            {
                double const a = h.angle(j) * rad_to_deg;
                hist.row(a, h.count(j), std::sqrt(h.count(j)));
                hist_points.push_back({a, h.count(j), std::sqrt(h.count(j))});
            }
        }
        hist.close();

        CsvFile folded(path("hist_" + s + "_folded.csv"), "angle_deg,value,sigma");
        if (has_data)
        {
            auto const f = h.folded();
            int const n = h.size();
            for (int j = 0; j <= n / 2; ++j)
            {
                bool const single = j == 0 || 2 * j == n;
                double const value = f[static_cast<std::size_t>(j)];
                double const sigma = single ? std::sqrt(value) : std::sqrt(value / 2);
                folded.row(h.angle(j) * rad_to_deg, value, sigma);
            }
        }
        folded.close();

        std::vector<std::pair<double, double>> fit_curve_points;
        CsvFile fit(path("fit_" + s + ".csv"), "angle_deg,value");
        if (r.fit)
        {
            for (int deg = 0; deg < 360; ++deg)
            {
                double const v = fit_curve(*r.fit, deg / rad_to_deg);
                fit.row(deg, v);
                fit_curve_points.emplace_back(deg, v);
            }
        }
        fit.close();

        CsvFile corr(path("corr_" + s + ".csv"), "angle_deg,value,sigma");
        CsvFile scurve(path("s_" + s + ".csv"), "angle_deg,value,sigma");
        std::vector<Point> s_points;
        if (r.correlations)
        {
            auto const& c = *r.correlations;
            for (std::size_t i = 0; i < c.e_values.size(); ++i)
                corr.row(c.e_angles[i] * rad_to_deg, c.e_values[i].value, c.e_values[i].sigma);
            for (std::size_t i = 0; i < c.s_values.size(); ++i)
            {
                double const a = c.s_angles[i] * rad_to_deg;
                scurve.row(a, c.s_values[i].value, c.s_values[i].sigma);
                s_points.push_back({a, c.s_values[i].value, c.s_values[i].sigma});
            }
        }
        corr.close();
        scurve.close();

        std::vector<std::pair<double, double>> s_curve_points;
        CsvFile sfit(path("s_fit_" + s + ".csv"), "angle_deg,value");
        if (r.s_fit)
        {
            for (int deg = 0; deg < 180; ++deg)
            {
                double const v = s_model(r.s_fit->p0, deg / rad_to_deg);
                sfit.row(deg, v);
                s_curve_points.emplace_back(deg, v);
            }
        }
        sfit.close();

        write_text(path("hist_" + s + ".svg"),
                   svg_plot("coincidences, selection " + s,
                            "counts",
                            360,
                            hist_points,
                            fit_curve_points));
        write_text(path("s_" + s + ".svg"),
                   svg_plot("S function, selection " + s, "S", 180, s_points, s_curve_points));
    }
    return written;
}

}  // namespace pairpol
