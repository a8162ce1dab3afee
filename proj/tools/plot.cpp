#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cli.hpp"
#include "rlcnet/error.hpp"
#include "rlcnet/io.hpp"

namespace rlcnet::cli {

namespace {

constexpr double kWidth = 900, kHeight = 480;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;

std::string fixed(double v, int digits = 3)
{
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

std::string escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const std::string& title)
{
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    double ymin = tmin, ymax = -tmin;
    for (const auto& s : series) {
        if (s.t.size() != s.y.size()) throw InvalidArgument("plot series '" + s.label + "' has ragged data");
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            tmin = std::min(tmin, s.t[i]);
            tmax = std::max(tmax, s.t[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(tmin < tmax)) throw InvalidArgument("nothing to plot");
    if (!(ymin < ymax)) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double t) { return kLeft + (t - tmin) / (tmax - tmin) * pw; };
    auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";

    // Axes and ticks.
    svg << "<g stroke=\"black\" fill=\"none\">\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
        << "\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph << "\"/>\n";
    svg << "</g>\n<g fill=\"black\">\n";
    constexpr int kTicks = 5;
    for (int i = 0; i <= kTicks; ++i) {
        const double t = tmin + (tmax - tmin) * i / kTicks;
        const double y = ymin + (ymax - ymin) * i / kTicks;
        svg << "<text x=\"" << fixed(px(t), 1) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
            << fixed(t) << "</text>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(py(y) + 4, 1) << "\" text-anchor=\"end\">"
            << fixed(y) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">t (s)</text>\n";
    svg << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << kTop + ph / 2 << ")\">I (A)</text>\n</g>\n";

    for (const auto& s : series) {
        svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            if (i) svg << ' ';
            svg << fixed(px(s.t[i]), 2) << ',' << fixed(py(s.y[i]), 2);
        }
        svg << "\"/>\n";
    }

    // Legend.
    double ly = kTop + 12;
    for (const auto& s : series) {
        svg << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw - 120 << "\" y2=\""
            << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << kLeft + pw - 114 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
        ly += 18;
    }
    svg << "</svg>\n";
    return svg.str();
}

std::string plot_csv(std::span<const double> t, std::span<const double> truth, std::span<const double> prediction)
{
    std::ostringstream out;
    out << "t,truth,prediction\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t[i]) << ',' << format_double(truth[i]) << ',' << format_double(prediction[i]) << '\n';
    }
    return out.str();
}

}  // namespace rlcnet::cli
