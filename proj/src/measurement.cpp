#include "qclring/measurement.hpp"

#include "qclring/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

namespace qclring {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double number(const std::string& s, const std::string& where) {
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(where + ": '" + s + "' is not a number");
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Splits text into "# key = value" metadata and data lines (with 1-based line numbers).
struct Parsed {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<int, std::string>> lines;
};

Parsed scan(const std::string& text) {
    Parsed p;
    std::istringstream is(text);
    std::string line;
    int no = 0;
    while (std::getline(is, line)) {
        ++no;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            auto eq = t.find_first_of("=:");
            if (eq != std::string::npos) p.meta[lower(trim(t.substr(1, eq - 1)))] = trim(t.substr(eq + 1));
            continue;
        }
        p.lines.emplace_back(no, t);
    }
    return p;
}

std::string fmt(double v) {
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

}  // namespace

void LIVCurve::validate() const {
    const size_t n = current.size();
    if (n < 2) throw ValidationError("LIV curve needs at least two points");
    if (voltage.size() != n || power.size() != n || density.size() != n || (!power2.empty() && power2.size() != n))
        throw ValidationError("LIV columns have different lengths");
    if (!(area_cm2 > 0)) throw ValidationError("device area must be positive");
    for (size_t i = 0; i < n; ++i) {
        if (i > 0 && !(current[i] > current[i - 1]))
            throw ValidationError("current not strictly increasing at point " + std::to_string(i + 1));
        if (voltage[i] < 0) throw ValidationError("negative voltage at point " + std::to_string(i + 1));
        if (power[i] < 0 || (!power2.empty() && power2[i] < 0))
            throw ValidationError("negative power at point " + std::to_string(i + 1));
    }
}

LIVCurve make_liv(std::vector<double> current, std::vector<double> voltage, std::vector<double> power,
                  double area_cm2, std::vector<double> power2) {
    LIVCurve c;
    c.current = std::move(current);
    c.voltage = std::move(voltage);
    c.power = std::move(power);
    c.power2 = std::move(power2);
    c.area_cm2 = area_cm2;
    for (double i : c.current) c.density.push_back(i * 1e-3 / area_cm2 * 1e-3);  // mA -> kA/cm^2
    c.validate();
    return c;
}

LIVCurve parse_liv(const std::string& text) {
    Parsed p = scan(text);
    double area = 0;
    if (p.meta.count("area_cm2")) {
        area = number(p.meta["area_cm2"], "header area_cm2");
    } else if (p.meta.count("width_um") && p.meta.count("length_um")) {
        area = number(p.meta["width_um"], "header width_um") * number(p.meta["length_um"], "header length_um") * 1e-8;
    } else {
        throw ParseError("missing device area: need '# area_cm2 = ...' or '# width_um' and '# length_um'");
    }
    if (!(area > 0)) throw ParseError("device area must be positive");
    if (p.lines.empty()) throw ParseError("missing column header");

    auto head = split(p.lines[0].second);
    std::map<std::string, int> col;
    for (size_t i = 0; i < head.size(); ++i) col[lower(head[i])] = int(i);
    for (const char* need : {"current_ma", "voltage_v", "power_mw"})
        if (!col.count(need)) throw ParseError(std::string("missing column '") + need + "'");
    const bool dual = col.count("power2_mw");

    std::vector<double> I, V, P, P2;
    for (size_t k = 1; k < p.lines.size(); ++k) {
        const auto& [no, line] = p.lines[k];
        auto cells = split(line);
        const std::string where = "line " + std::to_string(no);
        if (cells.size() != head.size())
            throw ParseError(where + ": expected " + std::to_string(head.size()) + " columns, got " +
                             std::to_string(cells.size()));
        double i = number(cells[col["current_ma"]], where);
        if (!I.empty() && i == I.back()) throw ParseError(where + ": duplicated current " + cells[col["current_ma"]]);
        if (!I.empty() && i < I.back()) throw ParseError(where + ": current not increasing");
        I.push_back(i);
        V.push_back(number(cells[col["voltage_v"]], where));
        P.push_back(number(cells[col["power_mw"]], where));
        if (dual) P2.push_back(number(cells[col["power2_mw"]], where));
    }
    try {
        return make_liv(I, V, P, area, P2);
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
}

LIVCurve load_liv(const std::string& path) { return parse_liv(read_file(path)); }

std::string format_liv(const LIVCurve& c) {
    std::ostringstream o;
    o << "# area_cm2 = " << fmt(c.area_cm2) << "\n";
    o << "current_mA,voltage_V,power_mW" << (c.dual() ? ",power2_mW" : "") << "\n";
    for (size_t i = 0; i < c.current.size(); ++i) {
        o << fmt(c.current[i]) << "," << fmt(c.voltage[i]) << "," << fmt(c.power[i]);
        if (c.dual()) o << "," << fmt(c.power2[i]);
        o << "\n";
    }
    return o.str();
}

ThresholdFit threshold_and_slope(const LIVCurve& c) {
    c.validate();
    const auto& I = c.current;
    const auto& P = c.power;
    const size_t n = I.size();
    const double pmax = *std::max_element(P.begin(), P.end());
    if (!(pmax > 0)) throw AnalysisError("no lasing detected: power is zero everywhere");

    // Below-threshold estimate: points before the power first exceeds 1% of the maximum.
    double rms = 0;
    size_t nb = 0;
    while (nb < n && P[nb] <= 0.01 * pmax) rms += P[nb] * P[nb], ++nb;
    rms = nb ? std::sqrt(rms / double(nb)) : 0.0;
    ThresholdFit fit;
    fit.noise_gate = std::max(0.01 * pmax, 3 * rms);
    if (pmax <= fit.noise_gate) throw AnalysisError("no lasing detected: power never exceeds the noise gate");

    // Windowed least-squares slope around each point.
    const int half = std::max<int>(2, int(n) / 10);
    std::vector<double> slope(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        size_t a = size_t(std::max<long>(0, long(i) - half)), b = std::min(n - 1, i + size_t(half));
        double sx = 0, sy = 0, sxx = 0, sxy = 0, m = double(b - a + 1);
        for (size_t k = a; k <= b; ++k) sx += I[k], sy += P[k], sxx += I[k] * I[k], sxy += I[k] * P[k];
        double den = m * sxx - sx * sx;
        slope[i] = den > 0 ? (m * sxy - sx * sy) / den : 0.0;
    }
    const double smax = *std::max_element(slope.begin(), slope.end());
    size_t best_a = 0, best_len = 0;
    for (size_t i = 0; i < n;) {
        if (!(slope[i] > 0.5 * smax && P[i] > fit.noise_gate)) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j + 1 < n && slope[j + 1] > 0.5 * smax && P[j + 1] > fit.noise_gate) ++j;
        if (j - i + 1 > best_len) best_a = i, best_len = j - i + 1;
        i = j + 1;
    }
    if (best_len < 2) throw AnalysisError("no above-threshold segment with at least two points");

    // Weighted least squares with weights 1/P_fit^2 (relative detector error),
    // refined from an unweighted start. Exact data give the same line either way.
    const size_t a0 = best_a, a1 = best_a + best_len;
    auto line = [&](const std::vector<double>& w, double& slope_out, double& icpt_out) {
        double sw = 0, mx = 0, my = 0;
        for (size_t k = a0; k < a1; ++k) sw += w[k - a0], mx += w[k - a0] * I[k], my += w[k - a0] * P[k];
        mx /= sw, my /= sw;
        double cxx = 0, cxy = 0;
        for (size_t k = a0; k < a1; ++k)
            cxx += w[k - a0] * (I[k] - mx) * (I[k] - mx), cxy += w[k - a0] * (I[k] - mx) * (P[k] - my);
        slope_out = cxy / cxx;
        icpt_out = my - slope_out * mx;
    };
    std::vector<double> w(best_len, 1.0);
    double icpt = 0;
    line(w, fit.slope, icpt);
    for (int it = 0; it < 3 && fit.slope > 0; ++it) {
        for (size_t k = a0; k < a1; ++k) {
            double pf = std::max(icpt + fit.slope * I[k], fit.noise_gate);
            w[k - a0] = 1.0 / (pf * pf);
        }
        line(w, fit.slope, icpt);
    }
    const double m = double(best_len);
    if (!(fit.slope > 0)) throw AnalysisError("fitted slope is not positive");
    fit.threshold_ma = -icpt / fit.slope;
    fit.threshold_kacm2 = fit.threshold_ma * 1e-3 / c.area_cm2 * 1e-3;
    double r2 = 0;
    for (size_t k = best_a; k < best_a + best_len; ++k) {
        double e = P[k] - (icpt + fit.slope * I[k]);
        r2 += e * e;
    }
    fit.residual = std::sqrt(r2 / m);
    fit.first = best_a;
    fit.last = best_a + best_len - 1;
    return fit;
}

OscillationMetric power_oscillation_metric(const LIVCurve& c) {
    c.validate();
    const auto& I = c.current;
    std::vector<double> total = c.power;
    if (c.dual())
        for (size_t i = 0; i < total.size(); ++i) total[i] += c.power2[i];
    const double pmax = *std::max_element(total.begin(), total.end());
    if (!(pmax > 0)) throw AnalysisError("no above-threshold region: power is zero everywhere");
    const double gate = 0.01 * pmax;
    size_t a = 0;
    while (a < total.size() && total[a] <= gate) ++a;
    if (a + 2 >= total.size()) throw AnalysisError("no above-threshold region");

    OscillationMetric out;
    // Sign changes of dP/dI on the (first) channel above threshold.
    int changes = 0, prev = 0;
    for (size_t i = a + 1; i < I.size(); ++i) {
        double d = c.power[i] - c.power[i - 1];
        int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s != 0) {
            if (prev != 0 && s != prev) ++changes;
            prev = s;
        }
    }
    const double span = I.back() - I[a];
    out.sign_changes_per_100ma = span > 0 ? changes * 100.0 / span : 0.0;

    if (c.dual()) {
        std::vector<double> d1, d2;
        for (size_t i = a + 1; i < I.size(); ++i) {
            d1.push_back(c.power[i] - c.power[i - 1]);
            d2.push_back(c.power2[i] - c.power2[i - 1]);
        }
        double m1 = mean(d1), m2 = mean(d2), s11 = 0, s22 = 0, s12 = 0;
        for (size_t i = 0; i < d1.size(); ++i) {
            s11 += (d1[i] - m1) * (d1[i] - m1);
            s22 += (d2[i] - m2) * (d2[i] - m2);
            s12 += (d1[i] - m1) * (d2[i] - m2);
        }
        out.channel_correlation = (s11 > 0 && s22 > 0) ? s12 / std::sqrt(s11 * s22) : 0.0;
    }
    return out;
}

SpectralMap parse_map(const std::string& text) {
    Parsed p = scan(text);
    if (p.lines.empty()) throw ParseError("empty map");
    SpectralMap m;
    if (p.meta.count("axis_name")) m.axis_name = p.meta["axis_name"];
    if (p.meta.count("axis_unit")) m.axis_unit = p.meta["axis_unit"];
    auto head = split(p.lines[0].second);
    if (head.size() < 2) throw ParseError("line " + std::to_string(p.lines[0].first) + ": no spectral columns");
    for (size_t i = 1; i < head.size(); ++i) m.spectral.push_back(number(head[i], "header column " + std::to_string(i + 1)));
    for (size_t k = 1; k < p.lines.size(); ++k) {
        const auto& [no, line] = p.lines[k];
        auto cells = split(line);
        const std::string where = "line " + std::to_string(no);
        if (cells.size() != head.size()) throw ParseError(where + ": wrong number of columns");
        m.axis.push_back(number(cells[0], where));
        std::vector<double> row;
        for (size_t i = 1; i < cells.size(); ++i) {
            double v = number(cells[i], where);
            if (v < 0) throw ParseError(where + ": negative intensity");
            row.push_back(v);
        }
        m.intensity.push_back(std::move(row));
    }
    auto monotone = [](const std::vector<double>& v) {
        bool up = true, down = true;
        for (size_t i = 1; i < v.size(); ++i) up &= v[i] > v[i - 1], down &= v[i] < v[i - 1];
        return up || down;
    };
    if (m.axis.empty()) throw ParseError("map has no rows");
    if (!monotone(m.axis)) throw ParseError("sweep axis is not strictly monotone");
    if (!monotone(m.spectral)) throw ParseError("spectral axis is not strictly monotone");
    m.flagged.assign(m.axis.size(), false);
    m.notes.assign(m.axis.size(), "");
    return m;
}

SpectralMap load_map(const std::string& path) { return parse_map(read_file(path)); }

std::string format_map(const SpectralMap& m, const std::string& spectral_unit) {
    std::ostringstream o;
    o << "# axis_name = " << m.axis_name << "\n# axis_unit = " << m.axis_unit << "\n# spectral_unit = " << spectral_unit
      << "\naxis";
    for (double s : m.spectral) o << "," << fmt(s);
    o << "\n";
    for (size_t k = 0; k < m.axis.size(); ++k) {
        o << fmt(m.axis[k]);
        for (double v : m.intensity[k]) o << "," << fmt(v);
        o << "\n";
    }
    return o.str();
}

MapAnalysis analyze_map(const SpectralMap& m, double smsr_db, double floor_db) {
    if (m.axis.empty() || m.spectral.empty()) throw AnalysisError("empty map");
    if (m.intensity.size() != m.axis.size()) throw AnalysisError("map rows do not match the sweep axis");
    const double spacing = m.spectral.size() > 1 ? std::abs(m.spectral[1] - m.spectral[0]) : 0.0;
    MapAnalysis out;
    for (size_t k = 0; k < m.axis.size(); ++k) {
        const auto& row = m.intensity[k];
        bool flagged = k < m.flagged.size() && m.flagged[k];
        bool empty = std::all_of(row.begin(), row.end(), [](double v) { return v <= 0; });
        if (flagged || empty) {
            out.labels.push_back(SpectrumClass::Irregular);
            out.bandwidth.push_back(0.0);
            continue;
        }
        out.labels.push_back(classify_spectrum(row, smsr_db));
        out.bandwidth.push_back(comb_bandwidth_cm(row, floor_db, spacing));
    }
    for (size_t k = 0; k < out.bandwidth.size(); ++k)
        if (out.bandwidth[k] > out.max_bandwidth) out.max_bandwidth = out.bandwidth[k], out.max_index = k;
    out.max_axis = m.axis[out.max_index];
    for (size_t k = 0; k < out.labels.size();) {
        size_t j = k;
        while (j + 1 < out.labels.size() && out.labels[j + 1] == out.labels[k]) ++j;
        out.runs.push_back({out.labels[k], k, j});
        if (out.labels[k] == SpectrumClass::Monochromatic) out.monochromatic_ranges.emplace_back(m.axis[k], m.axis[j]);
        k = j + 1;
    }
    return out;
}

}  // namespace qclring
