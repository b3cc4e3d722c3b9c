#include "byhe/signalio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace byhe {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
    throw InputError("line " + std::to_string(line_no) + ": " + what);
}

// Parses "fs=<value>" from the body of a comment line; nullopt if absent.
std::optional<double> header_fs(std::string_view comment, std::size_t line_no) {
    comment = trim(comment);
    if (comment.substr(0, 3) != "fs=") return std::nullopt;
    const auto fs = parse_double(comment.substr(3));
    if (!fs || *fs <= 0.0) fail_line(line_no, "invalid sampling rate header");
    return fs;
}

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

void check_stream(const std::ostream& out) {
    if (!out) throw std::runtime_error("write failed");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("cannot format value");
    return std::string(buf, ptr);
}

Wave read_wave(std::istream& in, std::optional<double> fs_override) {
    std::optional<double> fs_header;
    std::vector<double> times;
    std::vector<double> values;
    std::size_t columns = 0;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (auto fs = header_fs(line.substr(1), line_no)) fs_header = fs;
            continue;
        }
        const auto fields = split_commas(line);
        if (fields.size() > 2) fail_line(line_no, "expected 1 or 2 columns");
        if (columns == 0) columns = fields.size();
        if (fields.size() != columns) fail_line(line_no, "inconsistent column count");

        std::vector<double> parsed;
        for (const auto field : fields) {
            const auto v = parse_double(field);
            if (!v) fail_line(line_no, "non-numeric token '" + std::string(trim(field)) + "'");
            parsed.push_back(*v);
        }
        if (columns == 2) {
            times.push_back(parsed[0]);
            values.push_back(parsed[1]);
        } else {
            values.push_back(parsed[0]);
        }
    }
    if (values.empty()) throw InputError("empty input");

    Wave w;
    w.samples = std::move(values);
    if (columns == 2) {
        if (times.size() < 2) throw InputError("two-column input needs at least 2 rows");
        std::vector<double> steps;
        steps.reserve(times.size() - 1);
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double dt = times[i] - times[i - 1];
            if (!(dt > 0.0)) fail_line(i + 1, "time column not strictly increasing");
            steps.push_back(dt);
        }
        const double med = median(steps);
        for (const double dt : steps) {
            if (std::abs(dt - med) / med > 1e-3) throw InputError("non-uniform time grid");
        }
        w.fs = 1.0 / med;
    } else if (fs_header) {
        w.fs = *fs_header;
    }
    if (fs_override) w.fs = *fs_override;
    if (!(w.fs > 0.0) || !std::isfinite(w.fs)) throw InputError("sampling rate unknown or invalid");
    return w;
}

void write_wave(const Wave& w, std::ostream& out) {
    if (w.empty()) throw InputError("cannot write an empty wave");
    if (!(w.fs > 0.0)) throw InputError("wave has no valid sampling rate");
    out << "# fs=" << format_double(w.fs) << '\n';
    for (const double v : w.samples) out << format_double(v) << '\n';
    check_stream(out);
}

MatrixFile read_matrix(std::istream& in) {
    MatrixFile m;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_commas(line);
        if (m.rows == 0) m.cols = fields.size();
        if (fields.size() != m.cols) {
            fail_line(line_no, "ragged row: expected " + std::to_string(m.cols) + " values, got " +
                                   std::to_string(fields.size()));
        }
        for (const auto field : fields) {
            const auto v = parse_double(field);
            if (!v) fail_line(line_no, "non-numeric token '" + std::string(trim(field)) + "'");
            m.values.push_back(*v);
        }
        ++m.rows;
    }
    if (m.rows == 0) throw InputError("empty input");
    return m;
}

void write_matrix(const Matrix& m, std::ostream& out) {
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (j > 0) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    check_stream(out);
}

void write_matrix(const SimMatrix& m, std::ostream& out) { write_matrix(m.to_matrix(), out); }

SimMatrix read_sim_matrix(std::istream& in) { return SimMatrix::from_matrix(read_matrix(in)); }

Wave resample(const Wave& w, double factor) {
    if (!(factor >= 0.25 && factor <= 4.0)) throw InputError("resample factor must lie in [0.25, 4]");
    if (w.size() < 4) throw InputError("resample needs at least 4 samples");

    const std::size_t n = w.size();
    const double span = static_cast<double>(n - 1);  // in input samples
    const auto n_out = static_cast<std::size_t>(std::floor(span * factor + 1e-9)) + 1;

    Wave out;
    out.fs = w.fs * factor;
    out.samples.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        const double pos = std::min(static_cast<double>(k) / factor, span);
        const auto i0 = std::min(static_cast<std::size_t>(pos), n - 2);
        const double frac = pos - static_cast<double>(i0);
        out.samples[k] = (1.0 - frac) * w.samples[i0] + frac * w.samples[i0 + 1];
    }
    return out;
}

void write_pgm(const SimMatrix& m, std::ostream& out) {
    out << "P2\n" << m.n << ' ' << m.n << "\n255\n";
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < m.n; ++j) {
            const double v = std::clamp(m(i, j), -1.0, 1.0);
            const auto level = static_cast<int>(std::lround((v + 1.0) * 127.5));
            if (j > 0) out << ' ';
            out << level;
        }
        out << '\n';
    }
    check_stream(out);
}

Wave load_wave(const std::string& path, std::optional<double> fs_override) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_wave(in, fs_override);
}

void save_wave(const Wave& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    write_wave(w, out);
}

MatrixFile load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_matrix(in);
}

void save_matrix(const SimMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    write_matrix(m, out);
}

// SimMatrix helpers live here with the rest of the matrix plumbing.

SimMatrix SimMatrix::from_matrix(const Matrix& m) {
    if (!m.square()) {
        throw InputError("similarity matrix must be square, got " + std::to_string(m.rows) + "x" +
                         std::to_string(m.cols));
    }
    SimMatrix s;
    s.n = m.rows;
    s.values = m.values;
    return s;
}

Matrix SimMatrix::to_matrix() const {
    Matrix m;
    m.rows = n;
    m.cols = n;
    m.values = values;
    return m;
}

SimMatrixCheck check_sim_matrix(const SimMatrix& m, double tol) {
    SimMatrixCheck c;
    for (std::size_t i = 0; i < m.n; ++i) {
        if (std::abs(m(i, i) - 1.0) >= tol) c.unit_diagonal = false;
        for (std::size_t j = 0; j < m.n; ++j) {
            const double v = m(i, j);
            if (!(v >= -1.0 - tol && v <= 1.0 + tol)) c.in_range = false;
            if (std::abs(v - m(j, i)) >= tol) c.symmetric = false;
        }
    }
    return c;
}

}  // namespace byhe
