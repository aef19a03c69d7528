#include "ocfd/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ocfd::io {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    // Values that round to zero print without a sign.
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& token, std::size_t line, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(v)) {
        throw ParseError(line, std::string("malformed ") + what + " '" + token + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

void parse_series_line(const std::string& line, std::size_t line_no, LabeledSeries& out) {
    std::istringstream ss(line);
    std::string hash, keyword;
    ss >> hash >> keyword;
    if (!(ss >> out.id)) throw ParseError(line_no, "series line without an id");
    for (std::string token; ss >> token;) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "malformed series metadata '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "rate") {
            out.series.sample_rate = parse_real(value, line_no, "rate");
        } else if (key == "frequency") {
            out.series.frequency = parse_real(value, line_no, "frequency");
        } else if (key == "phase_deg") {
            out.series.phase_deg = parse_real(value, line_no, "phase_deg");
        } else if (key == "faults") {
            if (value == "none") continue;
            for (const std::string& ev : split(value, ';')) {
                const auto at = ev.find('@');
                if (at == std::string::npos) throw ParseError(line_no, "fault event must be label@time: '" + ev + "'");
                sim::FaultEvent e;
                try {
                    e.label = FaultLabel::parse(ev.substr(0, at));
                } catch (const std::invalid_argument& err) {
                    throw ParseError(line_no, err.what());
                }
                e.time = parse_real(ev.substr(at + 1), line_no, "fault time");
                if (!out.series.fault_timeline.empty() && e.time < out.series.fault_timeline.back().time) {
                    throw ParseError(line_no, "fault timeline is not sorted");
                }
                out.series.fault_timeline.push_back(e);
            }
        }
        // Unknown keys are ignored so the metadata can grow.
    }
    if (!(out.series.sample_rate > 0.0)) throw ParseError(line_no, "series rate must be > 0");
}

}  // namespace

std::size_t Dataset::row_count() const {
    std::size_t n = 0;
    for (const auto& s : series) n += s.labels.size();
    return n;
}

forest::TrainingSet Dataset::to_training_set() const {
    forest::TrainingSet set({"i_a", "i_b", "i_c"});
    set.reserve(row_count());
    for (const auto& ls : series) {
        for (std::size_t i = 0; i < ls.labels.size(); ++i) {
            const sim::PhaseSample& s = ls.series.samples[i];
            const double x[3] = {s.a, s.b, s.c};
            set.add(x, ls.labels[i]);
        }
    }
    return set;
}

void save_dataset(const Dataset& dataset, std::ostream& out) {
    out << kDatasetHeader << '\n';
    for (const LabeledSeries& ls : dataset.series) {
        if (ls.labels.size() != ls.series.size()) throw std::invalid_argument("series and label counts differ");
        out << "# series " << ls.id << " rate=" << real(ls.series.sample_rate)
            << " frequency=" << real(ls.series.frequency) << " phase_deg=" << real(ls.series.phase_deg) << " faults=";
        if (ls.series.fault_timeline.empty()) out << "none";
        for (std::size_t i = 0; i < ls.series.fault_timeline.size(); ++i) {
            const auto& ev = ls.series.fault_timeline[i];
            out << (i ? ";" : "") << ev.label.to_string() << '@' << fixed(ev.time, 9);
        }
        out << '\n';
        for (std::size_t i = 0; i < ls.labels.size(); ++i) {
            const sim::PhaseSample& s = ls.series.samples[i];
            out << fixed(s.t, 9) << ',' << fixed(s.a, 6) << ',' << fixed(s.b, 6) << ',' << fixed(s.c, 6) << ','
                << ls.labels[i].to_string() << '\n';
        }
    }
}

Dataset load_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "empty dataset file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kDatasetHeader) throw ParseError(line_no, "expected header '" + kDatasetHeader + "'");

    bool inferred_rate = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# series", 0) == 0) {
                ds.series.emplace_back();
                parse_series_line(line, line_no, ds.series.back());
                inferred_rate = false;
            }
            continue;
        }
        if (ds.series.empty()) {
            // Bare rows without a series line: one series, rate from the timestamps.
            ds.series.emplace_back();
            inferred_rate = true;
        }

        const auto fields = split(line, ',');
        if (fields.size() != 5) {
            throw ParseError(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
        }
        sim::PhaseSample s{parse_real(fields[0], line_no, "t"), parse_real(fields[1], line_no, "i_a"),
                           parse_real(fields[2], line_no, "i_b"), parse_real(fields[3], line_no, "i_c")};
        FaultLabel label;
        try {
            label = FaultLabel::parse(fields[4]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }

        LabeledSeries& cur = ds.series.back();
        if (!cur.series.samples.empty() && !(s.t > cur.series.samples.back().t)) {
            throw ParseError(line_no, "timestamps must be strictly increasing within a series");
        }
        cur.series.samples.push_back(s);
        cur.labels.push_back(label);
        if (inferred_rate && cur.series.samples.size() == 2) {
            cur.series.sample_rate = std::round(1.0 / (s.t - cur.series.samples.front().t));
        }
    }
    return ds;
}

void save_dataset_file(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_dataset(dataset, out);
    if (!out) throw std::runtime_error("failed writing dataset to '" + path + "'");
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file '" + path + "'");
    return load_dataset(in);
}

}  // namespace ocfd::io
