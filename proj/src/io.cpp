#include "varest/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "varest/errors.hpp"

namespace varest {

namespace {

using nlohmann::json;

const char* const kRecordsHeader = "rep,estimator,tau2_hat,sigma2_hat,var_hat,wall_ms";
const char* const kSummaryHeader = "estimator,mean,bias,se,rmse,rmse_sd";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += ch;
        }
    }
    out.push_back(field);
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_blank(const std::string& line) { return trim(line).empty(); }

double parse_number(const std::string& raw, std::size_t line, const std::string& what) {
    const std::string text = trim(raw);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ParseError("cannot parse " + what + " '" + text + "'", line);
    return value;
}

std::size_t parse_index(const std::string& raw, std::size_t line, const std::string& what) {
    const std::string text = trim(raw);
    std::size_t value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ParseError("cannot parse " + what + " '" + text + "'", line);
    return value;
}

std::string num(double v, int digits) {
    if (std::isnan(v)) return "nan";
    return format_double(v, digits);
}

json parse_json(std::istream& in, const std::string& what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

Vector vector_field(const json& value, const std::string& key, std::size_t p) {
    if (value.is_number()) return Vector::Constant(static_cast<Eigen::Index>(p), value.get<double>());
    if (!value.is_array()) throw ParseError("'" + key + "' must be a number or an array");
    if (value.size() != p)
        throw ParseError("'" + key + "' has " + std::to_string(value.size()) + " entries, expected " +
                         std::to_string(p));
    Vector out(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        if (!value[j].is_number()) throw ParseError("'" + key + "' entries must be numbers");
        out[static_cast<Eigen::Index>(j)] = value[j].get<double>();
    }
    return out;
}

template <typename T>
T get_field(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

RawDataset read_dataset_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw ParseError("dataset is empty", line_no == 0 ? 1 : line_no);
    if (trim(header[0]) != "y")
        throw ParseError("first column must be named 'y', found '" + trim(header[0]) + "'", line_no);
    if (header.size() < 2) throw ParseError("dataset needs at least one covariate column", line_no);
    const std::size_t p = header.size() - 1;

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != p + 1)
            throw ParseError("expected " + std::to_string(p + 1) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const double v = parse_number(fields[k], line_no, k == 0 ? "y" : trim(header[k]));
            if (!std::isfinite(v)) throw ParseError("non-finite value", line_no);
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("dataset has a header but no observations", line_no);

    RawDataset out;
    out.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    out.y.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = values.data() + i * (p + 1);
        out.y[static_cast<Eigen::Index>(i)] = row[0];
        for (std::size_t j = 0; j < p; ++j)
            out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j + 1];
    }
    return out;
}

void write_dataset_csv(std::ostream& out, const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) throw LengthMismatch("x and y row counts differ");
    out << 'y';
    for (Eigen::Index j = 0; j < x.cols(); ++j) out << ",x" << j + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out << num(y[i], 17);
        for (Eigen::Index j = 0; j < x.cols(); ++j) out << ',' << num(x(i, j), 17);
        out << '\n';
    }
}

CovariateModel read_model_json(std::istream& in) {
    const json doc = parse_json(in, "covariate model");
    if (!doc.is_object()) throw ParseError("covariate model must be a JSON object");

    std::optional<std::size_t> p;
    if (doc.contains("p")) p = get_field<std::size_t>(doc, "p", 0);
    if (!p && doc.contains("mean") && doc["mean"].is_array()) p = doc["mean"].size();
    if (!p && doc.contains("covariance") && doc["covariance"].is_array()) p = doc["covariance"].size();
    if (!p && doc.contains("fourth_moments") && doc["fourth_moments"].is_array())
        p = doc["fourth_moments"].size();
    if (!p || *p == 0) throw ParseError("covariate model needs 'p' or an array field to infer it");
    const auto pi = static_cast<Eigen::Index>(*p);

    const bool gaussian = get_field<bool>(doc, "gaussian", false);
    const Vector mean = doc.contains("mean") ? vector_field(doc["mean"], "mean", *p) : Vector::Zero(pi);
    const Vector fourth = doc.contains("fourth_moments")
                              ? vector_field(doc["fourth_moments"], "fourth_moments", *p)
                              : Vector::Constant(pi, 3.0);

    Matrix cov = Matrix::Identity(pi, pi);
    bool diagonal = true;
    if (doc.contains("covariance")) {
        const json& c = doc["covariance"];
        if (c.is_string()) {
            if (c.get<std::string>() != "identity")
                throw ParseError("'covariance' must be \"identity\" or a matrix");
        } else if (c.is_array()) {
            if (c.size() != *p) throw ParseError("'covariance' must have p rows");
            for (std::size_t r = 0; r < *p; ++r) {
                if (!c[r].is_array() || c[r].size() != *p)
                    throw ParseError("'covariance' row " + std::to_string(r + 1) + " must have p entries");
                for (std::size_t k = 0; k < *p; ++k) {
                    if (!c[r][k].is_number()) throw ParseError("'covariance' entries must be numbers");
                    const double v = c[r][k].get<double>();
                    cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
                    if (r != k && v != 0.0) diagonal = false;
                }
            }
        } else {
            throw ParseError("'covariance' must be \"identity\" or a matrix");
        }
    }
    const bool independent = get_field<bool>(doc, "independent_columns", diagonal);
    return CovariateModel(mean, cov, fourth, independent, gaussian);
}

void write_model_json(std::ostream& out, const CovariateModel& model) {
    json doc;
    doc["p"] = model.p();
    doc["mean"] = std::vector<double>(model.mean().data(), model.mean().data() + model.mean().size());
    if (model.covariance().isIdentity(0.0)) {
        doc["covariance"] = "identity";
    } else {
        json rows = json::array();
        for (Eigen::Index r = 0; r < model.covariance().rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(model.covariance().cols()));
            for (Eigen::Index k = 0; k < model.covariance().cols(); ++k)
                row[static_cast<std::size_t>(k)] = model.covariance()(r, k);
            rows.push_back(row);
        }
        doc["covariance"] = rows;
    }
    doc["fourth_moments"] = std::vector<double>(
        model.fourth_moments().data(), model.fourth_moments().data() + model.fourth_moments().size());
    doc["independent_columns"] = model.independent_columns();
    doc["gaussian"] = model.gaussian();
    out << doc.dump(2) << '\n';
}

ScenarioConfig read_scenario_json(std::istream& in, ScenarioConfig base,
                                  std::vector<std::string>* present_keys) {
    const json doc = parse_json(in, "scenario");
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    if (present_keys)
        for (const auto& item : doc.items()) present_keys->push_back(item.key());
    static const char* const known[] = {"n",    "p",    "tau2",   "tau2_b", "sigma2",    "b_size",
                                        "reps", "seed", "x_dist", "df",     "mix_weight"};
    for (const auto& item : doc.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw ParseError("unknown scenario field '" + item.key() + "'");
    }
    ScenarioConfig cfg = base;
    cfg.n = get_field<std::size_t>(doc, "n", cfg.n);
    cfg.p = get_field<std::size_t>(doc, "p", cfg.p);
    cfg.tau2 = get_field<double>(doc, "tau2", cfg.tau2);
    cfg.tau2_b = get_field<double>(doc, "tau2_b", cfg.tau2_b);
    cfg.sigma2 = get_field<double>(doc, "sigma2", cfg.sigma2);
    cfg.b_size = get_field<std::size_t>(doc, "b_size", cfg.b_size);
    cfg.reps = get_field<std::size_t>(doc, "reps", cfg.reps);
    cfg.seed = get_field<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.df = get_field<double>(doc, "df", cfg.df);
    cfg.mix_weight = get_field<double>(doc, "mix_weight", cfg.mix_weight);
    if (doc.contains("x_dist"))
        cfg.x_dist = parse_x_distribution(get_field<std::string>(doc, "x_dist", ""), &cfg.df);
    return cfg;
}

void write_records_csv(std::ostream& out, const std::vector<RepRecord>& records) {
    out << kRecordsHeader << '\n';
    for (const auto& r : records) {
        out << r.rep_index << ',' << to_string(r.estimator_id) << ','
            << (r.failed ? "nan" : num(r.tau2_hat, 17)) << ','
            << (r.failed ? "nan" : num(r.sigma2_hat, 17)) << ','
            << (r.variance_estimate ? num(*r.variance_estimate, 17) : "") << ','
            << num(r.wall_ms, 17) << '\n';
    }
}

std::vector<RepRecord> read_records_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::vector<RepRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        if (!have_header) {
            if (trim(line) != kRecordsHeader)
                throw ParseError(std::string("records header must be '") + kRecordsHeader + "'", line_no);
            have_header = true;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 6)
            throw ParseError("expected 6 fields, found " + std::to_string(f.size()), line_no);
        RepRecord r;
        r.rep_index = parse_index(f[0], line_no, "rep");
        try {
            r.estimator_id = parse_estimator_id(trim(f[1]));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        r.tau2_hat = parse_number(f[2], line_no, "tau2_hat");
        r.sigma2_hat = parse_number(f[3], line_no, "sigma2_hat");
        if (!trim(f[4]).empty()) r.variance_estimate = parse_number(f[4], line_no, "var_hat");
        r.wall_ms = parse_number(f[5], line_no, "wall_ms");
        r.failed = std::isnan(r.tau2_hat);
        records.push_back(std::move(r));
    }
    if (!have_header) throw ParseError("records file is empty", line_no == 0 ? 1 : line_no);
    return records;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryStats>& stats) {
    out << kSummaryHeader << '\n';
    for (const auto& s : stats)
        out << to_string(s.estimator_id) << ',' << num(s.mean, 6) << ',' << num(s.bias, 6) << ','
            << num(s.se, 6) << ',' << num(s.rmse, 6) << ',' << num(s.rmse_sd, 6) << '\n';
}

void write_estimates_csv(std::ostream& out, const std::vector<EstimatorOutcome>& outcomes) {
    out << "estimator,status,tau2_hat,sigma2_hat,var_hat,aux\n";
    for (const auto& o : outcomes) {
        out << to_string(o.id) << ',';
        if (o.report) {
            const EstimateReport& r = *o.report;
            std::string aux;
            for (const auto& [k, v] : r.aux) {
                if (!aux.empty()) aux += '|';
                aux += k + '=' + v;
            }
            out << "ok," << num(r.tau2, 10) << ',' << num(r.sigma2, 10) << ','
                << (r.variance_estimate ? num(*r.variance_estimate, 10) : "") << ',' << aux << '\n';
        } else {
            std::string message = o.error;
            for (auto& ch : message)
                if (ch == ',' || ch == '\n') ch = ';';
            out << (o.degenerate ? "warning" : "error") << ",,,," << message << '\n';
        }
    }
}

std::string format_summary_table(const std::vector<SummaryStats>& stats) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %6s %10s %10s %10s %10s %10s\n", "estimator", "reps", "mean",
                  "bias", "se", "rmse", "rmse_sd");
    os << buf;
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof buf, "%-10s %6zu %10.4f %10.4f %10.4f %10.4f %10.4f\n",
                      std::string(to_string(s.estimator_id)).c_str(), s.count, s.mean, s.bias, s.se,
                      s.rmse, s.rmse_sd);
        os << buf;
    }
    return os.str();
}

}  // namespace varest
