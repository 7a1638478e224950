#include "mtsb/io.hpp"

#include <zlib.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <unordered_map>

#include "mtsb/errors.hpp"

namespace mtsb {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

// Full CSV record parser: handles quoted fields, embedded commas/newlines,
// and both \n and \r\n endings. Blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cur;
    bool in_quotes = false;
    bool row_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
            continue;
        }
        if (ch == '"') {
            in_quotes = true;
            row_started = true;
        } else if (ch == ',') {
            row.push_back(cur);
            cur.clear();
            row_started = true;
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (row_started || !row.empty()) {
                row.push_back(cur);
                cur.clear();
                rows.push_back(std::move(row));
                row.clear();
                row_started = false;
            }
            cur.clear();
        } else {
            cur += ch;
            if (!std::isspace(static_cast<unsigned char>(ch))) row_started = true;
        }
    }
    if (in_quotes) throw IngestError("unterminated quoted field in " + path);
    if (row_started || !row.empty()) {
        row.push_back(cur);
        rows.push_back(std::move(row));
    }
    return rows;
}

bool parses_as_int(const std::string& s, long long* out = nullptr) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (errno != 0 || end == t.c_str() || *end != '\0') return false;
    if (out) *out = v;
    return true;
}

bool parses_as_double(const std::string& s, double* out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

long long parse_int_field(const std::string& s, const std::string& what, std::size_t line) {
    long long v = 0;
    if (!parses_as_int(s, &v))
        throw IngestError("line " + std::to_string(line) + ": cannot parse " + what +
                          " from '" + s + "'");
    return v;
}

double parse_double_field(const std::string& s, const std::string& what, std::size_t line) {
    double v = 0;
    if (!parses_as_double(s, &v))
        throw IngestError("line " + std::to_string(line) + ": cannot parse " + what +
                          " from '" + s + "'");
    return v;
}

int intern(std::unordered_map<std::string, int>& index, std::vector<std::string>& labels,
           const std::string& label) {
    auto it = index.find(label);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(labels.size());
    index.emplace(label, id);
    labels.push_back(label);
    return id;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw IngestError("cannot open file: " + path);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
    if (n < 0) {
        int errnum = 0;
        const char* msg = gzerror(f, &errnum);
        const std::string detail = msg ? msg : "read error";
        gzclose(f);
        throw IngestError("error reading " + path + ": " + detail);
    }
    gzclose(f);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw Error("cannot open file for writing: " + path);
        if (!content.empty() &&
            gzwrite(f, content.data(), static_cast<unsigned>(content.size())) == 0) {
            gzclose(f);
            throw Error("error writing " + path);
        }
        if (gzclose(f) != Z_OK) throw Error("error writing " + path);
    } else {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot open file for writing: " + path);
        f << content;
        f.flush();
        if (!f) throw Error("error writing " + path);
    }
}

std::vector<std::string> default_labels(Index n, const std::string& prefix) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i + 1));
    return labels;
}

MatrixSeries load_tensor_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    const auto rows = parse_csv(text, path);
    if (rows.empty()) throw IngestError("empty tensor csv: " + path);

    std::size_t start = 0;
    if (!rows[0].empty() && !parses_as_int(rows[0][0])) start = 1;  // header line

    struct Rec {
        long long t;
        int ri, ci;
        double v;
    };
    std::vector<Rec> recs;
    recs.reserve(rows.size());
    std::vector<std::string> row_labels, col_labels;
    std::unordered_map<std::string, int> row_ix, col_ix;
    long long T = 0;
    for (std::size_t li = start; li < rows.size(); ++li) {
        const auto& f = rows[li];
        if (f.size() != 4)
            throw IngestError("line " + std::to_string(li + 1) +
                              ": expected 4 fields (t,row,col,value), got " +
                              std::to_string(f.size()));
        const long long t = parse_int_field(f[0], "t", li + 1);
        if (t < 1)
            throw IngestError("line " + std::to_string(li + 1) + ": t must be >= 1, got " +
                              std::to_string(t));
        const double v = parse_double_field(f[3], "value", li + 1);
        if (!std::isfinite(v))
            throw IngestError("line " + std::to_string(li + 1) + ": non-finite value");
        const int ri = intern(row_ix, row_labels, f[1]);
        const int ci = intern(col_ix, col_labels, f[2]);
        T = std::max(T, t);
        recs.push_back({t, ri, ci, v});
    }
    if (recs.empty()) throw IngestError("no data rows in " + path);

    const long long p = static_cast<long long>(row_labels.size());
    const long long q = static_cast<long long>(col_labels.size());
    const long long total = T * p * q;
    if (total > (1LL << 31))
        throw IngestError("tensor too large: " + std::to_string(T) + " x " + std::to_string(p) +
                          " x " + std::to_string(q));

    std::vector<double> data(static_cast<std::size_t>(total), 0.0);
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(total), 0);
    for (const auto& r : recs) {
        const std::size_t idx =
            static_cast<std::size_t>(((r.t - 1) * p + r.ri) * q + r.ci);
        if (seen[idx])
            throw IngestError("duplicate cell (t=" + std::to_string(r.t) + ",row=" +
                              row_labels[static_cast<std::size_t>(r.ri)] + ",col=" +
                              col_labels[static_cast<std::size_t>(r.ci)] + ") in " + path);
        seen[idx] = 1;
        data[idx] = r.v;
    }
    if (static_cast<long long>(recs.size()) != total) {
        std::vector<std::string> missing;
        long long n_missing = 0;
        for (long long t = 1; t <= T && static_cast<long long>(missing.size()) <= 20; ++t)
            for (long long i = 0; i < p; ++i)
                for (long long j = 0; j < q; ++j) {
                    const std::size_t idx = static_cast<std::size_t>(((t - 1) * p + i) * q + j);
                    if (!seen[idx]) {
                        ++n_missing;
                        if (missing.size() < 20)
                            missing.push_back("(t=" + std::to_string(t) + ",row=" +
                                              row_labels[static_cast<std::size_t>(i)] + ",col=" +
                                              col_labels[static_cast<std::size_t>(j)] + ")");
                    }
                }
        // the scan above may exit early; report the exact count from the totals
        n_missing = total - static_cast<long long>(recs.size());
        std::string msg = "incomplete grid in " + path + ": " + std::to_string(n_missing) +
                          " missing cell(s): ";
        for (std::size_t i = 0; i < missing.size(); ++i) {
            if (i) msg += ", ";
            msg += missing[i];
        }
        if (n_missing > static_cast<long long>(missing.size()))
            msg += ", ... (+" +
                   std::to_string(n_missing - static_cast<long long>(missing.size())) + " more)";
        throw IngestError(msg);
    }

    std::vector<Matrix> frames;
    frames.reserve(static_cast<std::size_t>(T));
    for (long long t = 0; t < T; ++t) {
        Matrix X(p, q);
        for (long long i = 0; i < p; ++i)
            for (long long j = 0; j < q; ++j)
                X(i, j) = data[static_cast<std::size_t>((t * p + i) * q + j)];
        frames.push_back(std::move(X));
    }
    return MatrixSeries(std::move(frames), row_labels, col_labels);
}

void save_tensor_csv(const MatrixSeries& series, const std::string& path) {
    const std::vector<std::string> rlab =
        series.row_labels().empty() ? default_labels(series.rows(), "r") : series.row_labels();
    const std::vector<std::string> clab =
        series.col_labels().empty() ? default_labels(series.cols(), "c") : series.col_labels();
    std::string out = "t,row,col,value\n";
    for (Index t = 0; t < series.length(); ++t) {
        const Matrix& X = series.frame(t);
        for (Index i = 0; i < series.rows(); ++i)
            for (Index j = 0; j < series.cols(); ++j) {
                out += std::to_string(t + 1);
                out += ',';
                out += csv_escape(rlab[static_cast<std::size_t>(i)]);
                out += ',';
                out += csv_escape(clab[static_cast<std::size_t>(j)]);
                out += ',';
                out += fmt_double(X(i, j));
                out += '\n';
            }
    }
    write_text_file(path, out);
}

void write_matrix_csv(const Matrix& M, const std::string& path, const std::string& col_prefix) {
    std::string out;
    for (Index j = 0; j < M.cols(); ++j) {
        if (j) out += ',';
        out += col_prefix + std::to_string(j + 1);
    }
    out += '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out += ',';
            out += fmt_double(M(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

Matrix read_matrix_csv(const std::string& path) {
    const auto rows = parse_csv(read_text_file(path), path);
    if (rows.empty()) return Matrix(0, 0);
    std::size_t start = 0;
    double tmp = 0;
    if (!rows[0].empty() && !parses_as_double(rows[0][0], &tmp)) start = 1;  // header
    if (start >= rows.size()) return Matrix(0, 0);
    const std::size_t ncol = rows[start].size();
    Matrix M(static_cast<Index>(rows.size() - start), static_cast<Index>(ncol));
    for (std::size_t i = start; i < rows.size(); ++i) {
        if (rows[i].size() != ncol)
            throw IngestError("line " + std::to_string(i + 1) + ": expected " +
                              std::to_string(ncol) + " fields, got " +
                              std::to_string(rows[i].size()));
        for (std::size_t j = 0; j < ncol; ++j)
            M(static_cast<Index>(i - start), static_cast<Index>(j)) =
                parse_double_field(rows[i][j], "value", i + 1);
    }
    return M;
}

void write_vector_csv(const Vector& v, const std::string& path, const std::string& name) {
    std::string out = "index," + csv_escape(name) + "\n";
    for (Index i = 0; i < v.size(); ++i)
        out += std::to_string(i + 1) + "," + fmt_double(v(i)) + "\n";
    write_text_file(path, out);
}

Vector read_vector_csv(const std::string& path) {
    const Matrix M = read_matrix_csv(path);
    if (M.cols() == 0) return Vector(0);
    if (M.cols() != 2)
        throw IngestError("expected two columns (index,value) in " + path);
    return M.col(1);
}

void write_membership_csv(const std::vector<std::string>& labels, const IntVector& membership,
                          const std::string& path) {
    if (static_cast<Index>(labels.size()) != membership.size())
        throw DimensionError("label count " + std::to_string(labels.size()) +
                             " does not match membership length " +
                             std::to_string(membership.size()));
    std::string out = "label,cluster\n";
    for (Index i = 0; i < membership.size(); ++i)
        out += csv_escape(labels[static_cast<std::size_t>(i)]) + "," +
               std::to_string(membership(i)) + "\n";
    write_text_file(path, out);
}

std::pair<std::vector<std::string>, IntVector> read_membership_csv(const std::string& path) {
    const auto rows = parse_csv(read_text_file(path), path);
    std::size_t start = 0;
    if (!rows.empty() && rows[0].size() == 2 && !parses_as_int(rows[0][1])) start = 1;
    std::vector<std::string> labels;
    IntVector membership(static_cast<Index>(rows.size() - start));
    for (std::size_t i = start; i < rows.size(); ++i) {
        if (rows[i].size() != 2)
            throw IngestError("line " + std::to_string(i + 1) +
                              ": expected 2 fields (label,cluster)");
        labels.push_back(rows[i][0]);
        membership(static_cast<Index>(i - start)) =
            static_cast<int>(parse_int_field(rows[i][1], "cluster", i + 1));
    }
    return {std::move(labels), std::move(membership)};
}

MatrixSeries preprocess(const MatrixSeries& series, bool demean, bool standardize,
                        std::vector<std::string>* warnings) {
    if (!demean && !standardize) return series;
    const Index T = series.length(), p = series.rows(), q = series.cols();
    if (standardize && T < 3)
        throw InsufficientDataError("standardizing requires T >= 3, got T = " +
                                    std::to_string(T));

    Matrix mean = Matrix::Zero(p, q);
    for (Index t = 0; t < T; ++t) mean += series.frame(t);
    mean /= static_cast<double>(T);

    Matrix scale = Matrix::Ones(p, q);
    if (standardize) {
        Matrix ss = Matrix::Zero(p, q);
        for (Index t = 0; t < T; ++t) {
            const Matrix d = series.frame(t) - mean;
            ss += d.cwiseProduct(d);
        }
        const Matrix sd = (ss / static_cast<double>(T - 1)).cwiseSqrt();
        long long n_degenerate = 0;
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < q; ++j) {
                if (sd(i, j) < 1e-12) {
                    ++n_degenerate;
                    if (warnings && n_degenerate <= 20)
                        warnings->push_back("cell (" + std::to_string(i + 1) + "," +
                                            std::to_string(j + 1) +
                                            ") has near-zero sd; left unscaled");
                } else {
                    scale(i, j) = sd(i, j);
                }
            }
        if (warnings && n_degenerate > 20)
            warnings->push_back("... (+" + std::to_string(n_degenerate - 20) +
                                " more near-zero-sd cells)");
    }

    std::vector<Matrix> frames;
    frames.reserve(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
        Matrix X = series.frame(t);
        if (demean) X -= mean;
        if (standardize) X = X.cwiseQuotient(scale);
        frames.push_back(std::move(X));
    }
    return MatrixSeries(std::move(frames), series.row_labels(), series.col_labels());
}

void RunConfig::validate() const {
    if (l0 < 1) throw ConfigError("l0 must be >= 1, got " + std::to_string(l0));
    if (J0_row < 0) throw ConfigError("J0_row must be >= 0, got " + std::to_string(J0_row));
    if (J0_col < 0) throw ConfigError("J0_col must be >= 0, got " + std::to_string(J0_col));
    if (kmeans_restarts < 1)
        throw ConfigError("kmeans_restarts must be >= 1, got " + std::to_string(kmeans_restarts));
    if (kmeans_max_iter < 1)
        throw ConfigError("kmeans_max_iter must be >= 1, got " + std::to_string(kmeans_max_iter));
    if (!(kmeans_tol >= 0)) throw ConfigError("kmeans_tol must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1, got " + std::to_string(threads));
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    const std::string v = trim(value);
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw ConfigError("cannot parse boolean for '" + key + "' from '" + value + "'");
}

long long parse_config_int(const std::string& value, const std::string& key) {
    long long v = 0;
    if (!parses_as_int(value, &v))
        throw ConfigError("cannot parse integer for '" + key + "' from '" + value + "'");
    return v;
}

double parse_config_double(const std::string& value, const std::string& key) {
    double v = 0;
    if (!parses_as_double(value, &v))
        throw ConfigError("cannot parse number for '" + key + "' from '" + value + "'");
    return v;
}

}  // namespace

void set_run_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "l0") cfg.l0 = static_cast<int>(parse_config_int(value, key));
    else if (key == "J0_row") cfg.J0_row = static_cast<int>(parse_config_int(value, key));
    else if (key == "J0_col") cfg.J0_col = static_cast<int>(parse_config_int(value, key));
    else if (key == "demean") cfg.demean = parse_bool(value, key);
    else if (key == "standardize") cfg.standardize = parse_bool(value, key);
    else if (key == "kmeans_restarts")
        cfg.kmeans_restarts = static_cast<int>(parse_config_int(value, key));
    else if (key == "kmeans_max_iter")
        cfg.kmeans_max_iter = static_cast<int>(parse_config_int(value, key));
    else if (key == "kmeans_tol") cfg.kmeans_tol = parse_config_double(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_config_int(value, key));
    else if (key == "out_dir") cfg.out_dir = trim(value);
    else if (key == "threads") cfg.threads = static_cast<int>(parse_config_int(value, key));
    else throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    std::size_t pos = 0, line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key=value, got '" + line + "'");
        set_run_config_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    base.validate();
    return base;
}

}  // namespace mtsb
