#include "csd/dataset.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace csd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

double parse_number(const std::string& raw, const std::string& column, std::size_t line_no) {
    const std::string s = trim(raw);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" + s +
                         "' as a number in column '" + column + "'");
    }
    return out;
}

// One logical CSV record honoring RFC-4180 quoting (embedded commas, quotes,
// and newlines inside quoted fields).
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line_no;
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(field);
            field.clear();
        } else if (ch == '\n') {
            ++line_no;
            if (ch == '\n' && !field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
            return true;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
    if (any) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
        return true;
    }
    return false;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "continuous") return ColumnKind::Continuous;
    if (s == "binary") return ColumnKind::Binary;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "target") return ColumnKind::Target;
    throw SchemaError("unknown column kind '" + s + "'");
}

std::string to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Continuous: return "continuous";
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Categorical: return "categorical";
        case ColumnKind::Target: return "target";
    }
    return "continuous";
}

std::vector<std::string> Dataset::predictor_names() const {
    std::vector<std::string> out;
    out.reserve(schema.size());
    for (const auto& col : schema) {
        if (col.kind != ColumnKind::Target) out.push_back(col.name);
    }
    return out;
}

Eigen::Index Dataset::column_index(const std::string& name) const {
    Eigen::Index i = 0;
    for (const auto& col : schema) {
        if (col.kind == ColumnKind::Target) continue;
        if (col.name == name) return i;
        ++i;
    }
    return -1;
}

bool Dataset::has_missing() const { return values.hasNaN(); }

std::vector<ColumnSchema> load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open schema file '" + path + "'");
    std::vector<ColumnSchema> schema;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto comma = t.find(',');
        if (comma == std::string::npos) {
            throw SchemaError("schema line " + std::to_string(line_no) + ": expected 'name,kind'");
        }
        ColumnSchema col;
        col.name = trim(t.substr(0, comma));
        col.kind = column_kind_from_string(trim(t.substr(comma + 1)));
        if (col.name.empty()) throw SchemaError("schema line " + std::to_string(line_no) + ": empty name");
        if (!seen.insert(col.name).second) throw SchemaError("duplicate column '" + col.name + "' in schema");
        schema.push_back(std::move(col));
    }
    return schema;
}

void write_schema(const std::vector<ColumnSchema>& schema, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write schema file '" + path + "'");
    for (const auto& col : schema) out << col.name << "," << to_string(col.kind) << "\n";
}

Dataset load_csv(const std::string& path, const std::vector<ColumnSchema>& schema) {
    std::size_t target_count = 0;
    std::set<std::string> names;
    for (const auto& col : schema) {
        if (col.kind == ColumnKind::Target) ++target_count;
        if (!names.insert(col.name).second) throw SchemaError("duplicate column '" + col.name + "' in schema");
    }
    if (target_count != 1) {
        throw SchemaError("schema must declare exactly one target column, found " +
                          std::to_string(target_count));
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file '" + path + "'");

    std::size_t line_no = 1;
    std::vector<std::string> header;
    if (!read_record(in, header, line_no)) throw ParseError("empty CSV file '" + path + "'");

    // Map each schema column to its position in the file.
    std::vector<std::size_t> file_pos(schema.size());
    for (std::size_t s = 0; s < schema.size(); ++s) {
        const auto it = std::find(header.begin(), header.end(), schema[s].name);
        if (it == header.end()) {
            throw SchemaError("column '" + schema[s].name + "' declared in schema but absent from header");
        }
        file_pos[s] = static_cast<std::size_t>(it - header.begin());
    }
    for (const auto& h : header) {
        if (!names.count(h)) throw SchemaError("column '" + h + "' in header but not in schema");
    }

    struct RawRow {
        std::vector<std::string> cells; // one per schema column
        double target = 0.0;
    };
    std::vector<RawRow> rows;
    std::vector<std::string> record;
    while (read_record(in, record, line_no)) {
        if (record.size() == 1 && trim(record[0]).empty()) continue;
        if (record.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(record.size()));
        }
        RawRow row;
        row.cells.resize(schema.size());
        bool drop = false;
        for (std::size_t s = 0; s < schema.size(); ++s) {
            const std::string& cell = record[file_pos[s]];
            if (schema[s].kind == ColumnKind::Target) {
                const std::string t = trim(cell);
                if (is_missing_token(t)) {
                    drop = true;
                    continue;
                }
                const double v = parse_number(t, schema[s].name, line_no);
                if (v != 0.0 && v != 1.0) {
                    throw ValidationError("line " + std::to_string(line_no) + ": target value '" + t +
                                          "' is not binary");
                }
                row.target = v;
            } else {
                row.cells[s] = cell;
            }
        }
        if (!drop) rows.push_back(std::move(row));
    }

    // Collect categorical levels (sorted; missing cells become level "NA").
    std::map<std::size_t, std::vector<std::string>> levels;
    for (std::size_t s = 0; s < schema.size(); ++s) {
        if (schema[s].kind != ColumnKind::Categorical) continue;
        std::set<std::string> uniq;
        for (const auto& row : rows) {
            std::string v = trim(row.cells[s]);
            if (is_missing_token(v)) v = "NA";
            uniq.insert(v);
        }
        levels[s] = std::vector<std::string>(uniq.begin(), uniq.end());
    }

    Dataset ds;
    for (std::size_t s = 0; s < schema.size(); ++s) {
        switch (schema[s].kind) {
            case ColumnKind::Target:
                ds.target_name = schema[s].name;
                break;
            case ColumnKind::Categorical:
                for (const auto& lvl : levels[s]) {
                    ds.schema.push_back({schema[s].name + "=" + lvl, ColumnKind::Binary});
                }
                break;
            default:
                ds.schema.push_back(schema[s]);
        }
    }
    const Eigen::Index n_cols = static_cast<Eigen::Index>(ds.schema.size());
    ds.schema.push_back({ds.target_name, ColumnKind::Target});

    ds.values.resize(static_cast<Eigen::Index>(rows.size()), n_cols);
    ds.target.resize(static_cast<Eigen::Index>(rows.size()));

    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index c = 0;
        for (std::size_t s = 0; s < schema.size(); ++s) {
            switch (schema[s].kind) {
                case ColumnKind::Target:
                    break;
                case ColumnKind::Categorical: {
                    std::string v = trim(rows[r].cells[s]);
                    if (is_missing_token(v)) v = "NA";
                    for (const auto& lvl : levels[s]) {
                        ds.values(static_cast<Eigen::Index>(r), c++) = (v == lvl) ? 1.0 : 0.0;
                    }
                    break;
                }
                case ColumnKind::Binary: {
                    const std::string t = trim(rows[r].cells[s]);
                    if (is_missing_token(t)) {
                        ds.values(static_cast<Eigen::Index>(r), c++) = kNaN;
                    } else {
                        const double v = parse_number(t, schema[s].name, 0);
                        if (v != 0.0 && v != 1.0) {
                            throw ValidationError("binary column '" + schema[s].name +
                                                  "' contains non-binary value '" + t + "'");
                        }
                        ds.values(static_cast<Eigen::Index>(r), c++) = v;
                    }
                    break;
                }
                case ColumnKind::Continuous: {
                    const std::string t = trim(rows[r].cells[s]);
                    ds.values(static_cast<Eigen::Index>(r), c++) =
                        is_missing_token(t) ? kNaN : parse_number(t, schema[s].name, 0);
                    break;
                }
            }
        }
        ds.target(static_cast<Eigen::Index>(r)) = rows[r].target;
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV file '" + path + "'");
    const auto names = ds.predictor_names();
    for (const auto& n : names) out << csv_escape(n) << ",";
    out << csv_escape(ds.target_name) << "\n";
    for (Eigen::Index r = 0; r < ds.row_count(); ++r) {
        for (Eigen::Index c = 0; c < ds.var_count(); ++c) {
            const double v = ds.values(r, c);
            if (std::isnan(v)) out << ",";
            else out << format_double(v) << ",";
        }
        out << format_double(ds.target(r)) << "\n";
    }
}

Dataset impute_median(const Dataset& ds) {
    Dataset out = ds;
    for (Eigen::Index c = 0; c < out.var_count(); ++c) {
        std::vector<double> present;
        present.reserve(static_cast<std::size_t>(out.row_count()));
        for (Eigen::Index r = 0; r < out.row_count(); ++r) {
            const double v = out.values(r, c);
            if (!std::isnan(v)) present.push_back(v);
        }
        if (present.size() == static_cast<std::size_t>(out.row_count())) continue;
        if (present.empty()) {
            throw DegenerateDataError("column '" + out.schema[static_cast<std::size_t>(c)].name +
                                      "' has no observed values to impute from");
        }
        std::sort(present.begin(), present.end());
        const std::size_t n = present.size();
        const double median = (n % 2 == 1) ? present[n / 2]
                                           : 0.5 * (present[n / 2 - 1] + present[n / 2]);
        for (Eigen::Index r = 0; r < out.row_count(); ++r) {
            if (std::isnan(out.values(r, c))) out.values(r, c) = median;
        }
    }
    return out;
}

std::pair<Dataset, StandardizeParams> standardize(const Dataset& ds) {
    Dataset out = ds;
    StandardizeParams params;
    params.mean.resize(static_cast<std::size_t>(ds.var_count()));
    params.stddev.resize(static_cast<std::size_t>(ds.var_count()));
    const double b = static_cast<double>(ds.row_count());
    for (Eigen::Index c = 0; c < ds.var_count(); ++c) {
        const double mean = ds.values.col(c).mean();
        const double var = (ds.values.col(c).array() - mean).square().sum() / b;
        const double sd = std::sqrt(var);
        if (!(sd > 0.0) || !std::isfinite(sd)) {
            throw DegenerateDataError("column '" + ds.schema[static_cast<std::size_t>(c)].name +
                                      "' has zero variance; cannot standardize");
        }
        out.values.col(c) = (ds.values.col(c).array() - mean) / sd;
        params.mean[static_cast<std::size_t>(c)] = mean;
        params.stddev[static_cast<std::size_t>(c)] = sd;
    }
    return {std::move(out), std::move(params)};
}

} // namespace csd
