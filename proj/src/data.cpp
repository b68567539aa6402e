// Copyright 2026 The qimpute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qimpute/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qimpute/error.hpp"
#include "qimpute/rng.hpp"

namespace qimpute::data {

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Text: return "text";
    }
    return "?";
}

ColumnKind parse_column_kind(std::string_view s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "text") return ColumnKind::Text;
    throw std::invalid_argument("unknown column kind '" + std::string(s) + "'");
}

std::string_view to_string(MaskProvenance p) {
    switch (p) {
    case MaskProvenance::NativeMissing: return "native";
    case MaskProvenance::InjectedMcar: return "mcar";
    case MaskProvenance::InjectedMnar: return "mnar";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Schema

DatasetSchema::DatasetSchema(std::string name, std::vector<ColumnSpec> columns,
                             std::string missing_token)
    : name_(std::move(name)), columns_(std::move(columns)),
      missing_token_(std::move(missing_token)) {
    if (columns_.empty()) throw std::invalid_argument("schema has no columns");
    std::set<std::string> seen;
    for (const auto& c : columns_) {
        if (c.name.empty()) throw std::invalid_argument("empty column name");
        if (!seen.insert(c.name).second)
            throw std::invalid_argument("duplicate column name '" + c.name + "'");
    }
}

std::optional<std::size_t> DatasetSchema::find(std::string_view column_name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i].name == column_name) return i;
    return std::nullopt;
}

std::size_t DatasetSchema::index_of(std::string_view column_name) const {
    if (auto i = find(column_name)) return *i;
    throw std::invalid_argument("unknown column '" + std::string(column_name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace

DatasetSchema parse_schema(std::string_view text) {
    std::string name = "dataset";
    std::string missing;
    std::vector<ColumnSpec> cols;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line.starts_with("missing_token=")) {
            missing = std::string(line.substr(14));
            continue;
        }
        if (line.starts_with("name=")) {
            name = std::string(line.substr(5));
            continue;
        }
        const auto colon = line.rfind(':');
        if (colon == std::string_view::npos)
            throw LoadError("schema line " + std::to_string(line_no) +
                            ": expected 'name:kind'");
        try {
            cols.push_back({std::string(trim(line.substr(0, colon))),
                            parse_column_kind(trim(line.substr(colon + 1)))});
        } catch (const std::invalid_argument& e) {
            throw LoadError("schema line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    try {
        return DatasetSchema(std::move(name), std::move(cols), std::move(missing));
    } catch (const std::invalid_argument& e) {
        throw LoadError(std::string("schema: ") + e.what());
    }
}

DatasetSchema read_schema(const std::filesystem::path& path) {
    return parse_schema(read_file(path));
}

std::string format_schema(const DatasetSchema& schema) {
    std::string out = "name=" + schema.name() + "\n";
    out += "missing_token=" + schema.missing_token() + "\n";
    for (const auto& c : schema.columns())
        out += c.name + ":" + std::string(to_string(c.kind)) + "\n";
    return out;
}

void write_schema(const DatasetSchema& schema, const std::filesystem::path& path) {
    write_file(path, format_schema(schema));
}

// ---------------------------------------------------------------------------
// Table

void Table::check_cell(std::size_t c, const Cell& value) const {
    if (is_missing(value)) return;
    const ColumnKind kind = schema_.kind(c);
    if (kind == ColumnKind::Numeric) {
        const double* v = std::get_if<double>(&value);
        if (v == nullptr)
            throw std::invalid_argument("column '" + schema_.column(c).name +
                                        "' expects a number");
        if (!std::isfinite(*v))
            throw std::invalid_argument("column '" + schema_.column(c).name +
                                        "' got a non-finite number");
    } else if (!std::holds_alternative<std::string>(value)) {
        throw std::invalid_argument("column '" + schema_.column(c).name +
                                    "' expects a string");
    }
}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != schema_.size())
        throw std::invalid_argument("row has " + std::to_string(row.size()) +
                                    " cells, schema has " +
                                    std::to_string(schema_.size()));
    for (std::size_t c = 0; c < row.size(); ++c) check_cell(c, row[c]);
    rows_.push_back(std::move(row));
}

void Table::set(std::size_t r, std::size_t c, Cell value) {
    check_cell(c, value);
    rows_.at(r).at(c) = std::move(value);
}

double Table::number(std::size_t r, std::size_t c) const {
    const double* v = std::get_if<double>(&at(r, c));
    if (v == nullptr)
        throw ContractViolation("cell (" + std::to_string(r) + ", " +
                                schema_.column(c).name + ") is not a number");
    return *v;
}

const std::string& Table::text(std::size_t r, std::size_t c) const {
    const std::string* v = std::get_if<std::string>(&at(r, c));
    if (v == nullptr)
        throw ContractViolation("cell (" + std::to_string(r) + ", " +
                                schema_.column(c).name + ") is not a string");
    return *v;
}

// ---------------------------------------------------------------------------
// Masks

Mask::Mask(std::size_t rows, std::size_t cols, MaskProvenance provenance)
    : rows_(rows), cols_(cols), provenance_(provenance), bits_(rows * cols, 0) {}

std::size_t Mask::count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

std::uint64_t Mask::hash() const noexcept {
    std::uint64_t h = splitmix64(rows_ * 0x100000001b3ULL + cols_);
    for (auto b : bits_) h = (h ^ b) * 0x100000001b3ULL;
    return h;
}

Mask native_mask(const Table& table) {
    Mask m(table.n_rows(), table.n_cols(), MaskProvenance::NativeMissing);
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            m.set(r, c, is_missing(table.at(r, c)));
    return m;
}

Mask mask_union(const Mask& a, const Mask& b) {
    if (a.n_rows() != b.n_rows() || a.n_cols() != b.n_cols())
        throw std::invalid_argument("mask shapes differ");
    Mask m(a.n_rows(), a.n_cols(), a.provenance());
    for (std::size_t r = 0; r < a.n_rows(); ++r)
        for (std::size_t c = 0; c < a.n_cols(); ++c) m.set(r, c, a.at(r, c) || b.at(r, c));
    return m;
}

Table apply_mask(const Table& table, const Mask& mask) {
    if (mask.n_rows() != table.n_rows() || mask.n_cols() != table.n_cols())
        throw std::invalid_argument("mask shape does not match table");
    Table out = table;
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            if (mask.at(r, c)) out.set(r, c, Missing{});
    return out;
}

Mask inject_mcar(const Table& table, double rate, std::uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0))
        throw std::invalid_argument("MCAR rate must be in [0, 1]");
    Mask m(table.n_rows(), table.n_cols(), MaskProvenance::InjectedMcar);
    Rng rng(seed);
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            if (table.schema().kind(c) == ColumnKind::Text) continue;
            if (is_missing(table.at(r, c))) continue;
            // rate 1 must select every eligible cell; uniform() < 1 always holds.
            if (rng.bernoulli(rate)) m.set(r, c, true);
        }
    }
    return m;
}

std::uint64_t table_hash(const Table& table) {
    std::uint64_t h = fnv1a64(format_schema(table.schema()));
    for (const auto& row : table.rows()) {
        for (const auto& cell : row) {
            std::uint64_t ch = 0x9e37;
            if (const double* v = std::get_if<double>(&cell)) {
                std::uint64_t bits;
                std::memcpy(&bits, v, sizeof bits);
                ch = splitmix64(bits);
            } else if (const std::string* s = std::get_if<std::string>(&cell)) {
                ch = fnv1a64(*s) ^ 0x5555;
            }
            h = splitmix64(h ^ ch);
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        any = true;
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            record.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            any = false;
        } else {
            field.push_back(ch);
        }
    }
    if (in_quotes) throw LoadError("unterminated quoted field at end of input");
    if (any) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    return records;
}

Table parse_csv(std::string_view text, const DatasetSchema& schema) {
    auto records = parse_csv_records(text);
    if (records.empty()) throw LoadError("empty CSV: missing header row");
    const auto& header = records.front();
    if (header.size() != schema.size())
        throw LoadError("header has " + std::to_string(header.size()) +
                        " columns, schema has " + std::to_string(schema.size()));
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] != schema.column(c).name)
            throw LoadError("header column " + std::to_string(c + 1) + " is '" +
                            header[c] + "', schema expects '" +
                            schema.column(c).name + "'");

    Table table(schema);
    for (std::size_t r = 1; r < records.size(); ++r) {
        auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty() && schema.size() > 1) continue;
        if (rec.size() != schema.size())
            throw LoadError("row " + std::to_string(r) + ": expected " +
                            std::to_string(schema.size()) + " fields, got " +
                            std::to_string(rec.size()));
        std::vector<Cell> row;
        row.reserve(rec.size());
        for (std::size_t c = 0; c < rec.size(); ++c) {
            std::string& f = rec[c];
            if (f.empty() || f == schema.missing_token()) {
                row.emplace_back(Missing{});
                continue;
            }
            if (schema.kind(c) == ColumnKind::Numeric) {
                double v = 0.0;
                const auto sv = trim(f);
                const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
                if (ec != std::errc{} || ptr != sv.data() + sv.size() || !std::isfinite(v))
                    throw LoadError("row " + std::to_string(r) + ", column '" +
                                    schema.column(c).name + "': cannot parse '" + f +
                                    "' as a number");
                row.emplace_back(v);
            } else {
                row.emplace_back(std::move(f));
            }
        }
        table.add_row(std::move(row));
    }
    return table;
}

Table load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
    try {
        return parse_csv(read_file(path), schema);
    } catch (const LoadError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

namespace {

void append_field(std::string& out, std::string_view f) {
    const bool quote = f.find_first_of(",\"\n\r") != std::string_view::npos ||
                       (!f.empty() && (f.front() == ' ' || f.back() == ' '));
    if (!quote) {
        out.append(f);
        return;
    }
    out.push_back('"');
    for (char ch : f) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
}

// Shortest text that parses back to the same double.
std::string format_number(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string format_csv(const Table& table) {
    const auto& schema = table.schema();
    std::string out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out.push_back(',');
        append_field(out, schema.column(c).name);
    }
    out.push_back('\n');
    for (const auto& row : table.rows()) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out.push_back(',');
            if (is_missing(row[c])) {
                append_field(out, schema.missing_token());
            } else if (const double* v = std::get_if<double>(&row[c])) {
                out += format_number(*v);
            } else {
                const auto& s = std::get<std::string>(row[c]);
                // A literal empty string would read back as Missing.
                if (s.empty() || s == schema.missing_token())
                    throw std::invalid_argument(
                        "string cell collides with the missing token in column '" +
                        schema.column(c).name + "'");
                append_field(out, s);
            }
        }
        out.push_back('\n');
    }
    return out;
}

void save_csv(const Table& table, const std::filesystem::path& path) {
    write_file(path, format_csv(table));
}

void save_mask_csv(const Mask& mask, const DatasetSchema& schema,
                   const std::filesystem::path& path) {
    std::string out;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c) out.push_back(',');
        append_field(out, schema.column(c).name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < mask.n_rows(); ++r) {
        for (std::size_t c = 0; c < mask.n_cols(); ++c) {
            if (c) out.push_back(',');
            out.push_back(mask.at(r, c) ? '1' : '0');
        }
        out.push_back('\n');
    }
    write_file(path, out);
}

Mask load_mask_csv(const std::filesystem::path& path, const DatasetSchema& schema,
                   MaskProvenance provenance) {
    const auto records = parse_csv_records(read_file(path));
    if (records.empty()) throw LoadError(path.string() + ": empty mask file");
    if (records.front().size() != schema.size())
        throw LoadError(path.string() + ": mask header does not match schema");
    std::size_t n_rows = 0;
    for (std::size_t r = 1; r < records.size(); ++r)
        if (!(records[r].size() == 1 && records[r][0].empty())) ++n_rows;
    Mask m(n_rows, schema.size(), provenance);
    std::size_t row = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != schema.size())
            throw LoadError(path.string() + ": row " + std::to_string(r) +
                            " has wrong width");
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (rec[c] != "0" && rec[c] != "1")
                throw LoadError(path.string() + ": row " + std::to_string(r) +
                                ", column '" + schema.column(c).name +
                                "': expected 0 or 1");
            m.set(row, c, rec[c] == "1");
        }
        ++row;
    }
    return m;
}

} // namespace qimpute::data
