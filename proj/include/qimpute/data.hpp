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
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qimpute::data {

enum class ColumnKind { Numeric, Categorical, Text };

std::string_view to_string(ColumnKind kind);
ColumnKind parse_column_kind(std::string_view s);

struct ColumnSpec {
    std::string name;
    ColumnKind kind;

    friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

/// Ordered, uniquely named columns plus the token that marks a missing field.
class DatasetSchema {
  public:
    DatasetSchema(std::string name, std::vector<ColumnSpec> columns,
                  std::string missing_token = "");

    const std::string& name() const noexcept { return name_; }
    const std::vector<ColumnSpec>& columns() const noexcept { return columns_; }
    const std::string& missing_token() const noexcept { return missing_token_; }
    std::size_t size() const noexcept { return columns_.size(); }
    const ColumnSpec& column(std::size_t i) const { return columns_.at(i); }
    ColumnKind kind(std::size_t i) const { return columns_.at(i).kind; }

    std::optional<std::size_t> find(std::string_view column_name) const;
    /// Like find(), but throws std::invalid_argument naming the column.
    std::size_t index_of(std::string_view column_name) const;

    friend bool operator==(const DatasetSchema&, const DatasetSchema&) = default;

  private:
    std::string name_;
    std::vector<ColumnSpec> columns_;
    std::string missing_token_;
};

/// Plain-text schema: `name=<dataset>`, `missing_token=<tok>`, then one
/// `column:kind` line per column. '#' starts a comment line.
DatasetSchema read_schema(const std::filesystem::path& path);
DatasetSchema parse_schema(std::string_view text);
void write_schema(const DatasetSchema& schema, const std::filesystem::path& path);
std::string format_schema(const DatasetSchema& schema);

struct Missing {
    friend bool operator==(Missing, Missing) { return true; }
};

/// A cell is missing, a real (numeric columns) or a string (categorical and
/// text columns). The column kind comes from the schema.
using Cell = std::variant<Missing, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }

class Table {
  public:
    explicit Table(DatasetSchema schema) : schema_(std::move(schema)) {}

    const DatasetSchema& schema() const noexcept { return schema_; }
    std::size_t n_rows() const noexcept { return rows_.size(); }
    std::size_t n_cols() const noexcept { return schema_.size(); }

    /// Appends a row. Throws std::invalid_argument on width mismatch, a
    /// cell type that does not fit its column, or a non-finite number.
    void add_row(std::vector<Cell> row);

    const Cell& at(std::size_t r, std::size_t c) const { return rows_.at(r).at(c); }
    /// Type-checked write.
    void set(std::size_t r, std::size_t c, Cell value);

    double number(std::size_t r, std::size_t c) const;
    const std::string& text(std::size_t r, std::size_t c) const;

    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    friend bool operator==(const Table&, const Table&) = default;

  private:
    void check_cell(std::size_t c, const Cell& value) const;

    DatasetSchema schema_;
    std::vector<std::vector<Cell>> rows_;
};

enum class MaskProvenance { NativeMissing, InjectedMcar, InjectedMnar };

std::string_view to_string(MaskProvenance p);

/// Boolean rows x cols overlay; true = missing or held out.
class Mask {
  public:
    Mask(std::size_t rows, std::size_t cols, MaskProvenance provenance);

    std::size_t n_rows() const noexcept { return rows_; }
    std::size_t n_cols() const noexcept { return cols_; }
    MaskProvenance provenance() const noexcept { return provenance_; }

    bool at(std::size_t r, std::size_t c) const { return bits_.at(r * cols_ + c) != 0; }
    void set(std::size_t r, std::size_t c, bool v) { bits_.at(r * cols_ + c) = v ? 1 : 0; }

    std::size_t count() const noexcept;
    /// Stable 64-bit digest of the shape and bits.
    std::uint64_t hash() const noexcept;

    friend bool operator==(const Mask& a, const Mask& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.bits_ == b.bits_;
    }

  private:
    std::size_t rows_;
    std::size_t cols_;
    MaskProvenance provenance_;
    std::vector<std::uint8_t> bits_;
};

/// Mask of cells that are Missing in `table`.
Mask native_mask(const Table& table);

/// Union of two same-shape masks; provenance taken from `a`.
Mask mask_union(const Mask& a, const Mask& b);

/// Copy of `table` with every masked cell replaced by Missing.
Table apply_mask(const Table& table, const Mask& mask);

/// Marks each observed non-text cell missing with probability `rate`.
/// Natively missing cells and text cells are never selected.
Mask inject_mcar(const Table& table, double rate, std::uint64_t seed);

/// Stable 64-bit digest of a table's cell contents.
std::uint64_t table_hash(const Table& table);

/// Parses a CSV whose header must equal the schema's column names in order.
/// Empty fields and fields equal to the missing token become Missing.
/// Errors are LoadError with 1-based row and the column name.
Table load_csv(const std::filesystem::path& path, const DatasetSchema& schema);
Table parse_csv(std::string_view text, const DatasetSchema& schema);

/// Numeric cells use 17 significant digits; fields containing the delimiter,
/// quotes or newlines are quoted.
void save_csv(const Table& table, const std::filesystem::path& path);
std::string format_csv(const Table& table);

/// Splits RFC 4180 CSV text into records.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view text);

/// Mask as a 0/1 CSV with the schema header.
void save_mask_csv(const Mask& mask, const DatasetSchema& schema,
                   const std::filesystem::path& path);
Mask load_mask_csv(const std::filesystem::path& path, const DatasetSchema& schema,
                   MaskProvenance provenance);

/// Working table (MNAR rule applied) plus the full pre-masking truth.
struct SyntheticDataset {
    Table working;
    Table truth;
};

/// Synthetic healthcare table: 12 numeric vitals, 6 categoricals (including
/// `diagnosis` in {stable, guarded, critical}) and 2 free-text notes, 20
/// columns total. blood_pressure is Missing in `working` whenever
/// diagnosis == stable; `truth` keeps the drawn value.
SyntheticDataset synth_healthcare_generate(std::size_t n_rows, std::uint64_t seed);

DatasetSchema synth_healthcare_schema();

} // namespace qimpute::data
