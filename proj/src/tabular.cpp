#include "engage/tabular.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string_view>

#include "engage/csv.hpp"
#include "engage/errors.hpp"

namespace engage {

namespace {

bool is_blank(const std::string& cell) {
    for (char c : cell) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::string_view trimmed(const std::string& cell) {
    std::string_view v = cell;
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
}

std::int64_t parse_count(const std::string& cell, std::size_t row, const std::string& column) {
    const auto v = trimmed(cell);
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ParseError(row, column, "not an integer: '" + cell + "'");
    return out;
}

double parse_real(const std::string& cell, std::size_t row, const std::string& column) {
    const auto v = trimmed(cell);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ParseError(row, column, "not a number: '" + cell + "'");
    if (!std::isfinite(out)) throw ParseError(row, column, "not finite: '" + cell + "'");
    return out;
}

Date parse_date(const std::string& cell, std::size_t row, const std::string& column) {
    const auto parsed = Date::parse(trimmed(cell));
    if (!parsed)
        throw ParseError(row, column,
                         "not a date (expected YYYY-MM-DD or YYYYMMDD): '" + cell + "'");
    return *parsed;
}

int require_column(const csv::Table& table, const std::string& name) {
    const int idx = table.column_index(name);
    if (idx < 0) throw MissingColumn(name);
    return idx;
}

RawTable load_impl(const std::string& path, const ColumnMap& schema, bool require_engagement) {
    const csv::Table file = csv::read_file(path);

    const int col_views = require_column(file, schema.views);
    const int col_date = require_column(file, schema.upload_date);
    int col_likes = -1;
    int col_comments = -1;
    if (require_engagement) {
        col_likes = require_column(file, schema.likes);
        col_comments = require_column(file, schema.comments);
    } else {
        col_likes = file.column_index(schema.likes);
        col_comments = file.column_index(schema.comments);
    }
    std::array<int, 10> col_emotions{};
    for (std::size_t i = 0; i < 10; ++i) col_emotions[i] = require_column(file, schema.emotions[i]);
    const int col_track = file.column_index(schema.track);

    RawTable out;
    for (std::size_t r = 0; r < file.rows.size(); ++r) {
        const auto& cells = file.rows[r];
        const std::size_t file_row = r + 2;  // header is row 1
        const auto cell = [&](int idx) -> const std::string& {
            static const std::string empty;
            return (idx >= 0 && idx < static_cast<int>(cells.size())) ? cells[idx] : empty;
        };

        // Row-wise deletion: any blank mapped cell drops the whole row.
        bool missing = is_blank(cell(col_views)) || is_blank(cell(col_date));
        if (col_likes >= 0) missing = missing || is_blank(cell(col_likes));
        if (col_comments >= 0) missing = missing || is_blank(cell(col_comments));
        for (int idx : col_emotions) missing = missing || is_blank(cell(idx));
        if (missing) {
            ++out.dropped_missing;
            continue;
        }

        RawRecord rec;
        rec.views = parse_count(cell(col_views), file_row, schema.views);
        rec.likes = col_likes >= 0 ? parse_count(cell(col_likes), file_row, schema.likes) : 1;
        rec.comments =
            col_comments >= 0 ? parse_count(cell(col_comments), file_row, schema.comments) : 0;
        rec.upload_date = parse_date(cell(col_date), file_row, schema.upload_date);
        for (std::size_t i = 0; i < 10; ++i)
            rec.emotions[i] = parse_real(cell(col_emotions[i]), file_row, schema.emotions[i]);
        if (col_track >= 0) rec.track_id = std::string(trimmed(cell(col_track)));

        out.records.push_back(std::move(rec));
        out.source_row_indices.push_back(file_row);
    }
    return out;
}

}  // namespace

RawTable load_csv(const std::string& path, const ColumnMap& schema) {
    return load_impl(path, schema, true);
}

RawTable load_csv_features(const std::string& path, const ColumnMap& schema,
                           bool require_engagement) {
    return load_impl(path, schema, require_engagement);
}

RawTable clean(const RawTable& table) {
    RawTable out;
    out.dropped_missing = table.dropped_missing;
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const auto& rec = table.records[i];
        if (rec.views >= 1 && rec.likes >= 1) {
            out.records.push_back(rec);
            out.source_row_indices.push_back(
                i < table.source_row_indices.size() ? table.source_row_indices[i] : i + 1);
        }
    }
    if (out.records.empty()) throw EmptyAfterClean();
    return out;
}

void write_csv(const std::string& path, const RawTable& table, const ColumnMap& schema) {
    bool any_track = false;
    for (const auto& rec : table.records) any_track = any_track || !rec.track_id.empty();

    csv::Table file;
    if (any_track) file.header.push_back(schema.track);
    file.header.push_back(schema.upload_date);
    file.header.push_back(schema.views);
    file.header.push_back(schema.likes);
    file.header.push_back(schema.comments);
    for (const auto& name : schema.emotions) file.header.push_back(name);

    char buf[64];
    const auto fmt_double = [&buf](double v) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, res.ptr);
    };

    for (const auto& rec : table.records) {
        std::vector<std::string> row;
        if (any_track) row.push_back(rec.track_id);
        row.push_back(rec.upload_date.to_iso());
        row.push_back(std::to_string(rec.views));
        row.push_back(std::to_string(rec.likes));
        row.push_back(std::to_string(rec.comments));
        for (double e : rec.emotions) row.push_back(fmt_double(e));
        file.rows.push_back(std::move(row));
    }
    csv::write_file(path, file);
}

}  // namespace engage
