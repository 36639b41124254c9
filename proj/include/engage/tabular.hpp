#ifndef ENGAGE_TABULAR_HPP
#define ENGAGE_TABULAR_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "engage/dates.hpp"

namespace engage {

inline constexpr std::array<const char*, 10> kEmotionNames = {
    "Valence", "Arousal", "Tension", "Atmospheric", "Happy",
    "Dark",    "Sad",     "Angry",   "Sensual",     "Sentimental"};

// One parsed song row. Counts are kept signed: negative values are
// well-formed integers on ingest and are removed by clean(), which owns the
// views/likes positivity rule.
struct RawRecord {
    std::string track_id;  // empty when the optional Track column is absent
    Date upload_date;
    std::int64_t views = 0;
    std::int64_t likes = 0;
    std::int64_t comments = 0;
    std::array<double, 10> emotions{};

    bool operator==(const RawRecord& other) const = default;
};

struct RawTable {
    std::vector<RawRecord> records;
    // Physical 1-based row numbers in the source file (header is row 1, so
    // data rows start at 2). Strictly increasing.
    std::vector<std::size_t> source_row_indices;
    // Rows dropped during load because a mapped cell was blank.
    std::size_t dropped_missing = 0;

    bool operator==(const RawTable& other) const {
        return records == other.records && source_row_indices == other.source_row_indices;
    }
};

// Logical column -> header name. Defaults match the expected export schema.
struct ColumnMap {
    std::string views = "Views";
    std::string likes = "Likes";
    std::string comments = "Comments Number";
    std::string upload_date = "Upload date";
    std::string track = "Track";  // optional column
    std::array<std::string, 10> emotions = {"Valence", "Arousal", "Tension", "Atmospheric",
                                            "Happy",   "Dark",    "Sad",     "Angry",
                                            "Sensual", "Sentimental"};
};

// Parses a CSV file. Rows with any blank mapped cell are dropped (row-wise
// deletion) and counted in dropped_missing; a malformed non-blank cell raises
// ParseError; a required column missing from the header raises MissingColumn.
RawTable load_csv(const std::string& path, const ColumnMap& schema = {});

// Variant for prediction inputs: the Likes / Comments Number columns become
// optional when `require_engagement` is false (their values are only consumed
// by the log_clr feature). Absent columns fill likes=1, comments=0.
RawTable load_csv_features(const std::string& path, const ColumnMap& schema,
                           bool require_engagement);

// Keeps exactly the records with views >= 1 and likes >= 1 (comments = 0 is
// retained). Raises EmptyAfterClean when nothing survives.
RawTable clean(const RawTable& table);

// Writes records back out in the schema's column layout (Track column first
// when any record carries an id). Numeric fields use shortest round-trip
// formatting so a rewrite-then-reload is lossless.
void write_csv(const std::string& path, const RawTable& table, const ColumnMap& schema = {});

}  // namespace engage

#endif
