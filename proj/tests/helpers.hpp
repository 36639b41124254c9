#ifndef ENGAGE_TEST_HELPERS_HPP
#define ENGAGE_TEST_HELPERS_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include "engage/dates.hpp"
#include "engage/rng.hpp"
#include "engage/tabular.hpp"

namespace helpers {

inline std::filesystem::path test_dir() {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / "engage_test_work";
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

inline std::string path_in_test_dir(const std::string& name) {
    return (test_dir() / name).string();
}

inline std::string write_file(const std::string& name, const std::string& content) {
    const auto path = test_dir() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

// Header in the expected export layout, emotions in schema order.
inline std::string csv_header(bool with_track = true) {
    std::string h = with_track ? "Track,Upload date,Views,Likes,Comments Number"
                               : "Upload date,Views,Likes,Comments Number";
    for (const char* name : engage::kEmotionNames) {
        h += ',';
        h += name;
    }
    h += '\n';
    return h;
}

inline engage::Date random_date(engage::Rng& rng) {
    // 2015-01-01 .. 2024-12-31 by serial day.
    const std::int64_t lo = engage::Date{2015, 1, 1}.serial_day();
    const std::int64_t hi = engage::Date{2024, 12, 31}.serial_day();
    const std::int64_t serial = rng.uniform_int(lo, hi);
    return engage::Date::from_days(std::chrono::sys_days{std::chrono::days{serial}});
}

// Random table with occasional awkward ids and negative counts; suitable for
// write/load round-trip checks (ids avoid leading/trailing whitespace, which
// the loader trims away).
inline engage::RawTable random_table(engage::Rng& rng, std::size_t n, bool with_track = true) {
    engage::RawTable table;
    for (std::size_t i = 0; i < n; ++i) {
        engage::RawRecord rec;
        if (with_track) {
            switch (rng.uniform_int(0, 4)) {
                case 0: rec.track_id = "plain-" + std::to_string(i); break;
                case 1: rec.track_id = "comma,id-" + std::to_string(i); break;
                case 2: rec.track_id = "quote\"id-" + std::to_string(i); break;
                case 3: rec.track_id = "space id " + std::to_string(i); break;
                default: rec.track_id = "line\nbreak-" + std::to_string(i); break;
            }
        }
        rec.upload_date = random_date(rng);
        rec.views = rng.uniform_int(-5, 100000);
        rec.likes = rng.uniform_int(-2, 5000);
        rec.comments = rng.uniform_int(-2, 2000);
        for (double& e : rec.emotions) e = rng.uniform();
        table.records.push_back(std::move(rec));
        table.source_row_indices.push_back(i + 2);
    }
    return table;
}

// Random table that always survives cleaning (positive views and likes).
inline engage::RawTable random_clean_table(engage::Rng& rng, std::size_t n) {
    engage::RawTable table = random_table(rng, n);
    for (auto& rec : table.records) {
        rec.views = rng.uniform_int(1, 1000000);
        rec.likes = rng.uniform_int(1, rec.views);
        rec.comments = rng.uniform_int(0, rec.likes);
    }
    return table;
}

}  // namespace helpers

#endif
