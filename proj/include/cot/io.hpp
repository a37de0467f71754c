#pragma once

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cot/detail/text.hpp"
#include "cot/error.hpp"
#include "cot/types.hpp"
#include "cot/weak_labels.hpp"

namespace cot {

struct RasterImage {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;  // row-major, band-interleaved by pixel

    float at(int i, int j, int c) const {
        return data[(static_cast<std::size_t>(i) * static_cast<std::size_t>(width) +
                     static_cast<std::size_t>(j)) *
                        static_cast<std::size_t>(channels) +
                    static_cast<std::size_t>(c)];
    }
};

struct ClassMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> labels;  // row-major, 0=clear 1=semi 2=opaque

    std::uint8_t at(int i, int j) const {
        return labels[static_cast<std::size_t>(i) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(j)];
    }
};

namespace detail {

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line, std::size_t column,
                                    const std::string& what) {
    fail(Errc::parse_error,
         path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what);
}

inline double field_double(const std::vector<std::string>& fields, std::size_t col,
                           const std::string& path, std::size_t line) {
    try {
        return parse_double(fields[col], "field");
    } catch (const Error&) {
        parse_fail(path, line, col + 1, "'" + fields[col] + "' is not a number");
    }
}

inline int field_int(const std::vector<std::string>& fields, std::size_t col,
                     const std::string& path, std::size_t line) {
    try {
        return static_cast<int>(parse_int(fields[col], "field"));
    } catch (const Error&) {
        parse_fail(path, line, col + 1, "'" + fields[col] + "' is not an integer");
    }
}

// Expected header names for a labeled dataset (band columns + aux columns).
inline std::vector<std::string> dataset_columns(bool cirrus_present) {
    std::vector<std::string> cols;
    for (std::size_t b = 0; b < kNumBands; ++b) {
        if (!cirrus_present && b == kCirrusBandIndex) continue;
        cols.push_back(band_names()[b]);
    }
    for (const char* aux : {"sat_zenith", "sun_zenith", "azim_diff", "gas_ot", "wvp",
                            "surface_id", "cloud_type", "cot"}) {
        cols.emplace_back(aux);
    }
    return cols;
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.push_back(sep);
        out += parts[i];
    }
    return out;
}

// Maps each expected column name to its index in the file header.  Columns
// may appear in any order; the optional rename map translates foreign column
// names to canonical ones first (for externally produced files).
inline std::vector<std::size_t> header_mapping(const std::vector<std::string>& found_raw,
                                               const std::vector<std::string>& expected,
                                               const std::map<std::string, std::string>& rename) {
    std::vector<std::string> found;
    found.reserve(found_raw.size());
    for (const std::string& name_raw : found_raw) {
        const std::string name = trim(name_raw);
        const auto it = rename.find(name);
        found.push_back(it == rename.end() ? name : it->second);
    }
    const std::string diag = "expected [" + join(expected, ',') + "], found [" + join(found, ',') + "]";
    require(found.size() == expected.size(), Errc::schema_mismatch, diag);
    std::vector<std::size_t> mapping;
    mapping.reserve(expected.size());
    for (const std::string& want : expected) {
        std::size_t hit = found.size();
        for (std::size_t i = 0; i < found.size(); ++i) {
            if (found[i] == want) {
                require(hit == found.size(), Errc::schema_mismatch,
                        "duplicate column '" + want + "'; " + diag);
                hit = i;
            }
        }
        require(hit != found.size(), Errc::schema_mismatch, "missing column '" + want + "'; " + diag);
        mapping.push_back(hit);
    }
    return mapping;
}

struct CsvReader {
    std::ifstream is;
    std::string path;
    std::size_t line_no = 0;
    bool cirrus_present = true;

    explicit CsvReader(const std::string& p) : is(p), path(p) {
        require(is.good(), Errc::io_error, "cannot open '" + p + "' for reading");
    }

    // Reads up to the header line, honoring #cirrus_present pragmas that
    // appear before it; later comment lines are skipped silently.
    std::vector<std::string> read_header() {
        std::string line;
        while (std::getline(is, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty()) continue;
            if (line[0] == '#') {
                const std::string body = trim(line.substr(1));
                if (body == "cirrus_present=false") cirrus_present = false;
                if (body == "cirrus_present=true") cirrus_present = true;
                continue;
            }
            return split_csv(line);
        }
        fail(Errc::schema_mismatch, path + ": no header line found");
    }

    bool next_row(std::vector<std::string>& fields, std::size_t expected_count) {
        std::string line;
        while (std::getline(is, line)) {
            ++line_no;
            line = strip_cr(line);
            if (line.empty() || line[0] == '#') continue;
            fields = split_csv(line);
            if (fields.size() != expected_count) {
                parse_fail(path, line_no, fields.size(),
                           "expected " + std::to_string(expected_count) + " fields, got " +
                               std::to_string(fields.size()));
            }
            return true;
        }
        return false;
    }
};

}  // namespace detail

// Loads a labeled dataset CSV.  Column order is free as long as all expected
// names are present exactly once; a `#cirrus_present=false` pragma before the
// header switches to the 11-band schema.  `rename` translates foreign column
// names to canonical ones (e.g. {"B02","b02"}) before matching.
inline Dataset load_dataset_csv(const std::string& path,
                                const std::map<std::string, std::string>& rename = {}) {
    detail::CsvReader reader(path);
    const std::vector<std::string> header = reader.read_header();
    Dataset d;
    d.cirrus_present = reader.cirrus_present;
    const std::vector<std::string> expected = detail::dataset_columns(d.cirrus_present);
    const std::vector<std::size_t> col = detail::header_mapping(header, expected, rename);
    const std::size_t nbands = d.band_count();

    std::vector<std::string> fields;
    while (reader.next_row(fields, expected.size())) {
        LabeledSample s;
        s.bands.resize(nbands);
        for (std::size_t b = 0; b < nbands; ++b) {
            s.bands[b] = detail::field_double(fields, col[b], path, reader.line_no);
        }
        std::size_t k = nbands;
        s.sat_zenith_deg = detail::field_double(fields, col[k++], path, reader.line_no);
        s.sun_zenith_deg = detail::field_double(fields, col[k++], path, reader.line_no);
        s.azimuth_diff_deg = detail::field_double(fields, col[k++], path, reader.line_no);
        s.gas_optical_thickness = detail::field_double(fields, col[k++], path, reader.line_no);
        s.water_vapour = detail::field_double(fields, col[k++], path, reader.line_no);
        s.surface_profile_id = detail::field_int(fields, col[k++], path, reader.line_no);
        s.cloud_type_id = detail::field_int(fields, col[k++], path, reader.line_no);
        s.cot = detail::field_double(fields, col[k++], path, reader.line_no);
        try {
            validate_sample(s);
        } catch (const Error& e) {
            detail::parse_fail(path, reader.line_no, 1, e.what());
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

// Writes the dataset with shortest-round-trip decimal text, so a reload
// reproduces every value exactly.
inline void save_dataset_csv(const Dataset& d, const std::string& path) {
    validate_dataset(d);
    std::ofstream os(path);
    require(os.good(), Errc::io_error, "cannot open '" + path + "' for writing");
    if (!d.cirrus_present) os << "#cirrus_present=false\n";
    os << detail::join(detail::dataset_columns(d.cirrus_present), ',') << "\n";
    for (const LabeledSample& s : d.samples) {
        for (double b : s.bands) os << detail::format_double(b) << ',';
        os << detail::format_double(s.sat_zenith_deg) << ','
           << detail::format_double(s.sun_zenith_deg) << ','
           << detail::format_double(s.azimuth_diff_deg) << ','
           << detail::format_double(s.gas_optical_thickness) << ','
           << detail::format_double(s.water_vapour) << ','
           << s.surface_profile_id << ',' << s.cloud_type_id << ','
           << detail::format_double(s.cot) << "\n";
    }
    os.flush();
    require(os.good(), Errc::io_error, "write to '" + path + "' failed");
}

namespace detail {

// COTRASTER container: ASCII header line, then H*W*C little-endian f32.
inline void save_cotraster(const std::string& path, int height, int width, int channels,
                           const std::vector<float>& data) {
    require(height > 0 && width > 0 && channels > 0, Errc::bad_shape,
            "raster dimensions must be positive");
    require(data.size() == static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(channels),
            Errc::length_mismatch, "raster payload size does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io_error, "cannot open '" + path + "' for writing");
    os << "COTRASTER " << height << " " << width << " " << channels << "\n";
    for (float v : data) put_f32(os, v);
    os.flush();
    require(os.good(), Errc::io_error, "write to '" + path + "' failed");
}

inline RasterImage load_cotraster(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::io_error, "cannot open '" + path + "' for reading");
    std::string header;
    std::getline(is, header);
    header = strip_cr(header);
    std::istringstream hs(header);
    std::string magic;
    long h = 0, w = 0, c = 0;
    hs >> magic >> h >> w >> c;
    require(!hs.fail() && magic == "COTRASTER", Errc::parse_error,
            path + ": expected 'COTRASTER <H> <W> <C>' header");
    require(h > 0 && w > 0 && c > 0, Errc::parse_error, path + ": non-positive raster dimensions");

    RasterImage img;
    img.height = static_cast<int>(h);
    img.width = static_cast<int>(w);
    img.channels = static_cast<int>(c);
    const std::size_t count = static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                              static_cast<std::size_t>(c);
    img.data.resize(count);
    is.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    require(is.gcount() == static_cast<std::streamsize>(count * sizeof(float)),
            Errc::dimension_mismatch, path + ": truncated raster payload");
    char extra;
    is.read(&extra, 1);
    require(is.gcount() == 0, Errc::dimension_mismatch, path + ": trailing bytes after payload");
    // Stored bytes are little-endian; byte-swap on big-endian hosts.
    if constexpr (std::endian::native == std::endian::big) {
        for (float& v : img.data) {
            std::uint32_t u;
            std::memcpy(&u, &v, 4);
            u = __builtin_bswap32(u);
            std::memcpy(&v, &u, 4);
        }
    }
    for (float v : img.data) {
        require(std::isfinite(v), Errc::parse_error, path + ": non-finite raster value");
    }
    return img;
}

}  // namespace detail

inline void save_raster(const RasterImage& img, const std::string& path) {
    detail::save_cotraster(path, img.height, img.width, img.channels, img.data);
}

// Multiband image loader; COT-map files (C=1) have their own loader in the
// inference layer.
inline RasterImage load_raster(const std::string& path) {
    RasterImage img = detail::load_cotraster(path);
    require(img.channels == 11 || img.channels == 12, Errc::schema_mismatch,
            path + ": expected 11 or 12 channels, got " + std::to_string(img.channels));
    return img;
}

// Class masks are stored as binary PGM (P5) with label*100 grey values, so
// any image viewer shows clear/semi/opaque as black/grey/bright.
inline void write_class_mask(const ClassMask& m, const std::string& path) {
    require(m.height > 0 && m.width > 0, Errc::empty_mask, "cannot write an empty mask");
    require(m.labels.size() == static_cast<std::size_t>(m.height) * static_cast<std::size_t>(m.width),
            Errc::length_mismatch, "mask label count does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    require(os.good(), Errc::io_error, "cannot open '" + path + "' for writing");
    os << "P5\n" << m.width << " " << m.height << "\n255\n";
    for (std::uint8_t label : m.labels) {
        require(label <= 2, Errc::label_out_of_range,
                "mask label " + std::to_string(label) + " not in {0,1,2}");
        os.put(static_cast<char>(label * 100));
    }
    os.flush();
    require(os.good(), Errc::io_error, "write to '" + path + "' failed");
}

namespace detail {

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
inline std::string pgm_token(std::istream& is, const std::string& path) {
    std::string tok;
    int ch;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    require(!tok.empty(), Errc::parse_error, path + ": truncated PGM header");
    return tok;
}

}  // namespace detail

inline ClassMask load_class_mask(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), Errc::io_error, "cannot open '" + path + "' for reading");
    require(detail::pgm_token(is, path) == "P5", Errc::parse_error, path + ": not a binary PGM");
    const long w = detail::parse_int(detail::pgm_token(is, path), "PGM width");
    const long h = detail::parse_int(detail::pgm_token(is, path), "PGM height");
    const long maxval = detail::parse_int(detail::pgm_token(is, path), "PGM maxval");
    require(w > 0 && h > 0, Errc::parse_error, path + ": non-positive PGM dimensions");
    require(maxval == 255, Errc::parse_error, path + ": expected maxval 255");

    ClassMask m;
    m.height = static_cast<int>(h);
    m.width = static_cast<int>(w);
    const std::size_t count = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    std::vector<char> raw(count);
    is.read(raw.data(), static_cast<std::streamsize>(count));
    require(is.gcount() == static_cast<std::streamsize>(count), Errc::parse_error,
            path + ": truncated PGM payload");
    m.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto v = static_cast<std::uint8_t>(raw[i]);
        require(v == 0 || v == 100 || v == 200, Errc::parse_error,
                path + ": pixel value " + std::to_string(v) + " not in {0,100,200}");
        m.labels[i] = static_cast<std::uint8_t>(v / 100);
    }
    return m;
}

struct WeakDataset {
    std::vector<WeakSample> samples;
    bool cirrus_present = true;

    std::size_t band_count() const { return cirrus_present ? kNumBands : kNumBands - 1; }
};

// Weak-label pixel CSV: band columns plus a `label` column with values
// clear/semi/opaque ("cloudy" is accepted as a synonym for opaque so binary
// calibration files need no separate schema).
inline WeakDataset load_weak_csv(const std::string& path,
                                 const std::map<std::string, std::string>& rename = {}) {
    detail::CsvReader reader(path);
    const std::vector<std::string> header = reader.read_header();
    WeakDataset d;
    d.cirrus_present = reader.cirrus_present;
    std::vector<std::string> expected;
    for (std::size_t b = 0; b < kNumBands; ++b) {
        if (!d.cirrus_present && b == kCirrusBandIndex) continue;
        expected.push_back(band_names()[b]);
    }
    expected.emplace_back("label");
    const std::vector<std::size_t> col = detail::header_mapping(header, expected, rename);
    const std::size_t nbands = d.band_count();

    std::vector<std::string> fields;
    while (reader.next_row(fields, expected.size())) {
        WeakSample s;
        s.bands.resize(nbands);
        for (std::size_t b = 0; b < nbands; ++b) {
            s.bands[b] = detail::field_double(fields, col[b], path, reader.line_no);
            if (!std::isfinite(s.bands[b])) {
                detail::parse_fail(path, reader.line_no, col[b] + 1, "non-finite band value");
            }
        }
        const std::string label = detail::trim(fields[col[nbands]]);
        if (label == "clear") {
            s.label = WeakLabel::clear;
        } else if (label == "semi") {
            s.label = WeakLabel::semi;
        } else if (label == "opaque" || label == "cloudy") {
            s.label = WeakLabel::opaque;
        } else {
            detail::parse_fail(path, reader.line_no, col[nbands] + 1,
                               "unknown label '" + label + "'");
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

inline void save_weak_csv(const WeakDataset& d, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), Errc::io_error, "cannot open '" + path + "' for writing");
    if (!d.cirrus_present) os << "#cirrus_present=false\n";
    for (std::size_t b = 0; b < kNumBands; ++b) {
        if (!d.cirrus_present && b == kCirrusBandIndex) continue;
        os << band_names()[b] << ',';
    }
    os << "label\n";
    static const char* names[] = {"clear", "semi", "opaque"};
    for (const WeakSample& s : d.samples) {
        require(s.bands.size() == d.band_count(), Errc::bad_shape,
                "weak sample band count does not match dataset");
        for (double b : s.bands) os << detail::format_double(b) << ',';
        os << names[static_cast<int>(s.label)] << "\n";
    }
    os.flush();
    require(os.good(), Errc::io_error, "write to '" + path + "' failed");
}

}  // namespace cot
