#pragma once

#include <stdexcept>
#include <string>

namespace cot {

enum class Errc {
    out_of_range,
    bad_ratios,
    bad_count,
    bad_shape,
    bad_config,
    shape_mismatch,
    stale_cache,
    parse_error,
    schema_mismatch,
    dimension_mismatch,
    label_out_of_range,
    length_mismatch,
    empty_input,
    empty_dataset,
    empty_mask,
    empty_matrix,
    empty_validation,
    degenerate_geometry,
    window_too_large,
    singular_system,
    version_mismatch,
    io_error,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::out_of_range: return "OutOfRange";
        case Errc::bad_ratios: return "BadRatios";
        case Errc::bad_count: return "BadCount";
        case Errc::bad_shape: return "BadShape";
        case Errc::bad_config: return "BadConfig";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::stale_cache: return "StaleCache";
        case Errc::parse_error: return "ParseError";
        case Errc::schema_mismatch: return "SchemaMismatch";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::label_out_of_range: return "LabelOutOfRange";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::empty_input: return "Empty";
        case Errc::empty_dataset: return "EmptyDataset";
        case Errc::empty_mask: return "EmptyMask";
        case Errc::empty_matrix: return "EmptyMatrix";
        case Errc::empty_validation: return "EmptyValidation";
        case Errc::degenerate_geometry: return "DegenerateGeometry";
        case Errc::window_too_large: return "WindowTooLarge";
        case Errc::singular_system: return "SingularSystem";
        case Errc::version_mismatch: return "VersionMismatch";
        case Errc::io_error: return "IoError";
    }
    return "Error";
}

// Suggested process exit code: 2 for bad input/config, 1 for runtime failure.
inline int errc_exit_code(Errc c) {
    switch (c) {
        case Errc::io_error:
        case Errc::stale_cache:
        case Errc::shape_mismatch:
        case Errc::singular_system:
            return 1;
        default:
            return 2;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace cot
