#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace driveloc {

// Base class for all library errors. The CLI maps IoError to exit code 2 and
// ConfigError to exit code 3; everything else is exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// A keypoint file row with the wrong column count or a non-numeric field.
struct MalformedRow : Error {
    std::int64_t line_no;
    MalformedRow(std::int64_t line, const std::string& detail)
        : Error("malformed row at line " + std::to_string(line) + ": " + detail),
          line_no(line) {}
};

// frame_index decreased between consecutive rows.
struct NonMonotonicFrames : Error {
    std::int64_t line_no;
    NonMonotonicFrames(std::int64_t line, std::int64_t prev, std::int64_t cur)
        : Error("frame_index decreases at line " + std::to_string(line) + " (" +
                std::to_string(prev) + " -> " + std::to_string(cur) + ")"),
          line_no(line) {}
};

struct UpsampleRequested : Error {
    UpsampleRequested(double source_hz, double target_hz)
        : Error("target rate " + std::to_string(target_hz) +
                " Hz exceeds source rate " + std::to_string(source_hz) + " Hz") {}
};

struct EmptySeries : Error {
    EmptySeries() : Error("series has no observations") {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Group sizes too small for the permutation-null moments (n1 < 2 or n0 < 2).
struct DegenerateGroup : Error {
    using Error::Error;
};

// Every candidate interval in a scan had zero variance.
struct NoValidCandidate : Error {
    NoValidCandidate() : Error("no candidate interval with positive variance") {}
};

struct OverlappingActivities : Error {
    using Error::Error;
};

}  // namespace driveloc
